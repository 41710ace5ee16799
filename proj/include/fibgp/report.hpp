#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "fibgp/evolve.hpp"
#include "fibgp/fdp.hpp"
#include "fibgp/tree.hpp"

namespace fibgp {

// Daida-style circular lattice: the tree viewed from above, root at the
// centre, each node on the ring equal to its depth.  Angular placement is a
// reconstruction: each parent's span is halved, left child first.
struct LatticePoint {
  NodeIndex site;
  double x, y;
  int ring;
  int disrupted_cases;  // 0..20
  char glyph;           // '=' SRF, '*' MUL, else opcode initial
};

inline std::vector<LatticePoint> lattice_layout(const Tree& tree,
                                                const std::vector<int>& counts) {
  if (counts.size() != tree.size())
    throw std::invalid_argument("lattice_layout: counts/tree mismatch");
  const NodeLinks links = build_links(tree);
  const double two_pi = 2.0 * 3.14159265358979323846;
  std::vector<double> lo(tree.size()), hi(tree.size());
  lo[0] = 0.0;
  hi[0] = two_pi;
  std::vector<LatticePoint> points;
  points.reserve(tree.size());
  for (NodeIndex i = 0; i < tree.size(); ++i) {
    if (i != 0) {
      const NodeIndex p = links.parent[i];
      const double mid = 0.5 * (lo[p] + hi[p]);
      if (links.left[p] == i) {
        lo[i] = lo[p];
        hi[i] = mid;
      } else {
        lo[i] = mid;
        hi[i] = hi[p];
      }
    }
    const double angle = 0.5 * (lo[i] + hi[i]);
    const double ring = static_cast<double>(links.node_depth[i]);
    points.push_back({i, ring * std::cos(angle), ring * std::sin(angle),
                      links.node_depth[i], counts[i], glyph(tree.ops[i])});
  }
  return points;
}

struct SummaryRow {
  std::size_t size = 0;
  int depth = 0;
  double expected_depth = 0.0;
  double expected_depth_std = 0.0;
  std::uint64_t fitness = 0;
  double plus1_pct = 0.0;
  double plus1_slope = 0.0;
  double randint_pct = 0.0;
  double randint_slope = 0.0;
};

inline SummaryRow make_summary(const Tree& tree, const FdpReport& fdp_plus1,
                               const FdpReport& fdp_randint) {
  SummaryRow row;
  row.size = tree.size();
  row.depth = depth(tree);
  if (row.size >= 3) {
    const DepthStats ds = expected_random_tree_depth(row.size);
    row.expected_depth = ds.mean_depth;
    row.expected_depth_std = ds.std_depth;
  }
  row.fitness = fdp_plus1.fitness.total_abs_error;
  row.plus1_pct = fdp_plus1.disrupted_any_case_fraction * 100.0;
  row.plus1_slope = fdp_plus1.median_slope;
  row.randint_pct = fdp_randint.disrupted_any_case_fraction * 100.0;
  row.randint_slope = fdp_randint.median_slope;
  return row;
}

namespace detail {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace detail

// Stats stream CSV.  The gpops column is wall-clock derived; callers that
// need byte-reproducible files pass include_gpops = false and it is written
// as 0.
inline void write_stats_csv(const std::string& path,
                            const std::vector<GenStats>& stats,
                            bool include_gpops = false) {
  auto out = detail::open_out(path);
  out << "gen,mean_size,mean_fitness,best_fitness,frac_diff,opcodes_full,"
         "opcodes_eval,gpops\n";
  for (const GenStats& s : stats) {
    out << s.generation << ',' << detail::fmt(s.mean_size) << ','
        << detail::fmt(s.mean_fitness) << ',' << s.best_fitness.total_abs_error
        << ',' << detail::fmt(s.frac_child_fitness_differs) << ','
        << s.opcodes_full << ',' << s.opcodes_evaluated << ','
        << detail::fmt(include_gpops ? s.wallclock_gpops : 0.0) << '\n';
  }
}

inline void write_tune_csv(const std::string& path,
                           const std::vector<TuneRow>& rows) {
  auto out = detail::open_out(path);
  out << "pop_size,successes,runs\n";
  for (const TuneRow& r : rows)
    out << r.pop_size << ',' << r.successes << ',' << r.runs << '\n';
}

inline void write_fdp_hist_csv(const std::string& path,
                               const FdpReport& report) {
  auto out = detail::open_out(path);
  out << "case,distance,count\n";
  for (int j = 0; j < kTestCases; ++j)
    for (const auto& [d, c] :
         report.per_case_distance_histogram[static_cast<std::size_t>(j)])
      out << j << ',' << d << ',' << c << '\n';
}

inline void write_fdp_depth_csv(const std::string& path,
                                const FdpReport& report) {
  auto out = detail::open_out(path);
  out << "site_depth,count\n";
  for (const auto& [d, c] : report.site_depth_histogram)
    out << d << ',' << c << '\n';
}

inline void write_fdp_lattice_csv(const std::string& path,
                                  const std::vector<LatticePoint>& points) {
  auto out = detail::open_out(path);
  out << "site,x,y,disrupted_case_count,glyph\n";
  for (const LatticePoint& p : points)
    out << p.site << ',' << detail::fmt(p.x) << ',' << detail::fmt(p.y) << ','
        << p.disrupted_cases << ',' << p.glyph << '\n';
}

inline void write_summary_csv(const std::string& path,
                              const std::vector<SummaryRow>& rows) {
  auto out = detail::open_out(path);
  out << "size,depth,expected_depth,expected_depth_std,fitness,plus1_pct,"
         "plus1_slope,randint_pct,randint_slope\n";
  for (const SummaryRow& r : rows)
    out << r.size << ',' << r.depth << ','
        << detail::fmt(r.expected_depth) << ','
        << detail::fmt(r.expected_depth_std) << ',' << r.fitness << ','
        << detail::fmt(r.plus1_pct) << ',' << detail::fmt(r.plus1_slope) << ','
        << detail::fmt(r.randint_pct) << ',' << detail::fmt(r.randint_slope)
        << '\n';
}

// 21-level colour scale: 0 -> grey, 1..20 -> blue-to-yellow gradient.
inline std::string lattice_colour(int disrupted_cases) {
  if (disrupted_cases <= 0) return "#b0b0b0";
  const double t = static_cast<double>(disrupted_cases - 1) / 19.0;
  const int r = static_cast<int>(40 + t * (255 - 40));
  const int g = static_cast<int>(60 + t * (220 - 60));
  const int b = static_cast<int>(200 - t * 200);
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

// Self-contained SVG of the lattice, clipped to the (-clip,+clip)^2 window
// centred on the root.
inline void write_lattice_svg(const std::string& path,
                              const std::vector<LatticePoint>& points,
                              double clip = 10.0) {
  auto out = detail::open_out(path);
  const double scale = 320.0 / clip;
  const double half = clip * scale;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
      << detail::fmt(2 * half) << "\" height=\"" << detail::fmt(2 * half)
      << "\" viewBox=\"0 0 " << detail::fmt(2 * half) << ' '
      << detail::fmt(2 * half) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const LatticePoint& p : points) {
    if (p.x < -clip || p.x > clip || p.y < -clip || p.y > clip) continue;
    const double cx = half + p.x * scale;
    const double cy = half - p.y * scale;
    const std::string colour = lattice_colour(p.disrupted_cases);
    if (p.disrupted_cases == 0) {
      out << "<circle cx=\"" << detail::fmt(cx) << "\" cy=\""
          << detail::fmt(cy)
          << "\" r=\"1.5\" fill=\"none\" stroke=\"" << colour
          << "\" stroke-dasharray=\"1,1\"/>\n";
    } else {
      out << "<circle cx=\"" << detail::fmt(cx) << "\" cy=\""
          << detail::fmt(cy) << "\" r=\"4\" fill=\"" << colour << "\"/>\n";
    }
    if (p.glyph == '=' || p.glyph == '*') {
      out << "<text x=\"" << detail::fmt(cx + 4) << "\" y=\""
          << detail::fmt(cy - 4)
          << "\" font-size=\"8\" font-family=\"monospace\">" << p.glyph
          << "</text>\n";
    }
  }
  out << "</svg>\n";
}

// Gnuplot-ready data has already been written as CSV; this adds plot script
// stubs for the usual figures.
inline void emit_plot_scripts(const std::string& dir,
                              const std::vector<std::string>& fdp_kinds) {
  {
    auto out = detail::open_out(dir + "/stats.gp");
    out << "set datafile separator ','\n"
           "set key autotitle columnhead\n"
           "set logscale y\n"
           "plot 'stats.csv' using 1:2 with lines title 'mean size', \\\n"
           "     'stats.csv' using 1:3 with lines title 'mean fitness', \\\n"
           "     'stats.csv' using 1:5 with lines title 'frac fitness differs'\n";
  }
  {
    auto out = detail::open_out(dir + "/tune.gp");
    out << "set datafile separator ','\n"
           "set key autotitle columnhead\n"
           "plot 'tune.csv' using 1:2 with linespoints title 'successes'\n";
  }
  for (const std::string& kind : fdp_kinds) {
    {
      auto out = detail::open_out(dir + "/fdp_decay_" + kind + ".gp");
      out << "set datafile separator ','\n"
             "set logscale y\n"
             "# one block per test case 0..19\n"
             "plot for [c=0:19] 'fdp_hist_" << kind
          << ".csv' using 2:($1==c?$3:1/0) with linespoints title sprintf('case %d',c)\n";
    }
    {
      auto out = detail::open_out(dir + "/fdp_depth_" + kind + ".gp");
      out << "set datafile separator ','\n"
             "set logscale y\n"
             "plot 'fdp_depth_" << kind
          << ".csv' using 1:2 with boxes title 'disruptive sites'\n";
    }
  }
}

}  // namespace fibgp
