#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fibgp/eval.hpp"
#include "fibgp/parallel.hpp"
#include "fibgp/rng.hpp"
#include "fibgp/tree.hpp"

namespace fibgp {

// Runtime perturbation injected at a node's output: the minimal +1 change,
// or full replacement by a uniform 32-bit signed value (one fresh
// counter-based draw per site and test case).
struct PerturbKind {
  enum class Tag { PlusOne, RandInt };
  Tag tag = Tag::PlusOne;
  std::uint64_t rand_seed = 0;

  static PerturbKind plus_one() { return {Tag::PlusOne, 0}; }
  static PerturbKind rand_int(std::uint64_t seed) {
    return {Tag::RandInt, seed};
  }

  std::int32_t disrupted_value(std::int32_t baseline, NodeIndex site,
                               int j) const {
    return tag == Tag::PlusOne
               ? wrap_add(baseline, 1)
               : counter_draw_i32(rand_seed, site, static_cast<std::uint64_t>(j));
  }
};

// Mechanism that extinguished the disruption (or Root when it reached the
// output).  MulZero and SrfDefault are the dominant mechanisms; SrfOther and
// ValueCoincidence make the taxonomy exhaustive.
enum class StopCause {
  MulZero,
  SrfDefault,
  SrfOther,
  ValueCoincidence,
  Root,
};

constexpr std::string_view stop_cause_name(StopCause c) {
  switch (c) {
    case StopCause::MulZero: return "MUL_ZERO";
    case StopCause::SrfDefault: return "SRF_DEFAULT";
    case StopCause::SrfOther: return "SRF_OTHER";
    case StopCause::ValueCoincidence: return "VALUE_COINCIDENCE";
    case StopCause::Root: return "ROOT";
  }
  return "?";
}

// Outcome of one perturbation site x test case.  distance counts the
// ancestor functions whose output changed; 0 means the disruption died at
// the immediate parent (or the site was the root).
struct FdpRecord {
  NodeIndex site;
  int site_depth;
  int test_case;
  int distance;
  bool reached_root;
  StopCause stop_cause;
  NodeIndex stop_node;       // ancestor where propagation ended (site itself
                             // for an on-site value coincidence)
  std::int32_t root_value;   // root output under the perturbation
  std::uint32_t overflow_events;
  std::array<std::uint32_t, 3> overflow_by_op;  // Add, Sub, Mul
};

namespace detail {

// Ancestor-path propagation with cached sibling values.  SRF reads the
// baseline memo: the disruption is applied per test case, earlier cases are
// unchanged.
inline FdpRecord propagate(const Tree& tree, const NodeLinks& links,
                           const EvalTrace& trace, NodeIndex site, int j,
                           const PerturbKind& kind) {
  FdpRecord rec{};
  rec.site = site;
  rec.site_depth = links.node_depth[site];
  rec.test_case = j;
  const std::int32_t baseline = trace.value(j, site);
  std::int32_t v = kind.disrupted_value(baseline, site, j);
  if (v == baseline) {
    // Possible only for RandInt: the draw reproduced the baseline value.
    rec.stop_cause = StopCause::ValueCoincidence;
    rec.stop_node = site;
    rec.root_value = trace.memo.answers[static_cast<std::size_t>(j)];
    return rec;
  }
  NodeIndex cur = site;
  for (;;) {
    const NodeIndex p = links.parent[cur];
    if (p == tree.size()) {
      rec.reached_root = true;
      rec.stop_cause = StopCause::Root;
      rec.stop_node = cur;
      rec.root_value = v;
      return rec;
    }
    const Opcode op = tree.ops[p];
    const bool changed_is_left = links.left[p] == cur;
    const NodeIndex sibling = changed_is_left ? links.right[p] : links.left[p];
    const std::int32_t sib = trace.value(j, sibling);
    const std::int32_t a = changed_is_left ? v : sib;
    const std::int32_t b = changed_is_left ? sib : v;
    const std::int32_t recomputed = eval_node(op, a, b, j, trace.memo);
    if (overflows(op, a, b)) {
      ++rec.overflow_events;
      ++rec.overflow_by_op[static_cast<std::size_t>(op)];
    }
    if (recomputed == trace.value(j, p)) {
      rec.stop_node = p;
      rec.root_value = trace.memo.answers[static_cast<std::size_t>(j)];
      if (op == Opcode::Mul) {
        rec.stop_cause =
            sib == 0 ? StopCause::MulZero : StopCause::ValueCoincidence;
      } else if (op == Opcode::Srf) {
        if (changed_is_left) {
          // Index argument disrupted: default returned both before and
          // after iff both indices are invalid.
          const std::int32_t base_idx = trace.value(j, links.left[p]);
          const bool base_invalid = !(base_idx >= 0 && base_idx < j);
          const bool new_invalid = !(v >= 0 && v < j);
          rec.stop_cause = base_invalid && new_invalid ? StopCause::SrfDefault
                                                       : StopCause::SrfOther;
        } else {
          // Default argument disrupted but the index is valid, so the
          // memo value is returned regardless.
          rec.stop_cause = StopCause::SrfOther;
        }
      } else {
        rec.stop_cause = StopCause::ValueCoincidence;
      }
      return rec;
    }
    ++rec.distance;
    v = recomputed;
    cur = p;
  }
}

}  // namespace detail

inline FdpRecord perturb_propagate(const Tree& tree, const EvalTrace& trace,
                                   NodeIndex site, int j,
                                   const PerturbKind& kind) {
  if (trace.tree_size != tree.size() ||
      trace.values.size() != static_cast<std::size_t>(kTestCases) * tree.size())
    throw std::invalid_argument("perturb_propagate: trace/tree mismatch");
  if (site >= tree.size() || j < 0 || j >= kTestCases)
    throw std::invalid_argument("perturb_propagate: site/case out of range");
  return detail::propagate(tree, build_links(tree), trace, site, j, kind);
}

using DistanceHistogram = std::map<int, std::uint64_t>;

struct FdpReport {
  std::size_t tree_size = 0;
  int tree_depth = 0;
  Fitness fitness;
  std::uint64_t injections = 0;
  double disrupted_any_case_fraction = 0.0;  // of sites, in [0,1]
  std::array<DistanceHistogram, kTestCases> per_case_distance_histogram;
  double median_slope = 0.0;  // NaN when undefined
  std::array<std::optional<double>, kTestCases> per_case_slopes;
  std::map<int, std::uint64_t> site_depth_histogram;  // disruptive sites
  std::array<std::uint64_t, 3> overflow_by_op{};      // Add, Sub, Mul
  std::vector<int> lattice_counts;  // per site: cases disrupted, 0..20
  std::vector<FdpRecord> records;   // site-major, case-minor (when kept)
};

struct SlopeFit {
  double median;
  std::array<std::optional<double>, kTestCases> per_case;
};

// Per test case, ordinary least squares of ln(count) against distance over
// the nonzero bins; median across the cases with a defined slope.  Natural
// log units per level.
inline SlopeFit fit_decay_slope(
    const std::array<DistanceHistogram, kTestCases>& histograms) {
  SlopeFit fit{};
  std::vector<double> slopes;
  for (int j = 0; j < kTestCases; ++j) {
    const auto& hist = histograms[static_cast<std::size_t>(j)];
    std::size_t bins = 0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [d, c] : hist) {
      if (c == 0) continue;
      const double x = d;
      const double y = std::log(static_cast<double>(c));
      ++bins;
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    if (bins < 2) continue;  // degenerate histogram, slope undefined
    const double n = static_cast<double>(bins);
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.per_case[static_cast<std::size_t>(j)] = slope;
    slopes.push_back(slope);
  }
  if (slopes.empty())
    throw std::domain_error("fit_decay_slope: all histograms degenerate");
  std::sort(slopes.begin(), slopes.end());
  const std::size_t m = slopes.size();
  fit.median = m % 2 == 1 ? slopes[m / 2]
                          : 0.5 * (slopes[m / 2 - 1] + slopes[m / 2]);
  return fit;
}

// Memo semantics during perturbation.  Baseline (the default): SRF reads the
// unperturbed earlier outputs.  Sequential is the alternative reading where
// each perturbed root output feeds the memo for the site's later cases; it
// re-evaluates the whole tree per case.  Exposed for measurement only.
enum class MemoMode { Baseline, Sequential };

struct FdpOptions {
  unsigned jobs = 1;
  MemoMode memo_mode = MemoMode::Baseline;
  bool keep_records = true;
};

namespace detail {

// Whole-tree evaluation with the value at `site` replaced by
// transform(natural value).  Perturbed per-node values go to `values`.
template <typename Transform>
inline std::int32_t eval_case_perturbed(const Tree& t, int j,
                                        const MemoTable& memo, NodeIndex site,
                                        Transform&& transform,
                                        std::int32_t* values,
                                        std::vector<std::int32_t>& stack) {
  stack.clear();
  for (std::size_t i = t.size(); i-- > 0;) {
    const Opcode op = t.ops[i];
    std::int32_t v;
    if (is_function(op)) {
      const std::int32_t a = stack.back();
      stack.pop_back();
      const std::int32_t b = stack.back();
      stack.pop_back();
      v = eval_node(op, a, b, j, memo);
    } else {
      v = eval_node(op, 0, 0, j, memo);
    }
    if (i == site) v = transform(v);
    stack.push_back(v);
    if (values) values[i] = v;
  }
  return stack.back();
}

inline FdpRecord propagate_sequential(const Tree& tree, const NodeLinks& links,
                                      const EvalTrace& trace, NodeIndex site,
                                      int j, const PerturbKind& kind,
                                      const MemoTable& site_memo,
                                      std::vector<std::int32_t>& values,
                                      std::vector<std::int32_t>& stack) {
  FdpRecord rec{};
  rec.site = site;
  rec.site_depth = links.node_depth[site];
  rec.test_case = j;
  const std::int32_t root = eval_case_perturbed(
      tree, j, site_memo, site,
      [&](std::int32_t natural) {
        return kind.disrupted_value(natural, site, j);
      },
      values.data(), stack);
  rec.root_value = root;
  rec.reached_root =
      root != trace.memo.answers[static_cast<std::size_t>(j)];
  // Distance against the baseline trace: contiguous changed prefix of the
  // ancestor path.
  NodeIndex cur = site;
  rec.stop_node = site;
  if (values[site] == trace.value(j, site)) {
    rec.stop_cause = StopCause::ValueCoincidence;
    return rec;
  }
  for (;;) {
    const NodeIndex p = links.parent[cur];
    if (p == tree.size()) {
      rec.stop_cause = StopCause::Root;
      rec.stop_node = cur;
      return rec;
    }
    const Opcode op = tree.ops[p];
    const NodeIndex l = links.left[p];
    const NodeIndex r = links.right[p];
    if (overflows(op, values[l], values[r])) {
      ++rec.overflow_events;
      if (is_function(op) && op != Opcode::Srf)
        ++rec.overflow_by_op[static_cast<std::size_t>(op)];
    }
    if (values[p] == trace.value(j, p)) {
      rec.stop_node = p;
      if (op == Opcode::Mul) {
        const std::int32_t sib = links.left[p] == cur ? values[r] : values[l];
        rec.stop_cause =
            sib == 0 ? StopCause::MulZero : StopCause::ValueCoincidence;
      } else if (op == Opcode::Srf) {
        const std::int32_t idx = values[l];
        const bool valid = idx >= 0 && idx < j;
        rec.stop_cause = links.left[p] == cur && !valid
                             ? StopCause::SrfDefault
                             : StopCause::SrfOther;
      } else {
        rec.stop_cause = StopCause::ValueCoincidence;
      }
      return rec;
    }
    ++rec.distance;
    cur = p;
  }
}

}  // namespace detail

// Full sweep: every site x every test case, aggregated.  Deterministic for
// any job count (counter-based RandInt draws, per-site partials reduced in
// site order).
inline FdpReport run_fdp(const Tree& tree, const PerturbKind& kind,
                         const FdpOptions& options = {}) {
  if (!well_formed(tree)) throw std::invalid_argument("run_fdp: bad tree");
  const std::size_t n = tree.size();
  EvalResult base = fitness(tree, /*record_trace=*/true);
  const NodeLinks links = build_links(tree);

  struct SitePartial {
    std::array<FdpRecord, kTestCases> records;
  };
  std::vector<SitePartial> partials(n);

  parallel_for(n, options.jobs, [&](std::size_t site) {
    if (options.memo_mode == MemoMode::Baseline) {
      for (int j = 0; j < kTestCases; ++j)
        partials[site].records[static_cast<std::size_t>(j)] =
            detail::propagate(tree, links, base.trace, site, j, kind);
    } else {
      // Sequential reading: this site's perturbed outputs feed the memo.
      MemoTable memo;
      std::vector<std::int32_t> values(n);
      std::vector<std::int32_t> stack;
      for (int j = 0; j < kTestCases; ++j) {
        FdpRecord rec = detail::propagate_sequential(
            tree, links, base.trace, site, j, kind, memo, values, stack);
        memo.answers[static_cast<std::size_t>(j)] = rec.root_value;
        partials[site].records[static_cast<std::size_t>(j)] = rec;
      }
    }
  });

  FdpReport report;
  report.tree_size = n;
  report.tree_depth = depth(tree);
  report.fitness = base.fitness;
  report.injections = static_cast<std::uint64_t>(n) * kTestCases;
  report.lattice_counts.assign(n, 0);
  if (options.keep_records) report.records.reserve(n * kTestCases);
  std::size_t disruptive_sites = 0;
  for (std::size_t site = 0; site < n; ++site) {
    int disrupted_cases = 0;
    for (const FdpRecord& rec : partials[site].records) {
      if (rec.reached_root) ++disrupted_cases;
      report.per_case_distance_histogram[static_cast<std::size_t>(
          rec.test_case)][rec.distance]++;
      for (std::size_t k = 0; k < 3; ++k)
        report.overflow_by_op[k] += rec.overflow_by_op[k];
      if (options.keep_records) report.records.push_back(rec);
    }
    report.lattice_counts[site] = disrupted_cases;
    if (disrupted_cases > 0) {
      ++disruptive_sites;
      report.site_depth_histogram[links.node_depth[site]]++;
    }
  }
  report.disrupted_any_case_fraction =
      static_cast<double>(disruptive_sites) / static_cast<double>(n);
  try {
    SlopeFit fit = fit_decay_slope(report.per_case_distance_histogram);
    report.median_slope = fit.median;
    report.per_case_slopes = fit.per_case;
  } catch (const std::domain_error&) {
    report.median_slope = std::nan("");
  }
  return report;
}

// Breakdown of stop causes over sites whose disruption stops at the same
// node on all 20 test cases (root-reaching sites excluded).
struct StopBreakdown {
  std::uint64_t uniform_stop_sites = 0;
  std::map<StopCause, std::uint64_t> record_counts;  // 20 records per site

  double fraction(StopCause c) const {
    std::uint64_t total = 0;
    for (const auto& [cause, count] : record_counts) total += count;
    if (total == 0) return 0.0;
    auto it = record_counts.find(c);
    return it == record_counts.end()
               ? 0.0
               : static_cast<double>(it->second) / static_cast<double>(total);
  }
};

inline StopBreakdown classify_stop_statistics(
    const std::vector<FdpRecord>& records) {
  StopBreakdown out;
  // Records are site-major with kTestCases entries per site.
  for (std::size_t i = 0; i + kTestCases <= records.size();
       i += kTestCases) {
    bool uniform = true;
    for (int j = 0; j < kTestCases; ++j) {
      const FdpRecord& rec = records[i + static_cast<std::size_t>(j)];
      if (rec.reached_root || rec.stop_node != records[i].stop_node) {
        uniform = false;
        break;
      }
    }
    if (!uniform) continue;
    ++out.uniform_stop_sites;
    for (int j = 0; j < kTestCases; ++j)
      out.record_counts[records[i + static_cast<std::size_t>(j)].stop_cause]++;
  }
  return out;
}

}  // namespace fibgp
