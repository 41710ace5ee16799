#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fibgp/report.hpp"
#include "fibgp/variation.hpp"

using namespace fibgp;

TEST_CASE("lattice layout basics") {
  SUBCASE("single node at the origin") {
    const Tree t = parse_sexpr("J");
    const auto points = lattice_layout(t, {20});
    REQUIRE(points.size() == 1);
    CHECK(points[0].x == 0.0);
    CHECK(points[0].y == 0.0);
    CHECK(points[0].ring == 0);
    CHECK(points[0].disrupted_cases == 20);
  }
  SUBCASE("three nodes: children at span midpoints on ring 1") {
    const Tree t = parse_sexpr("(SRF 1 0)");
    const auto points = lattice_layout(t, {20, 0, 0});
    REQUIRE(points.size() == 3);
    const double pi = 3.14159265358979323846;
    // left child owns [0, pi), right [pi, 2pi)
    CHECK(points[1].x == doctest::Approx(std::cos(pi / 2)));
    CHECK(points[1].y == doctest::Approx(std::sin(pi / 2)));
    CHECK(points[2].x == doctest::Approx(std::cos(3 * pi / 2)));
    CHECK(points[2].y == doctest::Approx(std::sin(3 * pi / 2)));
    CHECK(points[0].glyph == '=');
  }
}

TEST_CASE("lattice layout properties on random trees") {
  RandomStream rng(8);
  for (int i = 0; i < 20; ++i) {
    const Tree t = random_tree(GrowMethod::Grow, 6, rng);
    const auto points = lattice_layout(t, std::vector<int>(t.size(), 0));
    const NodeLinks links = build_links(t);
    // injectivity at modest depth: no two nodes share (ring, angle)
    std::set<std::pair<int, long long>> seen;
    for (const auto& p : points) {
      if (p.ring > 16) continue;
      const double angle = std::atan2(p.y, p.x);
      const auto key = std::make_pair(
          p.ring, static_cast<long long>(std::llround(angle * 1e12)));
      CHECK(seen.insert(key).second);
    }
    // angular nesting: child angle strictly inside the parent's span is
    // implied by rings increasing along every edge
    for (NodeIndex n = 1; n < t.size(); ++n)
      CHECK(points[n].ring == points[links.parent[n]].ring + 1);
  }
}

TEST_CASE("summary row percentages recompute from raw records") {
  const Tree t = parse_sexpr("(ADD (SRF (SUB J 1) 1) (SRF (SUB J 2) 0))");
  const FdpReport plus1 = run_fdp(t, PerturbKind::plus_one());
  const FdpReport randint = run_fdp(t, PerturbKind::rand_int(5));
  const SummaryRow row = make_summary(t, plus1, randint);
  CHECK(row.size == 11);
  CHECK(row.depth == 3);
  CHECK(row.fitness == 0);

  std::set<NodeIndex> disruptive;
  for (const FdpRecord& rec : plus1.records)
    if (rec.reached_root) disruptive.insert(rec.site);
  CHECK(row.plus1_pct ==
        doctest::Approx(100.0 * static_cast<double>(disruptive.size()) / 11.0));
  CHECK(row.plus1_pct >= 0.0);
  CHECK(row.plus1_pct <= 100.0);
}

TEST_CASE("summary expected-depth columns") {
  // a size-4347 tree expects depth 165 (36)
  const DepthStats ds = expected_random_tree_depth(4347);
  CHECK(std::llround(ds.mean_depth) == 165);
  CHECK(std::llround(ds.std_depth) == 36);
  // single-terminal trees have no expected-depth columns
  const Tree t = parse_sexpr("J");
  const FdpReport report = run_fdp(t, PerturbKind::plus_one());
  const SummaryRow row = make_summary(t, report, report);
  CHECK(row.expected_depth == 0.0);
  CHECK(row.plus1_pct == 100.0);
}

TEST_CASE("csv and svg emission") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "fibgp_report_test";
  fs::create_directories(dir);

  const Tree t = parse_sexpr("(MUL 0 J)");
  const FdpReport report = run_fdp(t, PerturbKind::plus_one());
  write_fdp_hist_csv((dir / "fdp_hist_plus1.csv").string(), report);
  write_fdp_depth_csv((dir / "fdp_depth_plus1.csv").string(), report);
  const auto points = lattice_layout(t, report.lattice_counts);
  write_fdp_lattice_csv((dir / "fdp_lattice_plus1.csv").string(), points);
  write_lattice_svg((dir / "lattice.svg").string(), points);
  write_summary_csv((dir / "summary.csv").string(),
                    {make_summary(t, report, report)});
  emit_plot_scripts(dir.string(), {"plus1"});

  // format contract: hist file columns are case,distance,count
  std::ifstream hist(dir / "fdp_hist_plus1.csv");
  std::string header;
  std::getline(hist, header);
  CHECK(header == "case,distance,count");
  std::string line;
  int rows = 0;
  while (std::getline(hist, line)) ++rows;
  CHECK(rows > 0);

  std::ifstream svg(dir / "lattice.svg");
  std::stringstream buf;
  buf << svg.rdbuf();
  CHECK(buf.str().find("<svg") != std::string::npos);
  CHECK(buf.str().find("</svg>") != std::string::npos);

  // empty stats stream: header-only file
  write_stats_csv((dir / "stats.csv").string(), {});
  std::ifstream stats(dir / "stats.csv");
  std::getline(stats, header);
  CHECK(header ==
        "gen,mean_size,mean_fitness,best_fitness,frac_diff,opcodes_full,"
        "opcodes_eval,gpops");
  CHECK_FALSE(std::getline(stats, line));

  fs::remove_all(dir);
}
