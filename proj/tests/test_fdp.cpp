#include <doctest.h>

#include <cmath>

#include "fibgp/fdp.hpp"
#include "fibgp/refcheck.hpp"
#include "fibgp/variation.hpp"

using namespace fibgp;

TEST_CASE("root site is always disrupted by +1") {
  const Tree t = parse_sexpr("(ADD (SRF (SUB J 1) 1) (SRF (SUB J 2) 0))");
  const EvalResult base = fitness(t, true);
  for (int j = 0; j < kTestCases; ++j) {
    const FdpRecord rec =
        perturb_propagate(t, base.trace, 0, j, PerturbKind::plus_one());
    CHECK(rec.reached_root);
    CHECK(rec.distance == 0);
    CHECK(rec.stop_cause == StopCause::Root);
  }
}

TEST_CASE("multiply by zero stops disruption") {
  const Tree t = parse_sexpr("(MUL 0 J)");
  const EvalResult base = fitness(t, true);
  // Perturbing the J child: the co-argument is 0, output stays 0.
  for (int j = 0; j < kTestCases; ++j) {
    const FdpRecord rec =
        perturb_propagate(t, base.trace, 2, j, PerturbKind::plus_one());
    CHECK_FALSE(rec.reached_root);
    CHECK(rec.distance == 0);
    CHECK(rec.stop_cause == StopCause::MulZero);
  }
  // Perturbing the constant 0 changes the product whenever J != 0.
  const FdpReport report = run_fdp(t, PerturbKind::plus_one());
  CHECK(report.injections == 60);
  CHECK(report.lattice_counts[0] == 20);
  CHECK(report.lattice_counts[1] == 19);  // j=0 keeps the product at 0
  CHECK(report.lattice_counts[2] == 0);
  CHECK(report.disrupted_any_case_fraction == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("SRF default stops a still-invalid index disruption") {
  // (SRF 3 J): index 3 never refers to an earlier case for j <= 3; +1 on
  // the index (3 -> 4) leaves it invalid there.
  const Tree t = parse_sexpr("(SRF 3 J)");
  const EvalResult base = fitness(t, true);
  for (int j = 0; j <= 3; ++j) {
    const FdpRecord rec =
        perturb_propagate(t, base.trace, 1, j, PerturbKind::plus_one());
    CHECK_FALSE(rec.reached_root);
    CHECK(rec.stop_cause == StopCause::SrfDefault);
  }
}

TEST_CASE("+1 on the default argument of (SRF 1 0) at case 0 reaches root") {
  const Tree t = parse_sexpr("(SRF 1 0)");
  const EvalResult base = fitness(t, true);
  const FdpRecord rec =
      perturb_propagate(t, base.trace, 2, 0, PerturbKind::plus_one());
  CHECK(rec.reached_root);
  CHECK(rec.root_value == 1);
  CHECK(rec.distance == 1);
}

TEST_CASE("single node tree") {
  const Tree t = parse_sexpr("J");
  const FdpReport report = run_fdp(t, PerturbKind::plus_one());
  CHECK(report.injections == 20);
  CHECK(report.disrupted_any_case_fraction == 1.0);
  CHECK(report.lattice_counts[0] == 20);
  CHECK(std::isnan(report.median_slope));
}

TEST_CASE("injection count is 20 x size") {
  RandomStream rng(4);
  for (int i = 0; i < 10; ++i) {
    const Tree t = random_tree(GrowMethod::Grow, 5, rng);
    const FdpReport report = run_fdp(t, PerturbKind::plus_one());
    CHECK(report.injections == 20 * t.size());
    CHECK(report.records.size() == report.injections);
  }
}

TEST_CASE("brute-force equivalence on small random trees") {
  RandomStream rng(88);
  refcheck::CheckResult res;
  int checked = 0;
  while (checked < 40) {
    const Tree t =
        random_tree(checked % 2 ? GrowMethod::Grow : GrowMethod::Full,
                    2 + checked % 4, rng);
    if (t.size() > 63) continue;
    refcheck::check_fdp_against_bruteforce(
        t, 500 + static_cast<std::uint64_t>(checked), res);
    ++checked;
  }
  for (const auto& f : res.failures) MESSAGE(f);
  CHECK(res.ok());
}

TEST_CASE("record invariants") {
  RandomStream rng(19);
  for (int i = 0; i < 20; ++i) {
    const Tree t = random_tree(GrowMethod::Grow, 6, rng);
    const NodeLinks links = build_links(t);
    const FdpReport report = run_fdp(t, PerturbKind::rand_int(7));
    for (const FdpRecord& rec : report.records) {
      CHECK(rec.distance <= rec.site_depth);
      CHECK(rec.reached_root == (rec.stop_cause == StopCause::Root));
      if (rec.reached_root) CHECK(rec.distance == rec.site_depth);
      // monotone extinction: the stop node is on the ancestor path at
      // exactly `distance` steps above the site (or the site itself).
      if (!rec.reached_root && rec.stop_node != rec.site) {
        NodeIndex cur = rec.site;
        for (int d = 0; d <= rec.distance; ++d) cur = links.parent[cur];
        CHECK(cur == rec.stop_node);
      }
    }
  }
}

TEST_CASE("RandInt reproducibility and seed sensitivity") {
  RandomStream rng(3);
  const Tree t = random_tree(GrowMethod::Full, 4, rng);
  const FdpReport a = run_fdp(t, PerturbKind::rand_int(42));
  FdpOptions four_jobs;
  four_jobs.jobs = 4;
  const FdpReport b = run_fdp(t, PerturbKind::rand_int(42), four_jobs);
  CHECK(a.lattice_counts == b.lattice_counts);
  CHECK(a.disrupted_any_case_fraction == b.disrupted_any_case_fraction);
  CHECK(a.per_case_distance_histogram == b.per_case_distance_histogram);
  const FdpReport c = run_fdp(t, PerturbKind::rand_int(43));
  // different seed, same shape
  CHECK(c.injections == a.injections);
}

TEST_CASE("decay slope fitting") {
  std::array<DistanceHistogram, kTestCases> hist;
  SUBCASE("synthetic exponential decay") {
    for (int j = 0; j < kTestCases; ++j)
      for (int d = 0; d <= 10; ++d)
        hist[static_cast<std::size_t>(j)][d] = static_cast<std::uint64_t>(
            std::llround(1000.0 * std::exp(-d / 3.0)));
    const SlopeFit fit = fit_decay_slope(hist);
    CHECK(fit.median == doctest::Approx(-1.0 / 3.0).epsilon(0.03));
    for (const auto& s : fit.per_case) {
      REQUIRE(s.has_value());
      CHECK(*s == doctest::Approx(-1.0 / 3.0).epsilon(0.03));
    }
  }
  SUBCASE("flat counts give slope 0") {
    for (int j = 0; j < kTestCases; ++j)
      for (int d = 0; d < 6; ++d) hist[static_cast<std::size_t>(j)][d] = 50;
    CHECK(fit_decay_slope(hist).median == doctest::Approx(0.0));
  }
  SUBCASE("degenerate cases are excluded; all-degenerate is an error") {
    for (int j = 0; j < kTestCases; ++j) hist[static_cast<std::size_t>(j)][0] = 9;
    CHECK_THROWS_AS(fit_decay_slope(hist), std::domain_error);
    hist[0][1] = 3;
    hist[0][2] = 1;
    const SlopeFit fit = fit_decay_slope(hist);
    CHECK(fit.per_case[0].has_value());
    CHECK_FALSE(fit.per_case[1].has_value());
  }
}

TEST_CASE("stop-cause classification") {
  SUBCASE("no SRF, no zero operands") {
    const Tree t = parse_sexpr("(ADD (SUB J 1) 2)");
    const FdpReport report = run_fdp(t, PerturbKind::plus_one());
    for (const FdpRecord& rec : report.records)
      CHECK((rec.stop_cause == StopCause::Root ||
             rec.stop_cause == StopCause::ValueCoincidence));
  }
  SUBCASE("(MUL 0 J) uniform-stop site is MUL_ZERO") {
    const Tree t = parse_sexpr("(MUL 0 J)");
    const FdpReport report = run_fdp(t, PerturbKind::plus_one());
    const StopBreakdown breakdown = classify_stop_statistics(report.records);
    CHECK(breakdown.uniform_stop_sites == 1);
    CHECK(breakdown.fraction(StopCause::MulZero) == 1.0);
  }
}

TEST_CASE("perturb_propagate usage errors") {
  const Tree t = parse_sexpr("(ADD J J)");
  const Tree other = parse_sexpr("(MUL 2 3)");
  const EvalResult base = fitness(other, true);
  CHECK_THROWS_AS(
      perturb_propagate(parse_sexpr("(ADD J (ADD J J))"), base.trace, 0, 0,
                        PerturbKind::plus_one()),
      std::invalid_argument);
  const EvalResult ok = fitness(t, true);
  CHECK_THROWS_AS(
      perturb_propagate(t, ok.trace, 5, 0, PerturbKind::plus_one()),
      std::invalid_argument);
  CHECK_THROWS_AS(
      perturb_propagate(t, ok.trace, 0, 20, PerturbKind::plus_one()),
      std::invalid_argument);
}

TEST_CASE("sequential memo mode agrees on reached_root for SRF-free trees") {
  // Without SRF the memo is never read, so both readings coincide.
  RandomStream rng(12);
  for (int i = 0; i < 10; ++i) {
    Tree t = random_tree(GrowMethod::Full, 3, rng);
    bool has_srf = false;
    for (Opcode op : t.ops)
      if (op == Opcode::Srf) has_srf = true;
    if (has_srf) continue;
    FdpOptions seq;
    seq.memo_mode = MemoMode::Sequential;
    const FdpReport a = run_fdp(t, PerturbKind::plus_one());
    const FdpReport b = run_fdp(t, PerturbKind::plus_one(), seq);
    CHECK(a.lattice_counts == b.lattice_counts);
  }
}
