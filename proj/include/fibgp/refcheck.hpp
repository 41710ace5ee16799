#pragma once

// Independent reference implementation used by `selftest` and the test
// oracles: a naive pointer-tree recursive evaluator, deliberately sharing no
// code path with the array interpreter, plus brute-force whole-tree
// perturbed re-evaluation.  Only suitable for small trees (recursive).

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "fibgp/eval.hpp"
#include "fibgp/fdp.hpp"
#include "fibgp/incremental.hpp"
#include "fibgp/variation.hpp"

namespace fibgp::refcheck {

struct RefNode {
  Opcode op;
  std::unique_ptr<RefNode> left, right;
};

inline std::unique_ptr<RefNode> build_ref(const Tree& t, std::size_t& pos) {
  auto node = std::make_unique<RefNode>();
  node->op = t.ops[pos++];
  if (is_function(node->op)) {
    node->left = build_ref(t, pos);
    node->right = build_ref(t, pos);
  }
  return node;
}

inline std::unique_ptr<RefNode> build_ref(const Tree& t) {
  std::size_t pos = 0;
  auto root = build_ref(t, pos);
  return pos == t.size() ? std::move(root) : nullptr;
}

// Recursive evaluation; when perturb_site >= 0 the node with that pre-order
// index has its output v replaced by perturb(v).  Both arguments are always
// evaluated.
template <typename Perturb>
inline std::int64_t ref_eval(const RefNode& node, int j,
                             const std::vector<std::int64_t>& memo,
                             std::ptrdiff_t& preorder,
                             std::ptrdiff_t perturb_site, Perturb&& perturb) {
  const std::ptrdiff_t my_index = preorder++;
  std::int64_t a = 0, b = 0;
  if (node.left)
    a = ref_eval(*node.left, j, memo, preorder, perturb_site, perturb);
  if (node.right)
    b = ref_eval(*node.right, j, memo, preorder, perturb_site, perturb);
  // Independent 32-bit truncation: reduce the wide result into
  // [-2^31, 2^31) by hand.
  auto trunc32 = [](std::int64_t w) {
    w = ((w % 4294967296LL) + 4294967296LL) % 4294967296LL;
    if (w >= 2147483648LL) w -= 4294967296LL;
    return w;
  };
  std::int64_t v = 0;
  switch (node.op) {
    case Opcode::Add: v = trunc32(a + b); break;
    case Opcode::Sub: v = trunc32(a - b); break;
    case Opcode::Mul: v = trunc32(a * b); break;
    case Opcode::Srf:
      v = (a >= 0 && a < static_cast<std::int64_t>(j))
              ? memo[static_cast<std::size_t>(a)]
              : b;
      break;
    case Opcode::J: v = j; break;
    case Opcode::C0: v = 0; break;
    case Opcode::C1: v = 1; break;
    case Opcode::C2: v = 2; break;
    case Opcode::C3: v = 3; break;
  }
  if (my_index == perturb_site) v = trunc32(perturb(v));
  return v;
}

inline std::int64_t ref_eval_case(const RefNode& root, int j,
                                  const std::vector<std::int64_t>& memo) {
  std::ptrdiff_t preorder = 0;
  return ref_eval(root, j, memo, preorder, -1,
                  [](std::int64_t v) { return v; });
}

// Fitness of a tree computed entirely through the reference path.
inline std::uint64_t ref_fitness(const Tree& t,
                                 std::vector<std::int64_t>* memo_out = nullptr) {
  auto root = build_ref(t);
  std::vector<std::int64_t> memo;
  std::uint64_t total = 0;
  for (int j = 0; j < kTestCases; ++j) {
    const std::int64_t out = ref_eval_case(*root, j, memo);
    memo.push_back(out);
    const std::int64_t err = out - fib_target(j);
    total = saturating_add_u64(total,
                               static_cast<std::uint64_t>(err < 0 ? -err : err));
  }
  if (memo_out) *memo_out = memo;
  return total;
}

// Whole-tree perturbed re-evaluation for one (site, case) against the
// unperturbed memo.  Returns the perturbed root output.
inline std::int64_t ref_perturbed_root(const RefNode& root, int j,
                                       const std::vector<std::int64_t>& memo,
                                       std::size_t site,
                                       const PerturbKind& kind) {
  std::ptrdiff_t preorder = 0;
  return ref_eval(root, j, memo, preorder,
                  static_cast<std::ptrdiff_t>(site), [&](std::int64_t v) {
                    return static_cast<std::int64_t>(kind.disrupted_value(
                        static_cast<std::int32_t>(v), site, j));
                  });
}

struct CheckResult {
  std::vector<std::string> failures;
  int checks_run = 0;

  bool ok() const { return failures.empty(); }
  void expect(bool cond, const std::string& what) {
    ++checks_run;
    if (!cond) failures.push_back(what);
  }
};

// Exhaustive brute-force agreement for one tree: every site x case x kind,
// comparing reached_root and the perturbed root value.
inline void check_fdp_against_bruteforce(const Tree& t, std::uint64_t seed,
                                         CheckResult& res) {
  auto root = build_ref(t);
  std::vector<std::int64_t> memo;
  ref_fitness(t, &memo);
  const PerturbKind kinds[2] = {PerturbKind::plus_one(),
                                PerturbKind::rand_int(seed)};
  for (const PerturbKind& kind : kinds) {
    FdpReport report = run_fdp(t, kind);
    for (const FdpRecord& rec : report.records) {
      const std::int64_t oracle_root = ref_perturbed_root(
          *root, rec.test_case, memo, rec.site, kind);
      const bool oracle_reached =
          oracle_root !=
          memo[static_cast<std::size_t>(rec.test_case)];
      res.expect(rec.reached_root == oracle_reached &&
                     rec.root_value == static_cast<std::int32_t>(oracle_root),
                 "fdp/bruteforce mismatch at site " +
                     std::to_string(rec.site) + " case " +
                     std::to_string(rec.test_case) + " tree " +
                     print_sexpr(t));
      if (!res.failures.empty()) return;
    }
  }
}

// The embedded oracle suite behind `selftest`.
inline CheckResult run_selftest() {
  CheckResult res;

  // Fibonacci targets from a pair-sum recurrence.
  {
    std::int64_t a = 1, b = 1;
    for (int j = 0; j < kTestCases; ++j) {
      res.expect(fib_target(j) == a, "fib_target(" + std::to_string(j) + ")");
      const std::int64_t next = a + b;
      a = b;
      b = next;
    }
  }

  // Reference Fibonacci solution: fitness 0 and all 20 outputs exact, via
  // the naive evaluator and the array interpreter.
  {
    const Tree sol =
        parse_sexpr("(ADD (SRF (SUB J 1) 1) (SRF (SUB J 2) 0))");
    res.expect(ref_fitness(sol) == 0, "reference solution fitness (naive)");
    const EvalResult r = fitness(sol, true);
    res.expect(r.fitness.total_abs_error == 0,
               "reference solution fitness (interpreter)");
    for (int j = 0; j < kTestCases; ++j)
      res.expect(r.trace.memo.answers[static_cast<std::size_t>(j)] ==
                     fib_target(j),
                 "reference solution output case " + std::to_string(j));
  }

  // SRF contract example.
  {
    const Tree t = parse_sexpr("(SRF 1 0)");
    const EvalResult r = fitness(t, true);
    res.expect(r.trace.memo.answers[0] == 0 && r.trace.memo.answers[1] == 0,
               "(SRF 1 0) on cases 0 and 1");
    for (int j = 2; j < kTestCases; ++j)
      res.expect(r.trace.memo.answers[static_cast<std::size_t>(j)] ==
                     r.trace.memo.answers[1],
                 "(SRF 1 0) on case " + std::to_string(j));
  }

  // FDP small-tree exhaustive brute force.
  {
    RandomStream rng(20220709);
    for (int i = 0; i < 20 && res.ok(); ++i) {
      Tree t = random_tree(i % 2 ? GrowMethod::Grow : GrowMethod::Full,
                           2 + i % 4, rng);
      if (t.size() > 63) continue;
      check_fdp_against_bruteforce(t, 1000 + static_cast<std::uint64_t>(i),
                                   res);
    }
  }

  // Slope regression on synthetic exponential-decay data.
  {
    std::array<DistanceHistogram, kTestCases> hist;
    for (int j = 0; j < kTestCases; ++j)
      for (int d = 0; d <= 10; ++d)
        hist[static_cast<std::size_t>(j)][d] = static_cast<std::uint64_t>(
            std::llround(1000.0 * std::exp(-d / 3.0)));
    const SlopeFit fit = fit_decay_slope(hist);
    res.expect(std::fabs(fit.median + 1.0 / 3.0) < 0.01,
               "synthetic decay slope");
  }

  // Incremental evaluation equals full evaluation on random children.
  {
    RandomStream rng(7);
    std::vector<Tree> pop = ramped_half_and_half(50, rng);
    for (int i = 0; i < 100 && res.ok(); ++i) {
      const Tree& mum = pop[rng.below(pop.size())];
      const Tree& dad = pop[rng.below(pop.size())];
      CrossoverResult cx = crossover(mum, dad, rng);
      const auto [mf, ml] = subtree_span(mum, cx.mum_point);
      const auto [df, dl] = subtree_span(dad, cx.dad_point);
      EvalResult parent = fitness(mum, true);
      std::uint64_t ops = 0;
      const Fitness inc = incremental_fitness(
          cx.child, parent.trace,
          SpliceInfo{cx.mum_point, ml - mf + 1, dl - df + 1}, ops);
      res.expect(inc == fitness(cx.child).fitness,
                 "incremental/full mismatch, trial " + std::to_string(i));
    }
  }

  return res;
}

}  // namespace fibgp::refcheck
