#include <doctest.h>

#include <limits>

#include "fibgp/eval.hpp"
#include "fibgp/refcheck.hpp"
#include "fibgp/variation.hpp"

using namespace fibgp;

namespace {
const char* kSolution = "(ADD (SRF (SUB J 1) 1) (SRF (SUB J 2) 0))";
}

TEST_CASE("fib targets") {
  CHECK(fib_target(0) == 1);
  CHECK(fib_target(5) == 8);
  CHECK(fib_target(19) == 6765);
  CHECK_THROWS_AS(fib_target(20), std::domain_error);
  CHECK_THROWS_AS(fib_target(-1), std::domain_error);
}

TEST_CASE("eval_node semantics") {
  MemoTable memo;
  memo.answers[1] = 42;
  // SRF(1,0): default on the first two cases, memo answer afterwards.
  CHECK(eval_node(Opcode::Srf, 1, 0, 0, memo) == 0);
  CHECK(eval_node(Opcode::Srf, 1, 0, 1, memo) == 0);
  CHECK(eval_node(Opcode::Srf, 1, 0, 5, memo) == 42);
  CHECK(eval_node(Opcode::Srf, -1, 7, 5, memo) == 7);
  CHECK(eval_node(Opcode::Srf, 5, 7, 5, memo) == 7);

  CHECK(eval_node(Opcode::Add, std::numeric_limits<std::int32_t>::max(), 1, 0,
                  memo) == std::numeric_limits<std::int32_t>::min());
  CHECK(eval_node(Opcode::Mul, 0, -123456789, 0, memo) == 0);
  CHECK(eval_node(Opcode::J, 0, 0, 7, memo) == 7);
  CHECK(eval_node(Opcode::C3, 0, 0, 0, memo) == 3);
}

TEST_CASE("wrapping matches a wide-integer oracle") {
  RandomStream rng(1);
  for (int i = 0; i < 20000; ++i) {
    const std::int32_t a = rng.next_i32();
    const std::int32_t b = rng.next_i32();
    auto reduce = [](std::int64_t w) {
      w = ((w % 4294967296LL) + 4294967296LL) % 4294967296LL;
      if (w >= 2147483648LL) w -= 4294967296LL;
      return w;
    };
    CHECK(wrap_add(a, b) == reduce(static_cast<std::int64_t>(a) + b));
    CHECK(wrap_sub(a, b) == reduce(static_cast<std::int64_t>(a) - b));
    CHECK(wrap_mul(a, b) == reduce(static_cast<std::int64_t>(a) * b));
    CHECK(overflows(Opcode::Add, a, b) ==
          (static_cast<std::int64_t>(a) + b != wrap_add(a, b)));
  }
}

TEST_CASE("reference solution reproduces the whole sequence") {
  const Tree sol = parse_sexpr(kSolution);
  const EvalResult r = fitness(sol, true);
  CHECK(r.fitness.total_abs_error == 0);
  for (int j = 0; j < kTestCases; ++j)
    CHECK(r.trace.memo.answers[static_cast<std::size_t>(j)] == fib_target(j));
}

TEST_CASE("eval_tree on trivial trees") {
  MemoTable memo;
  std::uint64_t ops = 0;
  CHECK(eval_tree(parse_sexpr("J"), 7, memo, ops) == 7);
  CHECK(ops == 1);
  // First case of the reference solution with empty memo: SRF(-1,1)=1,
  // SRF(-2,0)=0, sum 1.
  CHECK(eval_tree(parse_sexpr(kSolution), 0, memo, ops) == 1);
  CHECK(ops == 12);
}

TEST_CASE("fitness of simple trees against the naive evaluator") {
  // Expected values computed by the independent recursive oracle.
  const Tree c1 = parse_sexpr("1");
  const std::uint64_t c1_oracle = refcheck::ref_fitness(c1);
  // Sum of the 20 targets is 17710, so constant 1 scores 17710 - 20.
  CHECK(c1_oracle == 17690);
  CHECK(fitness(c1).fitness.total_abs_error == c1_oracle);

  const Tree j = parse_sexpr("J");
  CHECK(fitness(j).fitness.total_abs_error == refcheck::ref_fitness(j));

  RandomStream rng(17);
  for (int i = 0; i < 200; ++i) {
    const Tree t = random_tree(GrowMethod::Grow, 5, rng);
    CHECK(fitness(t).fitness.total_abs_error == refcheck::ref_fitness(t));
  }
}

TEST_CASE("trace consistency") {
  RandomStream rng(23);
  for (int i = 0; i < 50; ++i) {
    const Tree t = random_tree(GrowMethod::Grow, 5, rng);
    const EvalResult r = fitness(t, true);
    const NodeLinks links = build_links(t);
    for (int j = 0; j < kTestCases; ++j) {
      CHECK(r.trace.value(j, 0) ==
            r.trace.memo.answers[static_cast<std::size_t>(j)]);
      for (NodeIndex n = 0; n < t.size(); ++n) {
        if (!is_function(t.ops[n])) continue;
        CHECK(r.trace.value(j, n) ==
              eval_node(t.ops[n], r.trace.value(j, links.left[n]),
                        r.trace.value(j, links.right[n]), j, r.trace.memo));
      }
    }
  }
}

TEST_CASE("determinism of evaluation") {
  RandomStream rng(31);
  const Tree t = random_tree(GrowMethod::Full, 5, rng);
  const EvalResult a = fitness(t, true);
  const EvalResult b = fitness(t, true);
  CHECK(a.fitness == b.fitness);
  CHECK(a.trace.values == b.trace.values);
}

TEST_CASE("saturating accumulation") {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  CHECK(saturating_add_u64(max, 1) == max);
  CHECK(saturating_add_u64(max - 5, 10) == max);
  CHECK(saturating_add_u64(2, 3) == 5);
}
