#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "fibgp/tree.hpp"

namespace fibgp {

inline constexpr int kTestCases = 20;

// First 20 Fibonacci numbers, indices 0..19.
inline constexpr std::array<std::int32_t, kTestCases> kFibTargets = {
    1,   1,   2,    3,    5,    8,    13,   21,   34,   55,
    89, 144, 233,  377,  610,  987, 1597, 2584, 4181, 6765};

inline std::int32_t fib_target(int j) {
  if (j < 0 || j >= kTestCases)
    throw std::domain_error("fib_target index out of range");
  return kFibTargets[static_cast<std::size_t>(j)];
}

// All arithmetic is two's-complement, truncated to 32 bits.
inline std::int32_t wrap_add(std::int32_t a, std::int32_t b) {
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(a) +
                                   static_cast<std::uint32_t>(b));
}
inline std::int32_t wrap_sub(std::int32_t a, std::int32_t b) {
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(a) -
                                   static_cast<std::uint32_t>(b));
}
inline std::int32_t wrap_mul(std::int32_t a, std::int32_t b) {
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(a) *
                                   static_cast<std::uint32_t>(b));
}

// An operation overflows when the wide-integer result differs from the
// truncated one.
inline bool overflows(Opcode op, std::int32_t a, std::int32_t b) {
  switch (op) {
    case Opcode::Add:
      return static_cast<std::int64_t>(a) + b != wrap_add(a, b);
    case Opcode::Sub:
      return static_cast<std::int64_t>(a) - b != wrap_sub(a, b);
    case Opcode::Mul:
      return static_cast<std::int64_t>(a) * b != wrap_mul(a, b);
    default:
      return false;
  }
}

// Root outputs of the tree itself on already-run test cases, read by SRF.
// Test cases always run in order starting at J=0, so when evaluating case j
// entries 0..j-1 are present.
struct MemoTable {
  std::array<std::int32_t, kTestCases> answers{};

  // SRF validity: index refers to a strictly earlier case.  Raw 32-bit
  // compare, no reduction of the index.
  std::int32_t lookup(std::int32_t index, std::int32_t fallback, int j) const {
    return (index >= 0 && index < j) ? answers[static_cast<std::size_t>(index)]
                                     : fallback;
  }
};

inline std::int32_t eval_node(Opcode op, std::int32_t a, std::int32_t b, int j,
                              const MemoTable& memo) {
  switch (op) {
    case Opcode::Add: return wrap_add(a, b);
    case Opcode::Sub: return wrap_sub(a, b);
    case Opcode::Mul: return wrap_mul(a, b);
    case Opcode::Srf: return memo.lookup(a, b, j);
    case Opcode::J: return j;
    case Opcode::C0: return 0;
    case Opcode::C1: return 1;
    case Opcode::C2: return 2;
    case Opcode::C3: return 3;
  }
  return 0;
}

// Every node's value on every test case from one baseline run, plus the
// memo of root outputs.  Backbone of incremental evaluation and of the
// perturbation harness.
struct EvalTrace {
  std::size_t tree_size = 0;
  MemoTable memo;
  std::vector<std::int32_t> values;  // case-major, kTestCases * tree_size
  std::uint64_t opcount = 0;

  std::int32_t value(int j, NodeIndex node) const {
    return values[static_cast<std::size_t>(j) * tree_size + node];
  }
};

struct Fitness {
  std::uint64_t total_abs_error = 0;
  auto operator<=>(const Fitness&) const = default;
};

inline std::uint64_t saturating_add_u64(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  return a > max - b ? max : a + b;
}

// Evaluates one test case; all nodes are always evaluated (no short
// circuiting, even multiply by zero).  Backward scan over the prefix array:
// the stack top is always the left argument.  `values` (when non-null)
// receives every node's value, laid out by NodeIndex.
inline std::int32_t eval_case(const Tree& t, int j, const MemoTable& memo,
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
    stack.push_back(v);
    if (values) values[i] = v;
  }
  return stack.back();
}

inline std::int32_t eval_tree(const Tree& t, int j, const MemoTable& memo,
                              std::uint64_t& opcount) {
  std::vector<std::int32_t> stack;
  opcount += t.size();
  return eval_case(t, j, memo, nullptr, stack);
}

struct EvalResult {
  Fitness fitness;
  EvalTrace trace;  // values empty unless a trace was requested
};

// Full fitness: cases 0..19 in order, each root output stored into the memo
// before the next case runs (self-referential recursion), absolute error
// accumulated in saturating 64-bit.
inline EvalResult fitness(const Tree& t, bool record_trace = false) {
  EvalResult r;
  r.trace.tree_size = t.size();
  if (record_trace)
    r.trace.values.resize(static_cast<std::size_t>(kTestCases) * t.size());
  std::vector<std::int32_t> stack;
  stack.reserve(64);
  for (int j = 0; j < kTestCases; ++j) {
    std::int32_t* row =
        record_trace ? r.trace.values.data() +
                           static_cast<std::size_t>(j) * t.size()
                     : nullptr;
    const std::int32_t out = eval_case(t, j, r.trace.memo, row, stack);
    r.trace.memo.answers[static_cast<std::size_t>(j)] = out;
    r.trace.opcount += t.size();
    const std::int64_t err =
        static_cast<std::int64_t>(out) - static_cast<std::int64_t>(fib_target(j));
    r.fitness.total_abs_error = saturating_add_u64(
        r.fitness.total_abs_error,
        static_cast<std::uint64_t>(err < 0 ? -err : err));
  }
  return r;
}

}  // namespace fibgp
