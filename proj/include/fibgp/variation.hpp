#pragma once

#include <tuple>

#include "fibgp/rng.hpp"
#include "fibgp/tree.hpp"

namespace fibgp {

enum class GrowMethod { Grow, Full };

namespace detail {

inline void random_subtree(GrowMethod method, int depth_left,
                           RandomStream& rng, std::vector<Opcode>& out) {
  Opcode op;
  if (depth_left == 0) {
    op = static_cast<Opcode>(kFunctionCount + rng.below(kTerminalCount));
  } else if (method == GrowMethod::Full) {
    op = static_cast<Opcode>(rng.below(kFunctionCount));
  } else {
    // grow: uniform over all 9 primitives above the depth limit
    op = static_cast<Opcode>(rng.below(kOpcodeCount));
  }
  out.push_back(op);
  for (int i = 0; i < arity(op); ++i)
    random_subtree(method, depth_left - 1, rng, out);
}

}  // namespace detail

inline Tree random_tree(GrowMethod method, int max_depth, RandomStream& rng) {
  Tree t;
  detail::random_subtree(method, max_depth, rng, t.ops);
  return t;
}

// Koza's ramped half and half: depths cycle through [min_depth, max_depth],
// alternating grow/full within each depth bucket.  No duplicate filtering.
inline std::vector<Tree> ramped_half_and_half(std::size_t n, RandomStream& rng,
                                              int min_depth = 2,
                                              int max_depth = 6) {
  std::vector<Tree> pop;
  pop.reserve(n);
  const int span = max_depth - min_depth + 1;
  for (std::size_t i = 0; i < n; ++i) {
    const int d = min_depth + static_cast<int>((i / 2) % span);
    const GrowMethod m = i % 2 == 0 ? GrowMethod::Grow : GrowMethod::Full;
    pop.push_back(random_tree(m, d, rng));
  }
  return pop;
}

struct CrossoverResult {
  Tree child;
  NodeIndex mum_point;
  NodeIndex dad_point;
};

// Unbiased subtree crossover: both points uniform over all nodes (root and
// terminals included).  Mum donates the root; no size or depth limit.
inline CrossoverResult crossover(const Tree& mum, const Tree& dad,
                                 RandomStream& rng) {
  const NodeIndex mum_point = rng.below(mum.size());
  const NodeIndex dad_point = rng.below(dad.size());
  const auto [m_first, m_last] = subtree_span(mum, mum_point);
  const auto [d_first, d_last] = subtree_span(dad, dad_point);
  Tree child;
  child.ops.reserve(mum.size() - (m_last - m_first + 1) +
                    (d_last - d_first + 1));
  child.ops.insert(child.ops.end(), mum.ops.begin(),
                   mum.ops.begin() + static_cast<std::ptrdiff_t>(m_first));
  child.ops.insert(child.ops.end(),
                   dad.ops.begin() + static_cast<std::ptrdiff_t>(d_first),
                   dad.ops.begin() + static_cast<std::ptrdiff_t>(d_last) + 1);
  child.ops.insert(child.ops.end(),
                   mum.ops.begin() + static_cast<std::ptrdiff_t>(m_last) + 1,
                   mum.ops.end());
  return {std::move(child), mum_point, dad_point};
}

}  // namespace fibgp
