#pragma once

#include <stdexcept>

#include "fibgp/eval.hpp"
#include "fibgp/variation.hpp"

namespace fibgp {

// Describes a crossover edit relative to the root-donating parent (mum):
// child = mum[0 .. mum_point) + inserted subtree + mum[mum_point + replaced_len ..).
struct SpliceInfo {
  NodeIndex mum_point;
  std::size_t replaced_len;  // size of the subtree removed from mum
  std::size_t inserted_len;  // size of the subtree donated by dad
};

// Incremental fitness: evaluate only the inserted subtree and the splice
// point's ancestor path against the mum's recorded trace.  Off-path cached
// values stay valid only while the child's root output agrees with the mum's
// on every case so far; at the first differing case the memo diverges and
// SRF anywhere in the tree may read it, so evaluation falls back to full for
// the remaining cases.  Result is bit-identical to fitness(child).
inline Fitness incremental_fitness(const Tree& child,
                                   const EvalTrace& mum_trace,
                                   const SpliceInfo& splice,
                                   std::uint64_t& opcodes_evaluated) {
  const std::size_t mum_size = mum_trace.tree_size;
  if (splice.mum_point + splice.replaced_len > mum_size ||
      child.size() + splice.replaced_len != mum_size + splice.inserted_len ||
      splice.inserted_len == 0 ||
      mum_trace.values.size() !=
          static_cast<std::size_t>(kTestCases) * mum_size)
    throw std::invalid_argument("incremental_fitness: trace/tree mismatch");

  const NodeIndex insert_point = splice.mum_point;
  const std::size_t ins_len = splice.inserted_len;

  // Child index -> mum index for nodes outside the inserted span.
  auto to_mum = [&](NodeIndex child_idx) -> NodeIndex {
    return child_idx < insert_point
               ? child_idx
               : child_idx - ins_len + splice.replaced_len;
  };

  // Ancestor path of the splice point, bottom-up, with the baseline value
  // source for the unchanged sibling.
  struct PathStep {
    Opcode op;
    bool changed_is_left;
    NodeIndex sibling_mum;   // sibling subtree root, mum indexing
    NodeIndex ancestor_mum;  // == ancestor child index (always < insert_point)
  };
  std::vector<PathStep> path;
  {
    NodeLinks links = build_links(child);
    NodeIndex cur = insert_point;
    while (links.parent[cur] != child.size()) {
      const NodeIndex a = links.parent[cur];
      const bool left = links.left[a] == cur;
      const NodeIndex sib = left ? links.right[a] : links.left[a];
      path.push_back({child.ops[a], left, to_mum(sib), a});
      cur = a;
    }
  }

  // Inserted subtree viewed as a tree of its own (same prefix block).
  Tree inserted;
  inserted.ops.assign(
      child.ops.begin() + static_cast<std::ptrdiff_t>(insert_point),
      child.ops.begin() + static_cast<std::ptrdiff_t>(insert_point + ins_len));

  Fitness fit;
  MemoTable memo;  // the child's own memo, filled case by case
  bool diverged = false;
  std::vector<std::int32_t> stack;
  stack.reserve(64);

  for (int j = 0; j < kTestCases; ++j) {
    std::int32_t out;
    if (diverged) {
      out = eval_case(child, j, memo, nullptr, stack);
      opcodes_evaluated += child.size();
    } else {
      std::int32_t v = eval_case(inserted, j, memo, nullptr, stack);
      opcodes_evaluated += ins_len;
      bool settled = false;
      for (const PathStep& step : path) {
        const std::int32_t sib = mum_trace.value(j, step.sibling_mum);
        const std::int32_t a = step.changed_is_left ? v : sib;
        const std::int32_t b = step.changed_is_left ? sib : v;
        v = eval_node(step.op, a, b, j, memo);
        ++opcodes_evaluated;
        if (v == mum_trace.value(j, step.ancestor_mum)) {
          // Disruption extinguished: everything above is baseline.
          out = mum_trace.memo.answers[static_cast<std::size_t>(j)];
          settled = true;
          break;
        }
      }
      if (!settled) out = v;
      if (out != mum_trace.memo.answers[static_cast<std::size_t>(j)])
        diverged = true;
    }
    memo.answers[static_cast<std::size_t>(j)] = out;
    const std::int64_t err = static_cast<std::int64_t>(out) -
                             static_cast<std::int64_t>(fib_target(j));
    fit.total_abs_error = saturating_add_u64(
        fit.total_abs_error, static_cast<std::uint64_t>(err < 0 ? -err : err));
  }
  return fit;
}

}  // namespace fibgp
