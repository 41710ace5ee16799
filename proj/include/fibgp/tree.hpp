#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "fibgp/opcode.hpp"

namespace fibgp {

using NodeIndex = std::size_t;

// Genome: binary expression tree stored as a flat opcode array in prefix
// (pre-order) order, GPquick style.  Immutable once built; subtree splice and
// interpretation are plain array operations.
struct Tree {
  std::vector<Opcode> ops;

  std::size_t size() const { return ops.size(); }
  bool operator==(const Tree&) const = default;
};

// Arity-counting scan: a prefix array is well formed iff the pending-slot
// counter hits zero exactly at the last opcode.
inline bool well_formed(const Tree& t) {
  if (t.ops.empty()) return false;
  std::size_t pending = 1;
  for (std::size_t i = 0; i < t.ops.size(); ++i) {
    if (pending == 0) return false;
    pending += static_cast<std::size_t>(arity(t.ops[i]));
    --pending;
  }
  return pending == 0;
}

// Closed index range [first, last] covering the subtree rooted at `at`.
inline std::pair<NodeIndex, NodeIndex> subtree_span(const Tree& t,
                                                    NodeIndex at) {
  std::size_t pending = 1;
  NodeIndex i = at;
  for (;; ++i) {
    pending += static_cast<std::size_t>(arity(t.ops[i]));
    --pending;
    if (pending == 0) break;
  }
  return {at, i};
}

// Longest root-to-leaf path counted in edges; a lone terminal has depth 0.
// Matches the per-level decay analysis convention.
inline int depth(const Tree& t) {
  int max_depth = 0;
  int level = 0;
  std::vector<int> pending;  // children still owed at each open level
  for (Opcode op : t.ops) {
    if (level > max_depth) max_depth = level;
    if (is_function(op)) {
      pending.push_back(2);
      ++level;
    } else {
      while (!pending.empty() && --pending.back() == 0) {
        pending.pop_back();
        --level;
      }
    }
  }
  return max_depth;
}

// Per-node structural links, built in one backward scan.  parent of the root
// is the node's own index sentinel (== size).
struct NodeLinks {
  std::vector<NodeIndex> parent;
  std::vector<NodeIndex> left;    // first child (functions only)
  std::vector<NodeIndex> right;   // second child (functions only)
  std::vector<NodeIndex> end;     // last index of the subtree
  std::vector<int> node_depth;    // edges below the root
};

inline NodeLinks build_links(const Tree& t) {
  const std::size_t n = t.size();
  NodeLinks links;
  links.parent.assign(n, n);
  links.left.assign(n, n);
  links.right.assign(n, n);
  links.end.assign(n, 0);
  links.node_depth.assign(n, 0);
  std::vector<NodeIndex> stack;  // roots of already-scanned subtrees
  for (std::size_t k = n; k-- > 0;) {
    if (is_function(t.ops[k])) {
      NodeIndex l = stack.back();
      stack.pop_back();
      NodeIndex r = stack.back();
      stack.pop_back();
      links.left[k] = l;
      links.right[k] = r;
      links.parent[l] = k;
      links.parent[r] = k;
      links.end[k] = links.end[r];
    } else {
      links.end[k] = k;
    }
    stack.push_back(k);
  }
  for (std::size_t k = 1; k < n; ++k)
    links.node_depth[k] = links.node_depth[links.parent[k]] + 1;
  return links;
}

// Path from the parent of `at` up to the root, bottom-up; empty for the root.
inline std::vector<NodeIndex> ancestors(const Tree& t, NodeIndex at) {
  std::vector<NodeIndex> path;
  // Walk the prefix array leftwards: an ancestor is any earlier function
  // whose span still covers `at`.
  NodeLinks links = build_links(t);
  NodeIndex cur = at;
  while (links.parent[cur] != t.size()) {
    cur = links.parent[cur];
    path.push_back(cur);
  }
  return path;
}

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

namespace detail {

struct SexprLexer {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' ||
                                 text[pos] == '\n' || text[pos] == '\r'))
      ++pos;
  }

  // Parses one expression, appending opcodes in prefix order.
  void parse_expr(std::vector<Opcode>& out) {
    skip_ws();
    if (pos >= text.size()) throw ParseError("unexpected end of input", pos);
    if (text[pos] == '(') {
      const std::size_t open = pos++;
      skip_ws();
      const std::size_t head_start = pos;
      Opcode op = parse_atom();
      if (!is_function(op))
        throw ParseError("terminal used with arguments", head_start);
      out.push_back(op);
      for (int i = 0; i < arity(op); ++i) parse_expr(out);
      skip_ws();
      if (pos >= text.size() || text[pos] != ')')
        throw ParseError("expected ')' for '(' ", open);
      ++pos;
    } else if (text[pos] == ')') {
      throw ParseError("unexpected ')'", pos);
    } else {
      Opcode op = parse_atom();
      if (is_function(op))
        throw ParseError("function requires parenthesized arguments", pos);
      out.push_back(op);
    }
  }

  Opcode parse_atom() {
    const std::size_t start = pos;
    while (pos < text.size() && text[pos] != '(' && text[pos] != ')' &&
           text[pos] != ' ' && text[pos] != '\t' && text[pos] != '\n' &&
           text[pos] != '\r')
      ++pos;
    std::string_view tok = text.substr(start, pos - start);
    auto op = opcode_from_token(tok);
    if (!op)
      throw ParseError("unknown token '" + std::string(tok) + "'", start);
    return *op;
  }
};

}  // namespace detail

inline Tree parse_sexpr(std::string_view text) {
  detail::SexprLexer lex{text};
  Tree t;
  lex.parse_expr(t.ops);
  lex.skip_ws();
  if (lex.pos != text.size())
    throw ParseError("trailing input", lex.pos);
  return t;
}

inline std::string print_sexpr(const Tree& t) {
  std::string out;
  std::vector<int> pending;  // children owed at each open paren
  for (Opcode op : t.ops) {
    if (!out.empty() && out.back() != '(') out += ' ';
    if (is_function(op)) {
      out += '(';
      out += token(op);
      pending.push_back(2);
    } else {
      out += token(op);
      while (!pending.empty() && --pending.back() == 0) {
        pending.pop_back();
        out += ')';
      }
    }
  }
  return out;
}

struct DepthStats {
  double mean_depth;
  double std_depth;
};

// Leading-order expected depth of a uniform random binary tree with n
// internal nodes: mean 2*sqrt(pi*n), std sqrt(4*pi*(pi-3)/3 * n).
// Asymptotic only; inaccurate for small n.
inline DepthStats expected_random_tree_depth(std::size_t size) {
  if (size < 3 || size % 2 == 0)
    throw std::domain_error("expected_random_tree_depth needs odd size >= 3");
  const double n = static_cast<double>((size - 1) / 2);
  const double pi = 3.14159265358979323846;
  return {2.0 * std::sqrt(pi * n),
          std::sqrt(4.0 * pi * (pi - 3.0) / 3.0 * n)};
}

}  // namespace fibgp
