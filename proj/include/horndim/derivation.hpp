#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "horndim/chc.hpp"

namespace horndim {

/// A ranked tree of clause identifiers: the skeleton of a derivation.
struct trace_tree {
  std::string label;
  std::vector<trace_tree> children;

  static trace_tree leaf(std::string label) { return {std::move(label), {}}; }

  std::size_t size() const;
  std::size_t height() const;

  bool operator==(const trace_tree&) const = default;
  /// Orders by node count, then label, then children lexicographically.
  std::strong_ordering operator<=>(const trace_tree& other) const;
};

std::size_t tree_dim(const trace_tree& t);

/// Functional notation, e.g. `c3(c2(c1,c1))`.
std::string to_string(const trace_tree& t);
trace_tree parse_tree(std::string_view text);

struct rooted_tree {
  pred_key root;
  trace_tree tree;

  auto operator<=>(const rooted_tree&) const = default;
};

/// All trace trees with at most `max_nodes` nodes whose root clause has a head in
/// `roots`, sorted by (tree, root). Constraints are not consulted.
std::vector<rooted_tree> enumerate_trace_trees(const program& p, const std::set<pred_key>& roots,
                                               std::size_t max_nodes);

/// Like enumerate_trace_trees, but nodes labelled with ids outside `kept` are
/// spliced out and do not count towards `max_nodes`; such clauses must be unary.
/// Yields the projections of the program's trace trees onto the kept ids.
std::vector<rooted_tree> enumerate_projected_trees(const program& p, const std::set<pred_key>& roots,
                                                   std::size_t max_nodes,
                                                   const std::set<std::string>& kept);

/// Removes nodes whose label is not in `kept`; each removed node must be unary.
trace_tree project_tree(const trace_tree& t, const std::set<std::string>& kept);

/// A derivation: the clause used at every node of a trace tree.
struct derivation {
  std::size_t clause_index;
  std::vector<derivation> children;
};

/// Finds a derivation of `root` in `p` whose skeleton is `t`.
std::optional<derivation> resolve_tree(const program& p, const pred_key& root, const trace_tree& t);
trace_tree skeleton(const program& p, const derivation& d);

struct tree_conjunction {
  std::vector<lin_constraint> constraints;
  std::vector<std::string> head_args;
};

/// Constraint of a derivation: every node's clause instantiated with fresh
/// variables, body arguments equated with the child's head arguments.
tree_conjunction derivation_constraint(const program& p, const derivation& d);
tree_conjunction tree_constraint(const program& p, const pred_key& root, const trace_tree& t);

}  // namespace horndim
