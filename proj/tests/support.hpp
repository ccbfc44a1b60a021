#pragma once

#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "horndim/chc.hpp"
#include "horndim/derivation.hpp"
#include "horndim/tree_automata.hpp"

namespace testing {

using namespace horndim;

std::string fixture_path(const std::string& name);
std::string read_fixture(const std::string& name);
/// Parses a fixture and numbers its clauses c1, c2, ... when it has no ids.
program load_fixture(const std::string& name);

/// Equal clause multisets up to variable renaming and constraint order
/// (constraints compared after moving everything to one side). With
/// `rename_predicates`, also up to a bijection between predicates.
bool isomorphic(const program& a, const program& b, bool rename_predicates = false);
std::string describe_mismatch(const program& a, const program& b);

/// Every ranked tree over `symbols` with at most `max_nodes` nodes.
std::vector<trace_tree> all_trees(const std::map<std::string, std::size_t>& symbols, std::size_t max_nodes);

/// States reachable at the root, by direct recursion over the rule set.
std::set<std::string> reachable_states(const fta& a, const trace_tree& t);
bool oracle_accepts(const fta& a, const trace_tree& t);

/// Random automaton over a fixed alphabet f/0, g/1, h/2.
fta random_fta(std::mt19937_64& rng, std::size_t max_states = 6, std::size_t max_rules = 8);

std::vector<lin_constraint> random_conjunction(std::mt19937_64& rng, std::size_t max_vars = 4,
                                               std::size_t max_constraints = 6, integer max_coeff = 5);

/// Integer solution inside [-range, range]^vars, by exhaustive search.
std::optional<std::map<std::string, integer>> grid_solution(const std::vector<lin_constraint>& cs, integer range);

/// Small random program over p/1 and q/1 with one integrity constraint and
/// clauses of up to three body atoms. Ids c1, c2, ...
program random_program(std::mt19937_64& rng, std::size_t max_clauses = 4);

/// Some False-rooted trace tree of at most `max_nodes` nodes with an integer
/// feasible constraint, by plain enumeration.
std::optional<trace_tree> brute_force_counterexample(const program& p, std::size_t max_nodes);

std::set<trace_tree> trees_only(const std::vector<rooted_tree>& rs);

struct fidelity_report {
  std::size_t feasible = 0;
  /// Instrumented trees whose K can differ from the skeleton's dimension.
  std::vector<std::string> mismatches;
  /// Feasible plain trees with no feasible instrumented counterpart.
  std::vector<std::string> missing;
};

/// Checks K = dim(skeleton) on every feasible instrumented tree with at most
/// `max_nodes` nodes (exact encoding), and that every feasible plain tree of
/// half that size has an instrumented counterpart.
fidelity_report instrumentation_fidelity(const program& plain, std::size_t max_nodes);

/// Drops children labelled outside `kept` (the dim leaves of an instrumented tree).
trace_tree strip_dim_leaves(const trace_tree& t, const std::set<std::string>& kept);

}  // namespace testing
