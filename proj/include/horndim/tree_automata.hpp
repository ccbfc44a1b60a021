#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "horndim/chc.hpp"
#include "horndim/derivation.hpp"

namespace horndim {

struct fta_rule {
  std::string symbol;
  std::vector<std::string> args;
  std::string target;

  auto operator<=>(const fta_rule&) const = default;
};

/// Bottom-up nondeterministic finite tree automaton over named states.
struct fta {
  std::set<std::string> states;
  std::set<std::string> final;
  std::map<std::string, std::size_t> symbols;
  std::set<fta_rule> rules;

  void add_rule(fta_rule r);
  void check() const;
};

/// A determinised state: a sorted set of states of the source automaton.
using subset_state = std::vector<std::string>;

/// Product-form rule: the tuple (Q1..Qn) matches iff Qi is in args[i] for all i.
struct product_rule {
  std::string symbol;
  std::vector<std::set<subset_state>> args;
  subset_state target;

  auto operator<=>(const product_rule&) const = default;
};

struct dfta {
  std::set<subset_state> states;
  std::set<subset_state> final;
  std::map<std::string, std::size_t> symbols;
  std::vector<product_rule> rules;

  /// Throws unless no two rules can match the same symbol and argument tuple.
  void check_deterministic() const;
  /// Number of plain tuple rules obtained by expanding the product slots.
  std::size_t expanded_size() const;
};

/// State name used for a predicate key in trace automata.
std::string state_name(const pred_key& key);

/// Trace FTA of a program with ids. Final states default to `p.accepting`.
fta trace_fta(const program& p, std::optional<std::set<pred_key>> final = std::nullopt);

struct fta_run {
  bool accepted = false;
  std::set<std::string> states;
};
struct dfta_run {
  bool accepted = false;
  std::optional<subset_state> state;
};

fta_run run(const fta& a, const trace_tree& t);
dfta_run run(const dfta& a, const trace_tree& t);
inline bool accepts(const fta& a, const trace_tree& t) { return run(a, t).accepted; }
inline bool accepts(const dfta& a, const trace_tree& t) { return run(a, t).accepted; }

/// Reachable-states subset construction, returned in product form.
dfta determinize(const fta& a);

/// Union of two automata with disjoint state names.
fta fta_union(const fta& a, const fta& b);

/// L(a) \ L(b): standardise apart, unite, determinise, and accept exactly the
/// subset-states that hold a final state of `a` and none of `b`.
dfta difference(const fta& a, const fta& b);

/// Removes states that are unreachable or from which no final state can be reached.
dfta trim(const dfta& a);

/// Clauses recognising the automaton's trees through the given clause for each symbol.
program chc_of_fta(const fta& a, const std::map<std::string, clause>& id_inv);
program chc_of_fta(const dfta& a, const std::map<std::string, clause>& id_inv);

/// Exact at-least-(k+1) program via the automaton difference of p and p^{<=k}.
program at_least_via_fta(const program& p, unsigned k);

std::string render_fta(const fta& a);
std::string render_subset(const subset_state& s);
std::string render_dfta(const dfta& a);

}  // namespace horndim
