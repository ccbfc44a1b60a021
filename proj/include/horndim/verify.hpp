#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "horndim/chc.hpp"
#include "horndim/derivation.hpp"
#include "horndim/feasibility.hpp"

namespace horndim {

enum class verdict { safe, unsafe, unknown };

std::string_view to_string(verdict v);

struct oracle_verdict {
  verdict result = verdict::unknown;
  /// Only present for unsafe verdicts; labels are ids of the program asked.
  std::optional<trace_tree> witness;
  std::string diagnostic;
};

/// A SAFE procedure. Must be sound; unknown is always allowed.
using oracle = std::function<oracle_verdict(const program&)>;

/// The predicates whose derivations count as counterexamples.
std::set<pred_key> query_roots(const program& p);

/// Safe iff no accepting predicate has any trace tree at all.
oracle_verdict trivial_safe(const program& p);

/// Decides programs whose accepting predicates have finitely many derivations
/// (no recursion below them) by checking each one; unknown otherwise or when
/// there are more than `max_derivations`.
oracle_verdict exhaustive_safe(const program& p, std::size_t max_derivations = 10000, const fm_options& fm = {});
/// Searches for a counterexample derivation of at most `max_nodes` nodes, in
/// increasing size. Renaming clauses (`h(X) :- b(X).`) do not count as nodes.
/// Never answers safe.
oracle_verdict bounded_unsafe(const program& p, std::size_t max_nodes, const fm_options& fm = {});

/// SMT-LIB 2.6 HORN encoding; accepting predicates other than `false` get a query clause.
std::string emit_smtlib_horn(const program& p);

/// Runs `command` with `{file}` replaced by a temporary SMT-LIB file holding
/// emit_smtlib_horn(p). stdout `sat` maps to safe and `unsat` to unsafe.
oracle_verdict external_oracle(const std::string& command, const program& p,
                               std::chrono::milliseconds timeout);

/// First non-unknown verdict wins, in order.
oracle compose(std::vector<oracle> oracles);

enum class at_least_mode { direct, fta };
enum class branch { at_most, at_least };

std::string_view to_string(branch b);

struct verify_options {
  unsigned k_max = 3;
  at_least_mode mode = at_least_mode::fta;
  bool shrink = false;
  /// Asks the two oracles of an iteration concurrently.
  bool parallel = false;
};

struct verify_outcome {
  verdict result = verdict::unknown;
  std::optional<unsigned> resolved_k;
  std::optional<branch> side;
  /// Counterexample as a trace tree of the input program.
  std::optional<trace_tree> witness;
  std::string diagnostic;
};

/// Dimension decomposition loop. `p` needs clause ids.
verify_outcome verify_loop(const program& p, const oracle& safe, const verify_options& opts = {});

/// Integer-feasibility check of a counterexample tree rooted at `false`.
bool is_feasible_counterexample(const program& p, const trace_tree& t, const fm_options& fm = {});

}  // namespace horndim
