#pragma once

#include "horndim/chc.hpp"

namespace horndim {

/// The at-most-k-dimension program. Clauses carry `origin` provenance into `p`;
/// epsilon-clauses carry none. Epsilon-clauses are only emitted for body
/// predicates that have a defining clause.
program at_most_k(const program& p, unsigned k);

/// At-least-(k+1) program built by renaming the at-most program and adding
/// link clauses plus a copy of `p`.
program at_least_k_direct(const program& p, unsigned k);

/// True for `h[d](X) :- h(e)(X).`
bool is_epsilon_clause(const clause& c);

/// Replaces each epsilon-clause by one clause per defining clause of its body
/// predicate. Epsilon-clauses over undefined predicates disappear.
program unfold_epsilon(const program& pk);

/// Copies each clause's identifier from the clause of `origin` it derives from.
program inherit_ids(const program& pk, const program& origin);

/// inherit_ids(unfold_epsilon(at_most_k(p, k)), p)
program at_most_k_unfolded(const program& p, unsigned k);

/// Drops clauses that can never take part in a derivation of an accepting predicate.
program prune(const program& p);

/// Variable names A, B, C, ... used for generated clauses.
std::vector<std::string> standard_vars(std::size_t n);

}  // namespace horndim
