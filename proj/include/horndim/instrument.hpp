#pragma once

#include "horndim/chc.hpp"

namespace horndim {

enum class dim_encoding {
  /// One clause per case of the n-ary dimension rule.
  exact,
  /// dim_n folded through dim_2 from the left. Not equivalent to the n-ary
  /// rule: the fold of (0,0,1) is 2 where the tree dimension is 1.
  fold,
};

struct instrument_options {
  dim_encoding encoding = dim_encoding::exact;
};

/// Name of the n-ary dimension combinator predicate.
pred_key dim_pred(std::size_t n);

/// Appends a dimension argument to every predicate and a dim_n atom to every
/// clause body, then the needed dim_n definitions in ascending n. Integrity
/// clauses get dimension variables for their body atoms but no dim_n atom.
program instrument_dim(const program& p, const instrument_options& opts = {});

/// The defining clauses of dim_n (and, for the fold, of the dim_m it uses).
std::vector<clause> dim_definition(std::size_t n, dim_encoding encoding);

/// Appends an integrity constraint and makes false the only accepting predicate.
program add_integrity(program p, clause c);

}  // namespace horndim
