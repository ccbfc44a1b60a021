#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "horndim/chc.hpp"

namespace horndim {

enum class feasibility_status { infeasible, rational_feasible, integer_witness };

struct feasibility {
  feasibility_status status = feasibility_status::rational_feasible;
  std::optional<std::map<std::string, integer>> witness;
  /// Set when elimination or witness search gave up.
  bool budget_exhausted = false;
};

struct fm_options {
  /// Branch-and-bound nodes allowed for the integer witness search.
  std::size_t witness_budget = 100000;
  /// Rows allowed in the system during elimination before giving up.
  std::size_t row_limit = 20000;
};

/// Decides satisfiability of a conjunction over the integers by Fourier-Motzkin
/// elimination with integer tightening, then searches for an integer witness by
/// back-substitution with bounded branching.
///
/// `infeasible` is definitive (no integer solution). `integer_witness` comes
/// with an assignment satisfying every constraint. Otherwise
/// `rational_feasible` is returned.
feasibility fm_feasible(const std::vector<lin_constraint>& constraints, const fm_options& opts = {});

enum class projection_status { infeasible, projected, gave_up };

struct projection {
  projection_status status = projection_status::gave_up;
  /// Rows over the kept variables only, in canonical order, compared against 0.
  std::vector<lin_constraint> constraints;
};

/// Eliminates every variable outside `keep`. The result is implied by the input
/// over the integers; `infeasible` means the input has no integer solution.
projection fm_project(const std::vector<lin_constraint>& constraints, const std::set<std::string>& keep,
                      const fm_options& opts = {});

}  // namespace horndim
