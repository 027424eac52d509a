// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ldbsm/poly.hpp"

#include <map>
#include <optional>
#include <vector>

namespace ldbsm {

/// Exact rational linear programming over free variables.
enum class LpStatus { Optimal, Unbounded, Infeasible };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Rational value{0};
  /// Optimal point (or a feasible point when unbounded).
  std::map<Symbol, Rational> point;
};

/// Maximizes an affine objective subject to affine constraints in Ge or Eq
/// form. Every polynomial must have degree <= 1; variables are the symbols
/// of `vars` (all free). Two-phase simplex with Bland's rule.
LpResult lp_maximize(const Poly& objective, const std::vector<Atom>& constraints, const std::vector<Symbol>& vars);

/// Whether some point satisfies every non-strict atom and every strict
/// atom (Gt/Lt) of `region` while making `violation` strictly positive.
/// Returns such a point, or nullopt when none exists. Decided exactly by
/// maximizing a common slack t <= 1.
std::optional<std::map<Symbol, Rational>> find_strict_point(const std::vector<Atom>& region,
                                                            const Poly& violation,
                                                            const std::vector<Symbol>& vars);

} // namespace ldbsm
