// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ldbsm/constraints.hpp"
#include "ldbsm/template.hpp"

#include <vector>

namespace ldbsm {

/// Purely existential constraints over unknowns (no bound variable left).
/// Constraint atoms use Ge or Eq.
struct ExistentialSystem {
  std::vector<Symbol> unknowns;
  std::vector<LabeledAtom> constraints;

  void append(ExistentialSystem other);
};

/// Farkas: c == sum_i l_i a_i + mu with l_i, mu >= 0 (free l_i for
/// equality premises), matched monomial by monomial in the bound variables.
/// Every polynomial must have degree <= 1 in the bound variables; otherwise
/// throws ReductionError. Fresh multipliers come from `factory`.
ExistentialSystem farkas_reduce(const Entailment& e, UnknownFactory& factory);

/// Putinar-style: c == s_0 + sum_i s_i a_i, each s a sum of `squares`
/// squares of dense parametric polynomials of degree sos_degree / 2 (s_0
/// grows to cover deg c). Equality premises get a free dense multiplier.
ExistentialSystem putinar_reduce(const Entailment& e, unsigned sos_degree, unsigned squares,
                                 UnknownFactory& factory);

/// Farkas where it applies, Putinar otherwise; then the template space's
/// side constraints. Unknowns: template unknowns first, then multipliers.
ExistentialSystem reduce_system(const std::vector<Entailment>& system, const TemplateSpace& ts,
                                const SynthesisOptions& opts);

/// Drops premises that are non-negative constants. Returns false when some
/// premise is a negative constant (the entailment holds vacuously).
bool simplify_premise(Entailment& e);

} // namespace ldbsm
