// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ldbsm/rational.hpp"

#include <optional>
#include <string>

namespace ldbsm {

/// Certified satisfaction probability 1 - exp(8*eta*eps/M^2).
struct ProbabilityBound {
  /// Rounded toward zero: never exceeds the true value.
  Rational lower;
  /// Decimal rendering of the high-precision value (>= 20 significant digits).
  std::string decimal;
  double approx = 0.0;
};

/// Requires eta <= 0, eps > 0, m > 0; throws DomainError otherwise.
ProbabilityBound probability_bound(const Rational& eta, const Rational& eps, const Rational& m);

/// Rational r <= ln(1 - p) with 40 decimal digits, or nullopt when p == 1
/// (ln 0 = -inf). Requires 0 <= p <= 1.
std::optional<Rational> log_one_minus_lower(const Rational& p);

} // namespace ldbsm
