// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace ldbsm {

/// Exact rational, always canonical (reduced, positive denominator).
using Rational = mpq_class;
using Integer = mpz_class;

/// Parses "3", "-5/16", and (when allowed) decimals such as "0.125" or "1e-3".
/// Throws ParseError on anything else.
Rational parse_rational(std::string_view text, bool allow_decimal = true);

/// "-5/16", "3", "0".
std::string to_string(const Rational& q);

double to_double(const Rational& q);

/// Exact conversion of a finite double.
Rational from_double(double v);

Rational pow(const Rational& base, unsigned exponent);

} // namespace ldbsm
