// SPDX-License-Identifier: Apache-2.0
#include "ldbsm/bound.hpp"

#include "ldbsm/error.hpp"

#include <boost/multiprecision/cpp_dec_float.hpp>

namespace ldbsm {

namespace {

using Float = boost::multiprecision::number<boost::multiprecision::cpp_dec_float<60>>;

constexpr int kDigits = 40;

Float to_float(const Rational& q) {
  return Float(q.get_num().get_str()) / Float(q.get_den().get_str());
}

/// Exact rational from a fixed 50-digit rendering; within 1e-50 of v.
Rational to_rational(const Float& v) { return parse_rational(v.str(50, std::ios_base::fixed), true); }

Rational ten_pow(int k) {
  Integer z;
  mpz_ui_pow_ui(z.get_mpz_t(), 10, static_cast<unsigned long>(k));
  return Rational(z);
}

/// Largest multiple of 10^-40 below v, minus one more ulp to absorb the
/// evaluation error of the transcendental functions.
Rational round_down(const Float& v) {
  Rational r = to_rational(v);
  Rational scaled = r * ten_pow(kDigits);
  Integer fl;
  mpz_fdiv_q(fl.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  Rational out(fl - 1, ten_pow(kDigits).get_num());
  out.canonicalize();
  return out;
}

} // namespace

ProbabilityBound probability_bound(const Rational& eta, const Rational& eps, const Rational& m) {
  if (eta > 0) throw DomainError("eta_S must be <= 0 (got " + to_string(eta) + ")");
  if (eps <= 0) throw DomainError("eps_S must be > 0 (got " + to_string(eps) + ")");
  if (m <= 0) throw DomainError("M_S must be > 0 (got " + to_string(m) + ")");
  Rational t = Rational(8) * eta * eps / (m * m);
  ProbabilityBound b;
  if (t == 0) {
    b.lower = 0;
    b.decimal = "0";
    b.approx = 0.0;
    return b;
  }
  Float value = Float(1) - boost::multiprecision::exp(to_float(t));
  b.lower = round_down(value);
  if (b.lower < 0) b.lower = 0;
  if (b.lower > 1) b.lower = 1;
  b.decimal = value.str(25, std::ios_base::fixed);
  b.approx = value.convert_to<double>();
  return b;
}

std::optional<Rational> log_one_minus_lower(const Rational& p) {
  if (p < 0 || p > 1) throw DomainError("probability threshold must lie in [0, 1]");
  if (p == 1) return std::nullopt;
  if (p == 0) return Rational(0);
  Float value = boost::multiprecision::log(Float(1) - to_float(p));
  return round_down(value);
}

} // namespace ldbsm
