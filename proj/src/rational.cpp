// SPDX-License-Identifier: Apache-2.0
#include "ldbsm/rational.hpp"

#include "ldbsm/error.hpp"

#include <cctype>
#include <cmath>

namespace ldbsm {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

} // namespace

Rational parse_rational(std::string_view text, bool allow_decimal) {
  auto fail = [&](const char* why) {
    throw ParseError(std::string(why) + " in number '" + std::string(text) + "'", 0, 0);
  };
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (s.empty()) fail("empty");

  Rational result;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto num = s.substr(0, slash);
    auto den = s.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) fail("malformed fraction");
    Integer d(std::string(den), 10);
    if (d == 0) fail("zero denominator");
    result = Rational(Integer(std::string(num), 10), d);
    result.canonicalize();
  } else if (all_digits(s)) {
    result = Rational(Integer(std::string(s), 10));
  } else {
    if (!allow_decimal) fail("decimal literal not allowed");
    std::string_view mantissa = s;
    long exponent = 0;
    if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
      mantissa = s.substr(0, e);
      auto ex = s.substr(e + 1);
      bool eneg = false;
      if (!ex.empty() && (ex.front() == '-' || ex.front() == '+')) {
        eneg = ex.front() == '-';
        ex.remove_prefix(1);
      }
      if (!all_digits(ex) || ex.size() > 6) fail("malformed exponent");
      exponent = std::stol(std::string(ex));
      if (eneg) exponent = -exponent;
    }
    auto dot = mantissa.find('.');
    std::string digits;
    if (dot == std::string_view::npos) {
      digits = std::string(mantissa);
    } else {
      auto ip = mantissa.substr(0, dot);
      auto fp = mantissa.substr(dot + 1);
      if ((!ip.empty() && !all_digits(ip)) || (!fp.empty() && !all_digits(fp)) ||
          (ip.empty() && fp.empty()))
        fail("malformed decimal");
      digits = std::string(ip) + std::string(fp);
      exponent -= static_cast<long>(fp.size());
    }
    if (!all_digits(digits)) fail("malformed decimal");
    Integer mant(digits, 10);
    Integer scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exponent)));
    result = exponent >= 0 ? Rational(mant * scale) : Rational(mant, scale);
    result.canonicalize();
  }
  return negative ? Rational(-result) : result;
}

std::string to_string(const Rational& q) { return q.get_str(10); }

double to_double(const Rational& q) { return q.get_d(); }

Rational from_double(double v) {
  if (!std::isfinite(v)) throw DomainError("non-finite value cannot be made rational");
  Rational r;
  mpq_set_d(r.get_mpq_t(), v);
  return r;
}

Rational pow(const Rational& base, unsigned exponent) {
  Rational result(1);
  Rational b = base;
  while (exponent) {
    if (exponent & 1u) result *= b;
    exponent >>= 1;
    if (exponent) b *= b;
  }
  return result;
}

} // namespace ldbsm
