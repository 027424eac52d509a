// SPDX-License-Identifier: Apache-2.0
// Reference implementations used by the tests. They share nothing with the
// library beyond its data types.
#pragma once

#include "ldbsm/automaton.hpp"
#include "ldbsm/poly.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

inline std::filesystem::path data(const std::string& rel) { return std::filesystem::path(LDBSM_DATA_DIR) / rel; }

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  double h = (b - a) / n, s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// E[w^k] for w uniform on [a, b], by quadrature.
inline double uniform_moment(double a, double b, unsigned k) {
  return simpson([k](double w) { return std::pow(w, static_cast<int>(k)); }, a, b, 100000) / (b - a);
}

/// States from which no accepting state is reachable, via the reflexive
/// transitive closure of the transition graph (Warshall).
inline std::set<ldbsm::StateId> rejecting(const ldbsm::Ldba& a) {
  const std::size_t n = a.size();
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) r[i][i] = true;
  for (const auto& [key, succ] : a.transitions)
    for (auto t : succ) r[key.first][t] = true;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (r[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (r[k][j]) r[i][j] = true;
  std::set<ldbsm::StateId> out;
  for (std::size_t q = 0; q < n; ++q) {
    bool hit = false;
    for (auto f : a.accepting) hit = hit || r[q][f];
    if (!hit) out.insert(q);
  }
  return out;
}

/// a . x + b >= 0
struct HalfSpace {
  std::vector<ldbsm::Rational> a;
  ldbsm::Rational b;
};

/// Solves the square system rows . x = rhs by Gaussian elimination; nullopt
/// when singular.
inline std::optional<std::vector<ldbsm::Rational>> solve_square(std::vector<std::vector<ldbsm::Rational>> m,
                                                               std::vector<ldbsm::Rational> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && m[p][c] == 0) ++p;
    if (p == n) return std::nullopt;
    std::swap(m[p], m[c]);
    std::swap(rhs[p], rhs[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || m[r][c] == 0) continue;
      ldbsm::Rational f = m[r][c] / m[c][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
      rhs[r] -= f * rhs[c];
    }
  }
  std::vector<ldbsm::Rational> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = rhs[i] / m[i][i];
  return x;
}

/// Vertices of a bounded polyhedron given by half-spaces in `dim` <= 3
/// variables: every feasible intersection of `dim` tight constraints.
inline std::vector<std::vector<ldbsm::Rational>> vertices(const std::vector<HalfSpace>& hs, std::size_t dim) {
  std::vector<std::vector<ldbsm::Rational>> out;
  std::vector<std::size_t> pick(dim);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t depth, std::size_t from) {
    if (depth == dim) {
      std::vector<std::vector<ldbsm::Rational>> m;
      std::vector<ldbsm::Rational> rhs;
      for (auto i : pick) {
        m.push_back(hs[i].a);
        rhs.push_back(-hs[i].b);
      }
      auto x = solve_square(m, rhs);
      if (!x) return;
      for (const auto& h : hs) {
        ldbsm::Rational v = h.b;
        for (std::size_t k = 0; k < dim; ++k) v += h.a[k] * (*x)[k];
        if (v < 0) return;
      }
      for (const auto& y : out)
        if (y == *x) return;
      out.push_back(*x);
      return;
    }
    for (std::size_t i = from; i < hs.size(); ++i) {
      pick[depth] = i;
      rec(depth + 1, i + 1);
    }
  };
  rec(0, 0);
  return out;
}

/// Exact evaluation of an integer-coefficient polynomial at points whose
/// coordinates are k_i / 2^s. Returns value * 2^(s * degree) as a 128-bit
/// integer, so signs are exact as long as nothing overflows (the callers keep
/// coefficients and numerators small).
class DyadicEval {
public:
  DyadicEval(const ldbsm::Poly& p, const std::vector<ldbsm::Symbol>& vars, unsigned shift)
      : shift_(shift), degree_(p.degree()) {
    for (const auto& [m, c] : p.terms()) {
      if (c.get_den() != 1 || !c.get_num().fits_slong_p()) throw std::invalid_argument("DyadicEval: coefficient");
      Term t{c.get_num().get_si(), std::vector<unsigned>(vars.size(), 0), m.degree()};
      for (const auto& [s, e] : m.factors()) {
        std::size_t i = 0;
        while (i < vars.size() && vars[i] != s) ++i;
        if (i == vars.size()) throw std::invalid_argument("DyadicEval: symbol");
        t.exp[i] = e;
      }
      terms_.push_back(std::move(t));
    }
  }

  __int128 operator()(const std::vector<long>& k) const {
    __int128 sum = 0;
    for (const auto& t : terms_) {
      __int128 v = t.coeff;
      for (std::size_t i = 0; i < k.size(); ++i)
        for (unsigned e = 0; e < t.exp[i]; ++e) v *= k[i];
      v <<= shift_ * (degree_ - t.degree);
      sum += v;
    }
    return sum;
  }

private:
  struct Term {
    long coeff;
    std::vector<unsigned> exp;
    unsigned degree;
  };
  unsigned shift_, degree_;
  std::vector<Term> terms_;
};

} // namespace oracle
