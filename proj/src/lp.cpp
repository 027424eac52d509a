// SPDX-License-Identifier: Apache-2.0
#include "ldbsm/lp.hpp"

#include "ldbsm/error.hpp"

namespace ldbsm {

namespace {

/// Dense tableau for: maximize c.z subject to A z = b, z >= 0, b >= 0.
class Simplex {
public:
  Simplex(std::vector<std::vector<Rational>> a, std::vector<Rational> b, std::size_t cols)
      : a_(std::move(a)), b_(std::move(b)), n_(cols), m_(b_.size()) {}

  /// Returns false when the equality system has no non-negative solution.
  bool phase_one() {
    // Artificial variables n_ .. n_+m_-1 start basic.
    for (auto& row : a_) row.resize(n_ + m_, Rational(0));
    basis_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      a_[i][n_ + i] = 1;
      basis_[i] = n_ + i;
    }
    std::vector<Rational> cost(n_ + m_, Rational(0));
    for (std::size_t i = 0; i < m_; ++i) cost[n_ + i] = -1;
    if (!optimize(cost, n_ + m_)) throw DomainError("phase one cannot be unbounded");
    Rational infeas = 0;
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] >= n_) infeas += b_[i];
    if (infeas != 0) return false;
    // Drive remaining (zero-level) artificials out of the basis.
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      for (std::size_t j = 0; j < n_; ++j)
        if (a_[i][j] != 0) {
          pivot(i, j);
          break;
        }
    }
    return true;
  }

  /// Phase two over the original columns. Returns false if unbounded.
  bool phase_two(const std::vector<Rational>& c) {
    std::vector<Rational> cost = c;
    cost.resize(n_ + m_, Rational(0));
    return optimize(cost, n_);
  }

  std::vector<Rational> solution() const {
    std::vector<Rational> z(n_, Rational(0));
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < n_) z[basis_[i]] = b_[i];
    return z;
  }

private:
  bool optimize(const std::vector<Rational>& cost, std::size_t allowed) {
    for (;;) {
      // Reduced costs; Bland: smallest improving column.
      std::optional<std::size_t> enter;
      for (std::size_t j = 0; j < allowed && !enter; ++j) {
        if (in_basis(j)) continue;
        Rational r = cost[j];
        for (std::size_t i = 0; i < m_; ++i)
          if (a_[i][j] != 0) r -= cost[basis_[i]] * a_[i][j];
        if (r > 0) enter = j;
      }
      if (!enter) return true;
      std::optional<std::size_t> leave;
      Rational best;
      for (std::size_t i = 0; i < m_; ++i) {
        if (a_[i][*enter] <= 0) continue;
        Rational ratio = b_[i] / a_[i][*enter];
        if (!leave || ratio < best || (ratio == best && basis_[i] < basis_[*leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (!leave) return false;
      pivot(*leave, *enter);
    }
  }

  bool in_basis(std::size_t j) const {
    for (auto b : basis_)
      if (b == j) return true;
    return false;
  }

  void pivot(std::size_t r, std::size_t c) {
    Rational p = a_[r][c];
    for (auto& v : a_[r]) v /= p;
    b_[r] /= p;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r || a_[i][c] == 0) continue;
      Rational f = a_[i][c];
      for (std::size_t j = 0; j < a_[i].size(); ++j)
        if (a_[r][j] != 0) a_[i][j] -= f * a_[r][j];
      b_[i] -= f * b_[r];
    }
    basis_[r] = c;
  }

  std::vector<std::vector<Rational>> a_;
  std::vector<Rational> b_;
  std::size_t n_, m_;
  std::vector<std::size_t> basis_;
};

} // namespace

LpResult lp_maximize(const Poly& objective, const std::vector<Atom>& constraints, const std::vector<Symbol>& vars) {
  const std::size_t nv = vars.size();
  auto index_of = [&](Symbol s) -> std::size_t {
    for (std::size_t i = 0; i < nv; ++i)
      if (vars[i] == s) return i;
    throw BindingError(symbol_name(s));
  };
  auto linear = [&](const Poly& p, std::vector<Rational>& coeffs, Rational& constant) {
    if (p.degree() > 1) throw DomainError("LP needs affine polynomials, got " + to_string(p));
    coeffs.assign(nv, Rational(0));
    constant = p.constant();
    for (const auto& [m, c] : p.terms())
      if (!m.is_one()) coeffs[index_of(m.factors()[0].first)] = c;
  };

  // Columns: y+ (nv), y- (nv), one slack per Ge row.
  std::size_t slacks = 0;
  for (const auto& a : constraints) {
    if (a.rel != Rel::Ge && a.rel != Rel::Eq) throw DomainError("LP constraints must be in >= 0 or == 0 form");
    if (a.rel == Rel::Ge) ++slacks;
  }
  const std::size_t cols = 2 * nv + slacks;
  std::vector<std::vector<Rational>> rows;
  std::vector<Rational> rhs;
  std::size_t slack = 0;
  for (const auto& a : constraints) {
    std::vector<Rational> coeffs;
    Rational k;
    linear(a.poly, coeffs, k);
    // coeffs.y + k (>= | ==) 0   ->   coeffs.y - s = -k
    std::vector<Rational> row(cols, Rational(0));
    for (std::size_t i = 0; i < nv; ++i) {
      row[i] = coeffs[i];
      row[nv + i] = -coeffs[i];
    }
    if (a.rel == Rel::Ge) row[2 * nv + slack++] = -1;
    Rational b = -k;
    if (b < 0) {
      for (auto& v : row) v = -v;
      b = -b;
    }
    rows.push_back(std::move(row));
    rhs.push_back(b);
  }

  std::vector<Rational> obj;
  Rational obj_const;
  linear(objective, obj, obj_const);
  std::vector<Rational> cost(cols, Rational(0));
  for (std::size_t i = 0; i < nv; ++i) {
    cost[i] = obj[i];
    cost[nv + i] = -obj[i];
  }

  LpResult res;
  Simplex sx(std::move(rows), std::move(rhs), cols);
  if (!sx.phase_one()) return res;
  bool bounded = sx.phase_two(cost);
  auto z = sx.solution();
  for (std::size_t i = 0; i < nv; ++i) res.point[vars[i]] = Rational(z[i] - z[nv + i]);
  res.status = bounded ? LpStatus::Optimal : LpStatus::Unbounded;
  res.value = objective.eval(res.point);
  return res;
}

std::optional<std::map<Symbol, Rational>> find_strict_point(const std::vector<Atom>& region,
                                                            const Poly& violation,
                                                            const std::vector<Symbol>& vars) {
  Symbol t = intern("__lp_slack_t", SymbolKind::Unknown);
  Poly tv = Poly::var(t);
  std::vector<Atom> cons;
  for (const auto& a : region) {
    switch (a.rel) {
    case Rel::Ge: cons.push_back(a); break;
    case Rel::Le: cons.push_back({-a.poly, Rel::Ge}); break;
    case Rel::Gt: cons.push_back({a.poly - tv, Rel::Ge}); break;
    case Rel::Lt: cons.push_back({-a.poly - tv, Rel::Ge}); break;
    case Rel::Eq: cons.push_back(a); break;
    }
  }
  cons.push_back({violation - tv, Rel::Ge});
  cons.push_back({Poly(1) - tv, Rel::Ge});
  std::vector<Symbol> all = vars;
  all.push_back(t);
  auto res = lp_maximize(tv, cons, all);
  if (res.status == LpStatus::Infeasible || res.value <= 0) return std::nullopt;
  res.point.erase(t);
  return res.point;
}

} // namespace ldbsm
