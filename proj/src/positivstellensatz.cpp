// SPDX-License-Identifier: Apache-2.0
#include "ldbsm/positivstellensatz.hpp"

#include "ldbsm/error.hpp"

#include <algorithm>
#include <set>

namespace ldbsm {

void ExistentialSystem::append(ExistentialSystem other) {
  unknowns.insert(unknowns.end(), other.unknowns.begin(), other.unknowns.end());
  for (auto& c : other.constraints) constraints.push_back(std::move(c));
}

bool simplify_premise(Entailment& e) {
  std::vector<Atom> kept;
  for (auto& a : e.premise) {
    if (a.poly.is_constant()) {
      Rational v = a.poly.constant();
      bool holds = a.rel == Rel::Eq ? v == 0 : v >= 0;
      if (!holds) return false;
      continue;
    }
    kept.push_back(std::move(a));
  }
  e.premise = std::move(kept);
  return true;
}

namespace {

std::function<bool(Symbol)> bound_pred(const Entailment& e) {
  std::set<Symbol> bound(e.bound_vars.begin(), e.bound_vars.end());
  return [bound](Symbol s) { return bound.count(s) > 0; };
}

/// One equality per monomial of `residual` in the bound variables.
void match_coefficients(ExistentialSystem& sys, const Poly& residual, const std::function<bool(Symbol)>& bound,
                        const std::string& label) {
  for (auto& [mono, coeff] : residual.collect(bound)) {
    if (coeff.is_zero()) continue;
    std::string tag = mono.is_one() ? "1" : to_string(mono);
    sys.constraints.push_back({label + " / coeff " + tag, {coeff, Rel::Eq}});
  }
}

std::string conclusion_label(const Entailment& e, std::size_t k) {
  return e.conclusion.size() == 1 ? e.label : e.label + " / #" + std::to_string(k + 1);
}

} // namespace

ExistentialSystem farkas_reduce(const Entailment& entailment, UnknownFactory& factory) {
  Entailment e = entailment;
  ExistentialSystem sys;
  if (!simplify_premise(e)) return sys;
  auto bound = bound_pred(e);
  auto check = [&](const Poly& p) {
    if (p.degree_in(bound) > 1)
      throw ReductionError(e.label + ": degree " + std::to_string(p.degree_in(bound)) +
                           " in the bound variables; Farkas needs degree <= 1 (use the Putinar reduction)");
  };
  for (const auto& a : e.premise) check(a.poly);
  for (const auto& a : e.conclusion) check(a.poly);

  for (std::size_t k = 0; k < e.conclusion.size(); ++k) {
    const auto& c = e.conclusion[k];
    std::string label = conclusion_label(e, k);
    if (c.poly.is_constant() && c.poly.constant() >= 0) continue;
    // Without premises the identity forces c's bound-variable part to vanish.
    if (!c.poly.mentions(bound) && e.premise.empty()) {
      sys.constraints.push_back({label + " / closed", c});
      continue;
    }
    Poly residual = c.poly;
    for (const auto& a : e.premise) {
      Symbol l = factory.fresh();
      sys.unknowns.push_back(l);
      if (a.rel != Rel::Eq) sys.constraints.push_back({label + " / multiplier", {Poly::var(l), Rel::Ge}});
      residual -= Poly::var(l) * a.poly;
    }
    Symbol mu = factory.fresh();
    sys.unknowns.push_back(mu);
    sys.constraints.push_back({label + " / slack", {Poly::var(mu), Rel::Ge}});
    residual -= Poly::var(mu);
    match_coefficients(sys, residual, bound, label);
  }
  return sys;
}

namespace {

Poly dense_parametric(const std::vector<Monomial>& basis, UnknownFactory& factory, ExistentialSystem& sys) {
  Poly p;
  for (const auto& m : basis) {
    Symbol s = factory.fresh();
    sys.unknowns.push_back(s);
    p += Poly::var(s) * Poly::term(Rational(1), m);
  }
  return p;
}

Poly sum_of_squares(const std::vector<Monomial>& basis, unsigned squares, UnknownFactory& factory,
                    ExistentialSystem& sys) {
  Poly sigma;
  for (unsigned k = 0; k < squares; ++k) {
    Poly h = dense_parametric(basis, factory, sys);
    sigma += h * h;
  }
  return sigma;
}

} // namespace

ExistentialSystem putinar_reduce(const Entailment& entailment, unsigned sos_degree, unsigned squares,
                                 UnknownFactory& factory) {
  if (sos_degree % 2 != 0) throw ConfigError("SOS multiplier degree must be even");
  Entailment e = entailment;
  ExistentialSystem sys;
  if (!simplify_premise(e)) return sys;
  auto bound = bound_pred(e);
  const unsigned half = sos_degree / 2;
  auto multiplier_basis = dense_monomials(e.bound_vars, half);

  for (std::size_t k = 0; k < e.conclusion.size(); ++k) {
    const auto& c = e.conclusion[k];
    std::string label = conclusion_label(e, k);
    if (!c.poly.mentions(bound) && e.premise.empty()) {
      sys.constraints.push_back({label + " / closed", c});
      continue;
    }
    unsigned half0 = std::max(half, (c.poly.degree_in(bound) + 1) / 2);
    Poly residual = c.poly - sum_of_squares(dense_monomials(e.bound_vars, half0), squares, factory, sys);
    for (const auto& a : e.premise) {
      if (a.rel == Rel::Eq) {
        residual -= dense_parametric(dense_monomials(e.bound_vars, sos_degree), factory, sys) * a.poly;
      } else {
        residual -= sum_of_squares(multiplier_basis, squares, factory, sys) * a.poly;
      }
    }
    match_coefficients(sys, residual, bound, label);
  }
  return sys;
}

ExistentialSystem reduce_system(const std::vector<Entailment>& system, const TemplateSpace& ts,
                                const SynthesisOptions& opts) {
  ExistentialSystem sys;
  sys.unknowns = ts.unknowns;
  UnknownFactory factory("m_");
  for (const auto& e : system) {
    std::set<Symbol> bound(e.bound_vars.begin(), e.bound_vars.end());
    auto in_bound = [&](Symbol s) { return bound.count(s) > 0; };
    bool linear = true;
    for (const auto& a : e.premise) linear = linear && a.poly.degree_in(in_bound) <= 1;
    for (const auto& a : e.conclusion) linear = linear && a.poly.degree_in(in_bound) <= 1;
    sys.append(linear ? farkas_reduce(e, factory) : putinar_reduce(e, opts.sos_degree, opts.sos_squares, factory));
  }
  if (!ts.fixed.empty()) {
    std::vector<LabeledAtom> kept;
    for (auto& c : sys.constraints) {
      Atom a{c.atom.poly.bind(ts.fixed), c.atom.rel};
      // Constant atoms that hold add nothing; failing ones are kept so the
      // solver reports unsat.
      if (a.poly.is_constant() && a.holds({})) continue;
      kept.push_back({std::move(c.label), std::move(a)});
    }
    sys.constraints = std::move(kept);
  }
  for (const auto& sc : ts.side_constraints) {
    if (sc.atom.rel == Rel::Eq || ts.fixed.empty()) {
      sys.constraints.push_back(sc);
      continue;
    }
    sys.constraints.push_back({sc.label, {sc.atom.poly.bind(ts.fixed), sc.atom.rel}});
  }
  return sys;
}

} // namespace ldbsm
