// SPDX-License-Identifier: Apache-2.0
#include "ldbsm/template.hpp"

#include "ldbsm/bound.hpp"
#include "ldbsm/error.hpp"

namespace ldbsm {

void SynthesisOptions::validate() const {
  if (degree < 1) throw ConfigError("template degree must be >= 1");
  if (invariant_count < 1) throw ConfigError("invariant count must be >= 1");
  if (probability < 0 || probability > 1) throw ConfigError("probability threshold must lie in [0, 1]");
  if (sos_degree % 2 != 0) throw ConfigError("SOS multiplier degree must be even");
  if (sos_squares < 1) throw ConfigError("need at least one square per SOS multiplier");
  if (epsilon_floor <= 0) throw ConfigError("epsilon floor must be positive");
}

std::vector<Monomial> dense_monomials(std::span<const Symbol> vars, unsigned degree) {
  std::vector<Monomial> out{Monomial{}};
  // Grow by one variable at a time; keeps every product of total degree <= d.
  for (Symbol v : vars) {
    std::vector<Monomial> next;
    for (const auto& m : out)
      for (unsigned e = 0; m.degree() + e <= degree; ++e) next.push_back(m * Monomial::of(v, e));
    out = std::move(next);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t expected_unknown_count(std::size_t states, std::size_t state_dim, std::size_t input_dim,
                                   const SynthesisOptions& opts) {
  // C(n+d, d)
  std::size_t binom = 1;
  for (std::size_t k = 1; k <= opts.degree; ++k) binom = binom * (state_dim + k) / k;
  std::size_t per_state = 2 + opts.invariant_count + (opts.mode == Mode::Control ? input_dim : 0);
  return states * per_state * binom + 6;
}

namespace {

std::string monomial_tag(const Monomial& m) {
  if (m.is_one()) return "c";
  std::string out;
  for (const auto& [s, e] : m.factors()) {
    if (!out.empty()) out += "_";
    out += symbol_name(s);
    if (e > 1) out += "p" + std::to_string(e);
  }
  return out;
}

} // namespace

TemplateSpace instantiate(const SdsModel& model, const Ldba& automaton, const SynthesisOptions& opts) {
  opts.validate();
  TemplateSpace ts;
  auto basis = dense_monomials(model.state, opts.degree);

  auto dense = [&](const std::string& object) {
    Poly p;
    for (const auto& m : basis) {
      Symbol u = intern(object + "_" + monomial_tag(m), SymbolKind::Unknown);
      ts.unknowns.push_back(u);
      p += Poly::var(u) * Poly::term(Rational(1), m);
    }
    return p;
  };

  for (StateId q = 0; q < automaton.size(); ++q) {
    const auto& name = automaton.states[q];
    ts.v_safe.push_back(dense("vs_" + name));
    ts.v_live.push_back(dense("vl_" + name));
    std::vector<Poly> inv;
    for (unsigned j = 1; j <= opts.invariant_count; ++j) inv.push_back(dense("inv" + std::to_string(j) + "_" + name));
    ts.invariant.push_back(std::move(inv));
    if (opts.mode == Mode::Control) {
      std::vector<Poly> law;
      for (const auto& b : model.input) law.push_back(dense("pi_" + symbol_name(b.var) + "_" + name));
      ts.controller.push_back(std::move(law));
    }
  }

  auto constant = [&](const char* name) {
    Symbol s = intern(name, SymbolKind::Unknown);
    ts.unknowns.push_back(s);
    return s;
  };
  auto& c = ts.constants;
  c.eta_s = constant("eta_S");
  c.eps_s = constant("eps_S");
  c.m_s = constant("M_S");
  c.beta_s = constant("beta_S");
  c.eps_l = constant("eps_L");
  c.m_l = constant("M_L");

  auto var = [](Symbol s) { return Poly::var(s); };
  Poly floor(opts.epsilon_floor);
  ts.side_constraints.push_back({"const / eta_S <= 0", {var(c.eta_s), Rel::Le}});
  ts.side_constraints.push_back({"const / eps_S >= floor", {var(c.eps_s) - floor, Rel::Ge}});
  if (opts.normalize_scale) {
    ts.side_constraints.push_back({"const / M_S == 1 (scale)", {var(c.m_s) - Poly(1), Rel::Eq}});
    ts.side_constraints.push_back({"const / eps_L == 1 (scale)", {var(c.eps_l) - Poly(1), Rel::Eq}});
    ts.fixed = {{c.m_s, Rational(1)}, {c.eps_l, Rational(1)}};
  } else {
    ts.side_constraints.push_back({"const / M_S >= floor", {var(c.m_s) - floor, Rel::Ge}});
    ts.side_constraints.push_back({"const / eps_L >= floor", {var(c.eps_l) - floor, Rel::Ge}});
  }
  ts.side_constraints.push_back({"const / M_L >= floor", {var(c.m_l) - floor, Rel::Ge}});
  // 8 eta eps <= M^2 ln(1 - p), with ln(1 - p) rounded down.
  auto log_bound = log_one_minus_lower(opts.probability);
  if (!log_bound) {
    ts.side_constraints.push_back({"const / probability threshold (p = 1 is unattainable)", {Poly(-1), Rel::Ge}});
  } else {
    Poly lhs = Poly(8) * var(c.eta_s) * var(c.eps_s);
    Poly rhs = var(c.m_s) * var(c.m_s) * Poly(*log_bound);
    ts.side_constraints.push_back({"const / probability threshold", {lhs - rhs, Rel::Le}});
  }
  return ts;
}

Poly concretize(const Poly& templ, const std::map<Symbol, Rational>& assignment) {
  Poly p = templ.bind(assignment);
  if (p.mentions(is_unknown)) {
    for (Symbol s : p.symbols())
      if (is_unknown(s)) throw BindingError(symbol_name(s));
  }
  return p;
}

} // namespace ldbsm
