// SPDX-License-Identifier: Apache-2.0
#include "ldbsm/constraints.hpp"

#include "ldbsm/error.hpp"
#include "ldbsm/lp.hpp"

#include <sstream>

namespace ldbsm {

StateId TransitionAssignment::at(StateId q, Letter a) const {
  auto it = choice.find({q, a});
  if (it == choice.end()) throw ConfigError("transition assignment has no entry for this (state, letter)");
  return it->second;
}

std::string TransitionAssignment::name(const Ldba& automaton) const {
  std::string out;
  for (const auto& [key, target] : choice) {
    if (automaton.successors(key.first, key.second).size() < 2) continue;
    if (!out.empty()) out += "_";
    std::string letter = automaton.letter_name(key.second);
    for (char& c : letter)
      if (c == ',') c = '+';
    if (letter == "~") letter = "none";
    out += automaton.states[key.first] + "." + letter + "-" + automaton.states[target];
  }
  return out.empty() ? "det" : out;
}

std::vector<TransitionAssignment> enumerate_assignments(const Ldba& automaton, std::size_t cap) {
  TransitionAssignment base;
  std::vector<std::pair<std::pair<StateId, Letter>, std::vector<StateId>>> open;
  for (StateId q = 0; q < automaton.size(); ++q) {
    for (Letter a = 0; a < automaton.letter_count(); ++a) {
      const auto& succ = automaton.successors(q, a);
      if (succ.empty()) continue;
      base.choice[{q, a}] = *succ.begin();
      if (succ.size() > 1) open.push_back({{q, a}, {succ.begin(), succ.end()}});
    }
  }
  std::size_t total = 1;
  for (const auto& [key, options] : open) {
    total *= options.size();
    if (total > cap)
      throw CapacityError("more than " + std::to_string(cap) +
                          " transition assignments; restrict the automaton's nondeterministic choices");
  }
  std::vector<TransitionAssignment> out;
  out.reserve(total);
  // Odometer with the first pair most significant.
  std::vector<std::size_t> digit(open.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    TransitionAssignment t = base;
    for (std::size_t i = 0; i < open.size(); ++i) t.choice[open[i].first] = open[i].second[digit[i]];
    out.push_back(std::move(t));
    for (std::size_t i = open.size(); i-- > 0;) {
      if (++digit[i] < open[i].second.size()) break;
      digit[i] = 0;
    }
  }
  return out;
}

ProductContext ProductContext::build(const SdsModel& model, const Ldba& automaton, const SynthesisOptions& opts) {
  opts.validate();
  ProductContext ctx;
  ctx.model = &model;
  ctx.options = opts;
  ctx.automaton = automaton.completed();
  ctx.validation = validate(ctx.automaton);
  if (!ctx.validation.valid) {
    std::string msg = "automaton is not limit-deterministic:";
    for (const auto& v : ctx.validation.entries)
      if (v.is_error()) msg += "\n  " + v.message;
    throw ConfigError(msg);
  }
  ctx.rejecting = rejecting_states(ctx.automaton);
  ctx.atoms = atom_predicates(ctx.automaton, model);
  ctx.cells = letter_cells(ctx.atoms, opts.max_predicates);

  if (opts.mode == Mode::Control) {
    if (model.input.empty()) throw ConfigError("control mode needs an input space in the model");
    if (model.controller) throw ConfigError("control mode synthesizes the controller; remove 'controller' from the model");
  } else if (!model.input.empty() && !model.controller) {
    throw ConfigError("verification needs a controller for every input");
  }
  return ctx;
}

std::vector<Atom> piece_region(const SdsModel& model, std::size_t piece) {
  std::vector<Atom> out = model.dynamics.at(piece).guard.conjuncts;
  for (std::size_t j = 0; j < piece; ++j) {
    const auto& g = model.dynamics[j].guard.conjuncts;
    if (g.size() != 1 || g[0].rel == Rel::Eq) continue;
    out.push_back({g[0].poly, negate(g[0].rel)});
  }
  return out;
}

std::vector<Atom> piece_premise(const SdsModel& model, std::size_t piece) {
  std::vector<Atom> out;
  for (const auto& a : piece_region(model, piece)) out.push_back(a.relaxed_ge());
  return out;
}

bool provably_empty(const std::vector<Atom>& region, const std::vector<Symbol>& vars) {
  for (const auto& a : region)
    if (a.poly.degree() > 1) return false;
  return !find_strict_point(region, Poly(1), vars).has_value();
}

std::vector<Poly> compose_step(const SdsModel& model, std::size_t piece, const std::vector<Poly>& control) {
  std::map<Symbol, Poly> inputs;
  for (std::size_t k = 0; k < model.input.size(); ++k) inputs[model.input[k].var] = control.at(k);
  std::vector<Poly> out;
  for (const auto& body : model.dynamics.at(piece).body) out.push_back(inputs.empty() ? body : body.substitute(inputs));
  return out;
}

namespace {

std::map<Symbol, Poly> step_map(const SdsModel& model, const std::vector<Poly>& next) {
  std::map<Symbol, Poly> m;
  for (std::size_t i = 0; i < model.state.size(); ++i) m[model.state[i]] = next[i];
  return m;
}

const std::vector<Poly>& control_for(const ProductContext& ctx, const TemplateSpace& ts, StateId q) {
  static const std::vector<Poly> none;
  if (ctx.options.mode == Mode::Control) return ts.controller.at(q);
  if (ctx.model->controller) return *ctx.model->controller;
  return none;
}

Poly expectation(const ProductContext& ctx, const Poly& p) {
  return expect_over_noise(p, ctx.model->noise, ctx.model->noise_spec);
}

/// Replaces "forall w in box" by the box corners. Needs every noise symbol
/// to appear with degree <= 1 (multi-affine polynomials attain their
/// extremes over a box at its corners).
std::vector<Atom> corner_instances(const ProductContext& ctx, const Atom& atom, const std::string& where) {
  const auto& model = *ctx.model;
  std::vector<std::size_t> dims;
  for (std::size_t i = 0; i < model.noise.size(); ++i)
    if (atom.poly.degree_in(model.noise[i]) > 0) dims.push_back(i);
  if (dims.empty()) return {atom};
  for (std::size_t i : dims) {
    if (atom.poly.degree_in(model.noise[i]) > 1)
      throw EncodingError(where + ": noise '" + symbol_name(model.noise[i]) +
                          "' enters non-linearly; use the strict encoding");
    if (!model.noise_spec.support(i))
      throw EncodingError(where + ": noise '" + symbol_name(model.noise[i]) +
                          "' has no bounded support; use the strict encoding");
  }
  std::vector<Atom> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << dims.size()); ++mask) {
    std::map<Symbol, Rational> corner;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      auto box = *model.noise_spec.support(dims[k]);
      corner[model.noise[dims[k]]] = ((mask >> k) & 1u) ? box.hi : box.lo;
    }
    out.push_back({atom.poly.bind(corner), atom.rel});
  }
  return out;
}

std::vector<Atom> noise_box(const ProductContext& ctx) {
  std::vector<Atom> out;
  const auto& model = *ctx.model;
  for (std::size_t i = 0; i < model.noise.size(); ++i) {
    auto box = model.noise_spec.support(i);
    if (!box) continue;
    out.push_back({Poly::var(model.noise[i]) - Poly(box->lo), Rel::Ge});
    out.push_back({Poly(box->hi) - Poly::var(model.noise[i]), Rel::Ge});
  }
  return out;
}

std::string cell_tag(const Ldba& a, Letter l) {
  std::string name = a.letter_name(l);
  return "cell{" + (name == "~" ? std::string() : name) + "}";
}

void append(std::vector<Atom>& dst, const std::vector<Atom>& src) { dst.insert(dst.end(), src.begin(), src.end()); }

} // namespace

SafetyParts safety_cond(const ProductContext& ctx, const TemplateSpace& ts, StateId q, StateId q_next,
                        std::size_t piece) {
  const auto& c = ts.constants;
  auto f = step_map(*ctx.model, compose_step(*ctx.model, piece, control_for(ctx, ts, q)));
  SafetyParts parts;
  for (const auto& inv : ts.invariant.at(q_next)) parts.invariant_closure.push_back({inv.substitute(f), Rel::Ge});
  Poly v_next = ts.v_safe.at(q_next).substitute(f);
  parts.expected_decrease = {ts.v_safe.at(q) - expectation(ctx, v_next) - Poly::var(c.eps_s), Rel::Ge};
  Poly diff = ts.v_safe.at(q) - v_next;
  parts.bounded_difference.push_back({diff - Poly::var(c.beta_s), Rel::Ge});
  parts.bounded_difference.push_back({Poly::var(c.beta_s) + Poly::var(c.m_s) - diff, Rel::Ge});
  return parts;
}

std::vector<Entailment> generate(const ProductContext& ctx, const TemplateSpace& ts,
                                 const TransitionAssignment& assignment) {
  const auto& model = *ctx.model;
  const auto& a = ctx.automaton;
  const auto& c = ts.constants;
  const bool strict = ctx.options.encoding == Encoding::Strict;
  std::vector<Entailment> out;

  std::vector<Symbol> xs = model.state;
  std::vector<Symbol> xws = model.state;
  xws.insert(xws.end(), model.noise.begin(), model.noise.end());

  auto in_invariant = [&](StateId q) {
    std::vector<Atom> atoms;
    for (const auto& p : ts.invariant.at(q)) atoms.push_back({p, Rel::Ge});
    return atoms;
  };
  auto in_si = [&](StateId q) {
    auto atoms = in_invariant(q);
    atoms.push_back({-ts.v_safe.at(q), Rel::Ge});
    return atoms;
  };
  const auto& qi = a.initial;
  const auto init = model.init.relaxed();

  // (a), (b)
  {
    Entailment e{"cond-a / " + a.states[qi], xs, init, {}};
    for (const auto& p : ts.invariant.at(qi)) e.conclusion.push_back({p, Rel::Ge});
    out.push_back(std::move(e));
    out.push_back({"cond-b / " + a.states[qi], xs, init, {{Poly::var(c.eta_s) - ts.v_safe.at(qi), Rel::Ge}}});
  }
  // (c)
  for (StateId q : ctx.rejecting)
    out.push_back({"cond-c / " + a.states[q], xs, in_invariant(q), {{ts.v_safe.at(q), Rel::Ge}}});
  // (d)
  for (StateId q = 0; q < a.size(); ++q)
    out.push_back({"cond-d / " + a.states[q], xs, in_invariant(q), {{ts.v_live.at(q), Rel::Ge}}});

  // (e), (f)
  for (StateId q = 0; q < a.size(); ++q) {
    if (ctx.rejecting.count(q)) continue;
    const bool accepting = a.accepting.count(q) > 0;
    const std::string cond = accepting ? "cond-f" : "cond-e";

    for (std::size_t piece = 0; piece < model.dynamics.size(); ++piece) {
      auto base = in_si(q);
      append(base, piece_premise(model, piece));
      const std::string piece_tag = "piece-" + std::to_string(piece + 1);

      if (strict) {
        // Bounded differences hoisted over every successor of q.
        std::set<StateId> all_next;
        for (Letter l = 0; l < a.letter_count(); ++l)
          for (StateId t : a.successors(q, l)) all_next.insert(t);
        for (StateId t : all_next) {
          auto parts = safety_cond(ctx, ts, q, t, piece);
          auto prem = base;
          append(prem, noise_box(ctx));
          out.push_back({cond + " / " + a.states[q] + " / " + piece_tag + " / q'=" + a.states[t] + " / bounded-diff",
                         xws, std::move(prem), parts.bounded_difference});
        }
      }

      for (const auto& cell : ctx.cells) {
        // Cells that cannot meet this piece contribute nothing.
        auto known = piece_region(model, piece);
        known.insert(known.end(), cell.region.conjuncts.begin(), cell.region.conjuncts.end());
        if (provably_empty(known, model.state)) continue;
        StateId next = assignment.at(q, cell.letter);
        std::string label =
            cond + " / " + a.states[q] + " / " + cell_tag(a, cell.letter) + " / " + piece_tag + " / q'=" + a.states[next];
        auto prem = base;
        append(prem, cell.region.relaxed());

        auto parts = safety_cond(ctx, ts, q, next, piece);
        auto f = step_map(model, compose_step(model, piece, control_for(ctx, ts, q)));
        Poly live_next = expectation(ctx, ts.v_live.at(next).substitute(f));
        Atom live = accepting ? Atom{ts.v_live.at(q) + Poly::var(c.m_l) - live_next, Rel::Ge}
                              : Atom{ts.v_live.at(q) - live_next - Poly::var(c.eps_l), Rel::Ge};

        std::vector<Atom> noise_free{parts.expected_decrease, live};
        std::vector<Atom> for_all_w = parts.invariant_closure;
        if (strict) {
          auto wprem = prem;
          append(wprem, noise_box(ctx));
          out.push_back({label + " / forall-w", xws, std::move(wprem), for_all_w});
          out.push_back({label, xs, std::move(prem), noise_free});
        } else {
          append(for_all_w, parts.bounded_difference);
          std::vector<Atom> concl;
          for (const auto& atom : for_all_w) append(concl, corner_instances(ctx, atom, label));
          append(concl, noise_free);
          out.push_back({label, xs, std::move(prem), std::move(concl)});
        }
      }
    }
  }

  // Input containment for synthesized controllers.
  if (ctx.options.mode == Mode::Control) {
    for (StateId q = 0; q < a.size(); ++q) {
      Entailment e{"control / " + a.states[q], xs, in_si(q), {}};
      for (std::size_t k = 0; k < model.input.size(); ++k) {
        const auto& law = ts.controller.at(q).at(k);
        e.conclusion.push_back({law - Poly(model.input[k].box.lo), Rel::Ge});
        e.conclusion.push_back({Poly(model.input[k].box.hi) - law, Rel::Ge});
      }
      out.push_back(std::move(e));
    }
  }
  return out;
}

std::vector<Symbol> unused_unknowns(const TemplateSpace& ts, const std::vector<Entailment>& system) {
  std::set<Symbol> seen;
  auto scan = [&](const Poly& p) {
    for (Symbol s : p.symbols())
      if (is_unknown(s)) seen.insert(s);
  };
  for (const auto& e : system) {
    for (const auto& a : e.premise) scan(a.poly);
    for (const auto& a : e.conclusion) scan(a.poly);
  }
  for (const auto& sc : ts.side_constraints) scan(sc.atom.poly);
  std::vector<Symbol> out;
  for (Symbol u : ts.unknowns)
    if (!seen.count(u)) out.push_back(u);
  return out;
}

std::string render_entailments(const std::vector<Entailment>& system) {
  std::ostringstream out;
  for (const auto& e : system) {
    out << "[" << e.label << "]\n  forall";
    for (Symbol s : e.bound_vars) out << " " << symbol_name(s);
    out << "\n  premise:\n";
    if (e.premise.empty()) out << "    true\n";
    for (const auto& a : e.premise) out << "    " << to_string(a) << "\n";
    out << "  conclusion:\n";
    for (const auto& a : e.conclusion) out << "    " << to_string(a) << "\n";
    out << "\n";
  }
  return out.str();
}

} // namespace ldbsm
