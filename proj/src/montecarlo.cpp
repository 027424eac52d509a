// SPDX-License-Identifier: Apache-2.0
#include "ldbsm/montecarlo.hpp"

#include "ldbsm/error.hpp"
#include "ldbsm/random.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

namespace ldbsm {

void SimConfig::validate() const {
  if (runs == 0) throw ConfigError("need at least one run");
  if (visit_threshold == 0) throw ConfigError("accepting-visit threshold must be >= 1");
}

namespace {

struct CompiledAtom {
  CompiledPoly poly;
  Rel rel;

  bool holds(std::span<const double> v) const {
    double x = poly(v);
    switch (rel) {
    case Rel::Ge: return x >= 0;
    case Rel::Gt: return x > 0;
    case Rel::Le: return x <= 0;
    case Rel::Lt: return x < 0;
    case Rel::Eq: return x == 0;
    }
    return false;
  }
};

struct NoiseSampler {
  enum Kind { Uniform, Point } kind;
  double lo, hi;
};

} // namespace

SimStats simulate(const SdsModel& model, const Ldba& automaton, const CertificateSolution& cert,
                  const AutomatonPolicy& policy, const SimConfig& cfg) {
  cfg.validate();
  const Ldba a = automaton.completed();
  if (cert.v_safe.size() != a.size()) throw ConfigError("certificate does not match the automaton");

  const std::size_t n = model.state.size(), m = model.input.size(), r = model.noise.size();
  std::vector<Symbol> slots = model.state;
  for (const auto& b : model.input) slots.push_back(b.var);
  slots.insert(slots.end(), model.noise.begin(), model.noise.end());

  std::vector<NoiseSampler> noise;
  for (std::size_t i = 0; i < r; ++i) {
    const auto& fam = model.noise_spec.dim(i).family;
    if (auto* u = std::get_if<Uniform>(&fam))
      noise.push_back({NoiseSampler::Uniform, to_double(u->lo), to_double(u->hi)});
    else if (auto* p = std::get_if<PointMass>(&fam))
      noise.push_back({NoiseSampler::Point, to_double(p->value), to_double(p->value)});
    else
      throw SimulationError("noise '" + symbol_name(model.noise[i]) + "' is given by moments only and cannot be sampled");
  }

  struct Piece {
    std::vector<CompiledAtom> guard;
    std::vector<CompiledPoly> body;
  };
  std::vector<Piece> pieces;
  for (const auto& d : model.dynamics) {
    Piece p;
    for (const auto& g : d.guard.conjuncts) p.guard.push_back({CompiledPoly(g.poly, slots), g.rel});
    for (const auto& b : d.body) p.body.emplace_back(b, slots);
    pieces.push_back(std::move(p));
  }
  std::vector<CompiledPoly> atoms;
  for (const auto& pred : atom_predicates(a, model)) atoms.emplace_back(pred.expr, slots);

  struct PerState {
    CompiledPoly v_safe;
    std::vector<CompiledPoly> invariant;
    std::vector<CompiledPoly> control;
  };
  std::vector<PerState> per_state;
  for (StateId q = 0; q < a.size(); ++q) {
    PerState s{CompiledPoly(cert.v_safe[q], slots), {}, {}};
    for (const auto& p : cert.invariant[q]) s.invariant.emplace_back(p, slots);
    for (std::size_t k = 0; k < m; ++k) {
      if (cert.controller)
        s.control.emplace_back(cert.controller->at(q).at(k), slots);
      else if (model.controller)
        s.control.emplace_back(model.controller->at(k), slots);
      else
        throw ConfigError("model has inputs but no controller to simulate");
    }
    per_state.push_back(std::move(s));
  }
  std::vector<double> u_lo, u_hi;
  for (const auto& b : model.input) {
    u_lo.push_back(to_double(b.box.lo));
    u_hi.push_back(to_double(b.box.hi));
  }

  // Flattened policy tables.
  const Letter letters = a.letter_count();
  std::vector<StateId> inside(a.size() * letters), outside(a.size() * letters);
  for (StateId q = 0; q < a.size(); ++q)
    for (Letter l = 0; l < letters; ++l) {
      inside[q * letters + l] = policy.next(q, l, true);
      outside[q * letters + l] = policy.next(q, l, false);
    }
  std::vector<bool> accepting(a.size(), false);
  for (StateId f : a.accepting) accepting[f] = true;

  std::vector<std::optional<Interval>> init_box;
  if (cfg.initial_points.empty()) {
    init_box = implied_box(model.init, model.state);
    for (std::size_t i = 0; i < n; ++i)
      if (!init_box[i])
        throw ConfigError("initial set does not bound '" + symbol_name(model.state[i]) +
                          "'; give explicit initial points");
  }
  std::vector<CompiledAtom> init_atoms;
  for (const auto& c : model.init.conjuncts) init_atoms.push_back({CompiledPoly(c.poly, slots), c.rel});

  SimStats stats;
  stats.runs.reserve(cfg.runs);
  std::vector<double> v(slots.size(), 0.0), next(n);
  std::uint64_t exited = 0, reached_k = 0, visits_total = 0;

  for (std::uint64_t run = 0; run < cfg.runs; ++run) {
    auto g = stream_engine(cfg.seed, run);
    RunSummary s;
    if (!cfg.initial_points.empty()) {
      const auto& x0 = cfg.initial_points[run % cfg.initial_points.size()];
      if (x0.size() != n) throw ConfigError("initial point has the wrong dimension");
      for (std::size_t i = 0; i < n; ++i) v[i] = to_double(x0[i]);
    } else {
      // Rejection sampling inside the init box.
      bool ok = false;
      for (int attempt = 0; attempt < 10000 && !ok; ++attempt) {
        for (std::size_t i = 0; i < n; ++i)
          v[i] = uniform_double(g, to_double(init_box[i]->lo), to_double(init_box[i]->hi));
        ok = std::all_of(init_atoms.begin(), init_atoms.end(), [&](const CompiledAtom& c) { return c.holds(v); });
      }
      if (!ok) throw ConfigError("could not sample a point of the initial set");
    }
    s.initial.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n));

    StateId q = a.initial;
    for (std::uint64_t t = 0; t < cfg.horizon; ++t) {
      const auto& ps = per_state[q];
      double vs = ps.v_safe(v);
      if (s.exit_step < 0 && vs >= 0) s.exit_step = static_cast<std::int64_t>(t);
      bool in_si = vs <= 0;
      for (const auto& p : ps.invariant) in_si = in_si && p(v) >= 0;

      Letter letter = 0;
      for (std::size_t i = 0; i < atoms.size(); ++i)
        if (atoms[i](v) >= 0) letter |= Letter{1} << i;
      StateId q_next = (in_si ? inside : outside)[q * letters + letter];

      for (std::size_t k = 0; k < m; ++k) v[n + k] = std::clamp(ps.control[k](v), u_lo[k], u_hi[k]);
      for (std::size_t i = 0; i < r; ++i)
        v[n + m + i] = noise[i].kind == NoiseSampler::Point ? noise[i].lo : uniform_double(g, noise[i].lo, noise[i].hi);

      const Piece* piece = nullptr;
      for (const auto& p : pieces) {
        bool hit = true;
        for (const auto& c : p.guard) hit = hit && c.holds(v);
        if (hit) {
          piece = &p;
          break;
        }
      }
      if (!piece) {
        std::ostringstream msg;
        msg << "no dynamics piece covers the state (";
        for (std::size_t i = 0; i < n; ++i) msg << (i ? ", " : "") << v[i];
        throw ModelError(msg.str() + ")");
      }
      for (std::size_t i = 0; i < n; ++i) next[i] = piece->body[i](v);
      std::copy(next.begin(), next.end(), v.begin());
      q = q_next;
      if (accepting[q]) {
        ++s.accepting_visits;
        if (s.first_visit < 0) s.first_visit = static_cast<std::int64_t>(t);
      }
    }
    s.final_state = q;
    s.final_x.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n));
    exited += s.exit_step >= 0 ? 1 : 0;
    reached_k += s.accepting_visits >= cfg.visit_threshold ? 1 : 0;
    visits_total += s.accepting_visits;
    stats.runs.push_back(std::move(s));
  }
  const double runs = static_cast<double>(cfg.runs);
  stats.fraction_exited_si = static_cast<double>(exited) / runs;
  stats.fraction_k_accepting_visits = static_cast<double>(reached_k) / runs;
  stats.mean_accepting_visits = static_cast<double>(visits_total) / runs;
  return stats;
}

std::string render_stats(const SimStats& stats, const SimConfig& cfg) {
  std::ostringstream out;
  out.precision(6);
  out << "runs: " << cfg.runs << "\nhorizon: " << cfg.horizon << "\nseed: " << cfg.seed
      << "\nvisit_threshold: " << cfg.visit_threshold << "\nfraction_exited_SI: " << stats.fraction_exited_si
      << "\nfraction_k_accepting_visits: " << stats.fraction_k_accepting_visits
      << "\nmean_accepting_visits: " << stats.mean_accepting_visits << "\n";
  return out.str();
}

void write_runs_csv(std::ostream& out, const SimStats& stats, const SdsModel& model, const Ldba& automaton) {
  const Ldba a = automaton.completed();
  out << "run,exit_step,accepting_visits,first_visit,final_state";
  for (Symbol s : model.state) out << ",init_" << symbol_name(s);
  for (Symbol s : model.state) out << ",final_" << symbol_name(s);
  out << "\n";
  out.precision(17);
  for (std::size_t i = 0; i < stats.runs.size(); ++i) {
    const auto& s = stats.runs[i];
    out << i << "," << s.exit_step << "," << s.accepting_visits << "," << s.first_visit << ","
        << a.states.at(s.final_state);
    for (double x : s.initial) out << "," << x;
    for (double x : s.final_x) out << "," << x;
    out << "\n";
  }
}

} // namespace ldbsm
