// SPDX-License-Identifier: Apache-2.0
#include "ldbsm/certificate.hpp"

#include "ldbsm/error.hpp"
#include "ldbsm/lp.hpp"
#include "ldbsm/random.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <sstream>

namespace ldbsm {

// ---------------------------------------------------------------------------
// Extraction and file format

CertificateSolution extract_certificate(const TemplateSpace& ts, const Ldba& automaton,
                                        const std::map<Symbol, Rational>& values,
                                        const TransitionAssignment& assignment) {
  CertificateSolution cert;
  cert.state_names = automaton.states;
  for (StateId q = 0; q < automaton.size(); ++q) {
    cert.v_safe.push_back(concretize(ts.v_safe.at(q), values));
    cert.v_live.push_back(concretize(ts.v_live.at(q), values));
    std::vector<Poly> inv;
    for (const auto& p : ts.invariant.at(q)) inv.push_back(concretize(p, values));
    cert.invariant.push_back(std::move(inv));
  }
  if (!ts.controller.empty()) {
    cert.controller.emplace();
    for (const auto& law : ts.controller) {
      std::vector<Poly> row;
      for (const auto& p : law) row.push_back(concretize(p, values));
      cert.controller->push_back(std::move(row));
    }
  }
  auto value = [&](Symbol s) {
    auto it = values.find(s);
    if (it == values.end()) throw BindingError(symbol_name(s));
    return it->second;
  };
  const auto& c = ts.constants;
  cert.eta_s = value(c.eta_s);
  cert.eps_s = value(c.eps_s);
  cert.m_s = value(c.m_s);
  cert.beta_s = value(c.beta_s);
  cert.eps_l = value(c.eps_l);
  cert.m_l = value(c.m_l);
  cert.assignment = assignment;
  try {
    cert.certified_probability = probability_bound(cert.eta_s, cert.eps_s, cert.m_s).lower;
  } catch (const DomainError&) {
    cert.certified_probability = 0;
  }
  return cert;
}

namespace {

const char* const kConstantNames[] = {"eta_S", "eps_S", "M_S", "beta_S", "eps_L", "M_L"};

std::vector<Rational*> constant_slots(CertificateSolution& c) {
  return {&c.eta_s, &c.eps_s, &c.m_s, &c.beta_s, &c.eps_l, &c.m_l};
}

std::string letter_text(const Ldba& a, Letter l) { return a.letter_name(l); }

} // namespace

std::string render_certificate(const CertificateSolution& cert, const SdsModel& model, const Ldba& automaton) {
  Ldba a = automaton.completed();
  auto copy = cert;
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "constants" << YAML::Value << YAML::BeginMap;
  auto slots = constant_slots(copy);
  for (std::size_t i = 0; i < slots.size(); ++i)
    out << YAML::Key << kConstantNames[i] << YAML::Value << YAML::DoubleQuoted << to_string(*slots[i]);
  out << YAML::EndMap;
  out << YAML::Key << "states" << YAML::Value << YAML::BeginMap;
  for (StateId q = 0; q < cert.v_safe.size(); ++q) {
    out << YAML::Key << cert.state_names.at(q) << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "v_safe" << YAML::Value << YAML::DoubleQuoted << to_string(cert.v_safe[q]);
    out << YAML::Key << "v_live" << YAML::Value << YAML::DoubleQuoted << to_string(cert.v_live[q]);
    out << YAML::Key << "invariant" << YAML::Value << YAML::BeginSeq;
    for (const auto& p : cert.invariant[q]) out << YAML::DoubleQuoted << to_string(p);
    out << YAML::EndSeq;
    if (cert.controller) {
      out << YAML::Key << "controller" << YAML::Value << YAML::BeginMap;
      for (std::size_t k = 0; k < model.input.size(); ++k)
        out << YAML::Key << symbol_name(model.input[k].var) << YAML::Value << YAML::DoubleQuoted
            << to_string(cert.controller->at(q).at(k));
      out << YAML::EndMap;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  std::vector<std::string> choices;
  for (const auto& [key, target] : cert.assignment.choice)
    if (key.first < a.size() && a.successors(key.first, key.second).size() > 1)
      choices.push_back(a.states[key.first] + " --" + letter_text(a, key.second) + "--> " + a.states[target]);
  if (!choices.empty()) {
    out << YAML::Key << "assignment" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : choices) out << s;
    out << YAML::EndSeq;
  }
  out << YAML::Key << "certified_probability" << YAML::Value << YAML::DoubleQuoted
      << to_string(cert.certified_probability);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

namespace {

[[noreturn]] void fail_at(const YAML::Node& node, const std::string& what) {
  auto mark = node.Mark();
  throw ParseError(what, mark.line + 1, mark.column + 1);
}

std::string scalar_at(const YAML::Node& node, const std::string& what) {
  if (!node || !node.IsScalar()) fail_at(node, "expected a scalar for " + what);
  return node.Scalar();
}

Rational exact_at(const YAML::Node& node, const std::string& what) {
  try {
    return parse_rational(scalar_at(node, what), false);
  } catch (const ParseError& e) {
    fail_at(node, std::string(e.what()) + " (" + what + ")");
  }
}

Poly exact_poly_at(const YAML::Node& node, const SymbolResolver& resolve, const std::string& what) {
  auto text = scalar_at(node, what);
  try {
    return parse_poly(text, resolve, false);
  } catch (const ParseError& e) {
    fail_at(node, std::string(e.what()) + " (" + what + ")");
  }
}

std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

} // namespace

CertificateSolution load_certificate(std::string_view text, const SdsModel& model, const Ldba& automaton) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  if (!root.IsMap()) throw ParseError("certificate must be a mapping", 1, 1);
  Ldba a = automaton.completed();
  CertificateSolution cert;
  cert.state_names = a.states;
  auto resolve = resolver_for(model.state);

  auto constants = root["constants"];
  if (!constants || !constants.IsMap()) fail_at(root, "missing 'constants' section");
  auto slots = constant_slots(cert);
  for (std::size_t i = 0; i < slots.size(); ++i) {
    auto node = constants[kConstantNames[i]];
    if (!node) fail_at(constants, std::string("missing constant '") + kConstantNames[i] + "'");
    *slots[i] = exact_at(node, kConstantNames[i]);
  }
  for (const auto& kv : constants) {
    auto key = kv.first.Scalar();
    if (std::find(std::begin(kConstantNames), std::end(kConstantNames), key) == std::end(kConstantNames))
      fail_at(kv.first, "unknown constant '" + key + "'");
  }

  auto states = root["states"];
  if (!states || !states.IsMap()) fail_at(root, "missing 'states' section");
  for (const auto& kv : states)
    if (!a.find(kv.first.Scalar())) throw ConfigError("certificate names state '" + kv.first.Scalar() +
                                                      "' which the automaton does not have");
  bool any_controller = false;
  cert.v_safe.resize(a.size());
  cert.v_live.resize(a.size());
  cert.invariant.resize(a.size());
  std::vector<std::vector<Poly>> controller(a.size());
  for (StateId q = 0; q < a.size(); ++q) {
    const auto& name = a.states[q];
    auto node = states[name];
    if (!node) throw ConfigError("certificate has no entry for automaton state '" + name + "'");
    if (!node.IsMap()) fail_at(node, "state entry must be a mapping");
    cert.v_safe[q] = exact_poly_at(node["v_safe"], resolve, name + ".v_safe");
    cert.v_live[q] = exact_poly_at(node["v_live"], resolve, name + ".v_live");
    auto inv = node["invariant"];
    if (!inv) fail_at(node, "missing 'invariant' for state '" + name + "'");
    if (inv.IsScalar()) {
      cert.invariant[q].push_back(exact_poly_at(inv, resolve, name + ".invariant"));
    } else {
      if (!inv.IsSequence() || inv.size() == 0) fail_at(inv, "invariant must be a non-empty list");
      for (const auto& p : inv) cert.invariant[q].push_back(exact_poly_at(p, resolve, name + ".invariant"));
    }
    if (auto law = node["controller"]) {
      any_controller = true;
      if (!law.IsMap()) fail_at(law, "controller must map each input to a polynomial");
      for (const auto& b : model.input) {
        auto p = law[symbol_name(b.var)];
        if (!p) fail_at(law, "controller has no law for input '" + symbol_name(b.var) + "'");
        controller[q].push_back(exact_poly_at(p, resolve, name + ".controller"));
      }
    }
  }
  if (any_controller) {
    for (StateId q = 0; q < a.size(); ++q)
      if (controller[q].size() != model.input.size())
        throw ConfigError("controller given for some automaton states but not for '" + a.states[q] + "'");
    cert.controller = std::move(controller);
  }

  // Nondeterministic choices default to the smallest-order successor.
  for (StateId q = 0; q < a.size(); ++q)
    for (Letter l = 0; l < a.letter_count(); ++l) cert.assignment.choice[{q, l}] = *a.successors(q, l).begin();
  if (auto list = root["assignment"]) {
    if (!list.IsSequence()) fail_at(list, "assignment must be a list of 'q --letter--> q2' entries");
    for (const auto& item : list) {
      auto s = scalar_at(item, "assignment entry");
      auto arrow = s.find("--");
      auto close = s.find("-->", arrow == std::string::npos ? 0 : arrow + 2);
      if (arrow == std::string::npos || close == std::string::npos)
        fail_at(item, "assignment entries have the form 'q --letter--> q2'");
      auto from = a.find(trim(s.substr(0, arrow)));
      auto to = a.find(trim(s.substr(close + 3)));
      if (!from || !to) fail_at(item, "unknown state in assignment entry");
      auto label = trim(s.substr(arrow + 2, close - arrow - 2));
      Letter letter = 0;
      if (label != "~") {
        std::stringstream ss(label);
        std::string atom;
        while (std::getline(ss, atom, ',')) {
          atom = trim(atom);
          auto it = std::find(a.atoms.begin(), a.atoms.end(), atom);
          if (it == a.atoms.end()) fail_at(item, "unknown atom '" + atom + "'");
          letter |= Letter{1} << (it - a.atoms.begin());
        }
      }
      if (!a.successors(*from, letter).count(*to))
        fail_at(item, "'" + s + "' is not a transition of the automaton");
      cert.assignment.choice[{*from, letter}] = *to;
    }
  }

  if (auto p = root["certified_probability"]) {
    cert.certified_probability = exact_at(p, "certified_probability");
  } else {
    try {
      cert.certified_probability = probability_bound(cert.eta_s, cert.eps_s, cert.m_s).lower;
    } catch (const DomainError&) {
      cert.certified_probability = 0;
    }
  }
  return cert;
}

CertificateSolution load_certificate_file(const std::filesystem::path& path, const SdsModel& model,
                                          const Ldba& automaton) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open certificate file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return load_certificate(ss.str(), model, automaton);
}

// ---------------------------------------------------------------------------
// Checking

namespace {

struct Conclusion {
  std::string name;
  Poly poly;  // >= 0 required
};

/// forall state (and noise, where a conclusion mentions it) in region:
/// every conclusion holds.
struct Obligation {
  std::vector<Atom> region;  // over state only, strict relations kept
  std::vector<Conclusion> conclusions;
};

bool affine(const Poly& p) { return p.degree() <= 1; }

class Checker {
public:
  Checker(const SdsModel& model, const CheckOptions& opts) : model_(model), opts_(opts) {
    slots_ = model.state;
    slots_.insert(slots_.end(), model.noise.begin(), model.noise.end());
  }

  struct Outcome {
    std::optional<Witness> witness;
    bool exact = true;
    std::size_t samples = 0;
  };

  /// False when an affine region has no point; non-affine regions are
  /// assumed inhabited.
  bool inhabited(const std::vector<Atom>& region) const {
    for (const auto& at : region)
      if (!affine(at.poly)) return true;
    return find_strict_point(region, Poly(1), model_.state).has_value();
  }

  Outcome falsify(const Obligation& ob) {
    ++index_;
    bool linear = true;
    for (const auto& at : ob.region) linear = linear && affine(at.poly);
    for (const auto& c : ob.conclusions) linear = linear && affine(c.poly);
    return linear ? exact(ob) : sampled(ob);
  }

private:
  std::vector<Atom> noise_box(const Poly& p) const {
    std::vector<Atom> out;
    for (std::size_t i = 0; i < model_.noise.size(); ++i) {
      if (!p.degree_in(model_.noise[i])) continue;
      if (auto box = model_.noise_spec.support(i)) {
        out.push_back({Poly::var(model_.noise[i]) - Poly(box->lo), Rel::Ge});
        out.push_back({Poly(box->hi) - Poly::var(model_.noise[i]), Rel::Ge});
      }
    }
    return out;
  }

  Outcome exact(const Obligation& ob) const {
    Outcome out;
    for (const auto& c : ob.conclusions) {
      auto region = ob.region;
      auto box = noise_box(c.poly);
      region.insert(region.end(), box.begin(), box.end());
      if (auto pt = find_strict_point(region, -c.poly, slots_)) {
        std::map<Symbol, Rational> point;
        for (Symbol s : slots_) {
          bool used = std::find(model_.state.begin(), model_.state.end(), s) != model_.state.end() ||
                      c.poly.degree_in(s) > 0;
          if (used) point[s] = (*pt)[s];
        }
        out.witness = Witness{point, c.name + ": " + to_string(c.poly) + " >= 0", c.poly.eval(point)};
        return out;
      }
    }
    return out;
  }

  Outcome sampled(const Obligation& ob) {
    Outcome out;
    out.exact = false;
    if (!opts_.box) throw ConfigError("certificate conditions are not affine; the sampling check needs a bounding box");
    const auto& user = *opts_.box;
    const std::size_t n = model_.state.size();
    if (user.size() != n) throw ConfigError("bounding box must give one interval per state variable");

    std::vector<Interval> box = user;
    auto implied = implied_box(SemiAlgebraicSet{ob.region}, model_.state);
    for (std::size_t i = 0; i < n; ++i) {
      if (!implied[i]) continue;
      if (implied[i]->lo > box[i].lo) box[i].lo = implied[i]->lo;
      if (implied[i]->hi < box[i].hi) box[i].hi = implied[i]->hi;
      if (box[i].lo > box[i].hi) return out;
    }

    // Noise samples: support corners plus random interior points.
    std::vector<std::size_t> noisy;
    for (std::size_t i = 0; i < model_.noise.size(); ++i)
      for (const auto& c : ob.conclusions)
        if (c.poly.degree_in(model_.noise[i])) {
          noisy.push_back(i);
          break;
        }
    auto g = stream_engine(opts_.seed, index_);
    std::vector<std::vector<Rational>> noise_points;
    {
      std::vector<Interval> support;
      for (std::size_t i : noisy) {
        auto s = model_.noise_spec.support(i);
        if (!s) throw ConfigError("noise '" + symbol_name(model_.noise[i]) + "' has no bounded support to sample");
        support.push_back(*s);
      }
      for (std::size_t mask = 0; mask < (std::size_t{1} << noisy.size()); ++mask) {
        std::vector<Rational> w;
        for (std::size_t k = 0; k < noisy.size(); ++k) w.push_back((mask >> k) & 1u ? support[k].hi : support[k].lo);
        noise_points.push_back(std::move(w));
      }
      for (std::size_t r = 0; r < opts_.noise_samples && !noisy.empty(); ++r) {
        std::vector<Rational> w;
        for (const auto& s : support) w.push_back(uniform_rational(g, s.lo, s.hi));
        noise_points.push_back(std::move(w));
      }
    }

    std::vector<CompiledPoly> region_fast, concl_fast;
    for (const auto& at : ob.region) region_fast.emplace_back(at.poly, slots_);
    for (const auto& c : ob.conclusions) concl_fast.emplace_back(c.poly, slots_);
    std::vector<bool> concl_noisy;
    for (const auto& c : ob.conclusions) concl_noisy.push_back(c.poly.mentions([&](Symbol s) {
      return std::find(model_.noise.begin(), model_.noise.end(), s) != model_.noise.end();
    }));

    constexpr double kSlack = 1e-9;
    std::vector<double> values(slots_.size(), 0.0);
    std::map<Symbol, Rational> point;

    auto try_point = [&](const std::vector<Rational>& x) -> bool {
      for (std::size_t i = 0; i < n; ++i) values[i] = to_double(x[i]);
      for (std::size_t k = 0; k < ob.region.size(); ++k) {
        double v = region_fast[k](values);
        bool ok = ob.region[k].rel == Rel::Eq ? std::abs(v) <= kSlack
                  : ob.region[k].rel == Rel::Le || ob.region[k].rel == Rel::Lt ? v <= kSlack
                                                                              : v >= -kSlack;
        if (!ok) return false;
      }
      ++out.samples;
      for (std::size_t c = 0; c < ob.conclusions.size(); ++c) {
        std::size_t rounds = concl_noisy[c] ? noise_points.size() : 1;
        for (std::size_t r = 0; r < rounds; ++r) {
          if (concl_noisy[c])
            for (std::size_t k = 0; k < noisy.size(); ++k) values[n + noisy[k]] = to_double(noise_points[r][k]);
          if (concl_fast[c](values) >= kSlack) continue;
          // Confirm exactly.
          point.clear();
          for (std::size_t i = 0; i < n; ++i) point[model_.state[i]] = x[i];
          bool inside = true;
          for (const auto& at : ob.region) inside = inside && at.holds(point);
          if (!inside) return false;
          if (concl_noisy[c])
            for (std::size_t k = 0; k < noisy.size(); ++k) point[model_.noise[noisy[k]]] = noise_points[r][k];
          Rational v = ob.conclusions[c].poly.eval(point);
          if (v < 0) {
            out.witness = Witness{point, ob.conclusions[c].name + ": " + to_string(ob.conclusions[c].poly) + " >= 0", v};
            return true;
          }
        }
      }
      return false;
    };

    // Grid first, then uniform random points.
    std::size_t per_dim = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(opts_.grid), 1.0 / std::max<std::size_t>(n, 1)))));
    std::vector<std::size_t> digit(n, 0);
    std::vector<Rational> x(n);
    for (bool more = n > 0; more;) {
      for (std::size_t i = 0; i < n; ++i)
        x[i] = box[i].lo + (box[i].hi - box[i].lo) * Rational(static_cast<long>(digit[i]), static_cast<long>(per_dim - 1));
      if (try_point(x)) return out;
      more = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (++digit[i] < per_dim) {
          more = true;
          break;
        }
        digit[i] = 0;
      }
    }
    for (std::size_t s = 0; s < opts_.samples; ++s) {
      for (std::size_t i = 0; i < n; ++i) x[i] = uniform_rational(g, box[i].lo, box[i].hi);
      if (try_point(x)) return out;
    }
    return out;
  }

  const SdsModel& model_;
  const CheckOptions& opts_;
  std::vector<Symbol> slots_;
  std::uint64_t index_ = 0;
};

/// Regions of first-match piece i: its guard and, for every earlier piece,
/// one conjunct of that piece's guard failing.
std::vector<std::vector<Atom>> first_match_regions(const SdsModel& model, std::size_t piece) {
  std::vector<std::vector<Atom>> out{model.dynamics[piece].guard.conjuncts};
  for (std::size_t j = 0; j < piece; ++j) {
    std::vector<Atom> alternatives;
    for (const auto& at : model.dynamics[j].guard.conjuncts) {
      if (at.rel == Rel::Eq) {
        alternatives.push_back({at.poly, Rel::Gt});
        alternatives.push_back({at.poly, Rel::Lt});
      } else {
        alternatives.push_back({at.poly, negate(at.rel)});
      }
    }
    std::vector<std::vector<Atom>> next;
    for (const auto& r : out)
      for (const auto& alt : alternatives) {
        auto grown = r;
        grown.push_back(alt);
        next.push_back(std::move(grown));
      }
    out = std::move(next);
  }
  return out;
}

std::string cell_label(const Ldba& a, Letter l) {
  auto name = a.letter_name(l);
  return "cell{" + (name == "~" ? std::string() : name) + "}";
}

std::string point_text(const std::map<Symbol, Rational>& point) {
  std::string out;
  for (const auto& [s, v] : point) out += (out.empty() ? "" : ", ") + symbol_name(s) + " = " + to_string(v);
  return out.empty() ? "-" : out;
}

} // namespace

std::size_t CheckReport::failures() const {
  std::size_t n = 0;
  for (const auto& r : results) n += r.passed() ? 0 : 1;
  return n;
}

std::string CheckReport::render(const SdsModel&, const Ldba& automaton) const {
  std::ostringstream out;
  for (const auto& r : results) {
    out << (r.passed() ? "PASS " : "FAIL ") << r.label;
    if (r.successor) out << " / q'=" << automaton.completed().states.at(*r.successor);
    out << (r.exact ? "  [exact]" : "  [sampled " + std::to_string(r.samples) + "]") << "\n";
    if (r.witness) {
      out << "     violated: " << r.witness->inequality << "\n";
      out << "     at " << point_text(r.witness->point) << ", value " << to_string(r.witness->value) << " ("
          << to_double(r.witness->value) << ")\n";
    }
  }
  out << "verdict: " << (pass ? "pass" : "fail") << " (" << results.size() << " conditions, " << failures()
      << " failed)\n";
  if (bound) out << "certified probability >= " << bound->decimal << "\n";
  return out.str();
}

CheckReport check(const SdsModel& model, const Ldba& automaton, const CertificateSolution& cert,
                  const CheckOptions& opts) {
  const Ldba a = automaton.completed();
  if (cert.v_safe.size() != a.size() || cert.v_live.size() != a.size() || cert.invariant.size() != a.size())
    throw ConfigError("certificate has " + std::to_string(cert.v_safe.size()) + " states, automaton has " +
                      std::to_string(a.size()));
  if (cert.controller && cert.controller->size() != a.size())
    throw ConfigError("controller does not cover every automaton state");
  if (!model.input.empty() && !cert.controller && !model.controller)
    throw ConfigError("model has inputs but neither the model nor the certificate gives a controller");

  CheckReport report;
  auto add = [&](ConditionResult r) {
    report.pass = report.pass && r.passed();
    report.results.push_back(std::move(r));
  };

  // Constant signs.
  {
    struct Req {
      const char* text;
      const Rational& value;
      bool ok;
    };
    const Req reqs[] = {
        {"eta_S <= 0", cert.eta_s, cert.eta_s <= 0}, {"eps_S > 0", cert.eps_s, cert.eps_s > 0},
        {"M_S > 0", cert.m_s, cert.m_s > 0},         {"eps_L > 0", cert.eps_l, cert.eps_l > 0},
        {"M_L > 0", cert.m_l, cert.m_l > 0},
    };
    for (const auto& r : reqs) {
      ConditionResult res{std::string("constants / ") + r.text, 'k', true, 0, std::nullopt, std::nullopt};
      if (!r.ok) res.witness = Witness{{}, r.text, r.value};
      add(std::move(res));
    }
    if (report.pass) {
      report.bound = probability_bound(cert.eta_s, cert.eps_s, cert.m_s);
      ConditionResult res{"constants / certified_probability <= bound", 'k', true, 0, std::nullopt, std::nullopt};
      if (cert.certified_probability > report.bound->lower)
        res.witness = Witness{{}, "certified_probability <= 1 - exp(8 eta_S eps_S / M_S^2)",
                              cert.certified_probability - report.bound->lower};
      add(std::move(res));
    }
  }

  Checker checker(model, opts);
  const auto rejecting = rejecting_states(a);
  const auto atoms = atom_predicates(a, model);
  const auto cells = letter_cells(atoms, std::max<std::size_t>(atoms.size(), kDefaultMaxPredicates));

  auto invariant = [&](StateId q) {
    std::vector<Atom> out;
    for (const auto& p : cert.invariant[q]) out.push_back({p, Rel::Ge});
    return out;
  };
  auto stochastic_invariant = [&](StateId q) {
    auto out = invariant(q);
    out.push_back({cert.v_safe[q], Rel::Le});
    return out;
  };
  auto run = [&](std::string label, char cond, const Obligation& ob) {
    auto o = checker.falsify(ob);
    ConditionResult r{std::move(label), cond, o.exact, o.samples, std::nullopt, std::move(o.witness)};
    add(std::move(r));
  };

  const StateId qi = a.initial;
  {
    Obligation ob{model.init.conjuncts, {}};
    for (std::size_t j = 0; j < cert.invariant[qi].size(); ++j)
      ob.conclusions.push_back({"invariant " + std::to_string(j + 1), cert.invariant[qi][j]});
    run("cond-a / " + a.states[qi], 'a', ob);
    run("cond-b / " + a.states[qi], 'b',
        {model.init.conjuncts, {{"initial level", Poly(cert.eta_s) - cert.v_safe[qi]}}});
  }
  for (StateId q : rejecting) run("cond-c / " + a.states[q], 'c', {invariant(q), {{"rejecting level", cert.v_safe[q]}}});
  for (StateId q = 0; q < a.size(); ++q)
    run("cond-d / " + a.states[q], 'd', {stochastic_invariant(q), {{"liveness non-negative", cert.v_live[q]}}});

  auto control_of = [&](StateId q) -> std::map<Symbol, Poly> {
    std::map<Symbol, Poly> m;
    for (std::size_t k = 0; k < model.input.size(); ++k)
      m[model.input[k].var] = cert.controller ? cert.controller->at(q).at(k) : model.controller->at(k);
    return m;
  };

  for (StateId q = 0; q < a.size(); ++q) {
    if (rejecting.count(q)) continue;
    const bool accepting = a.accepting.count(q) > 0;
    const char cond = accepting ? 'f' : 'e';
    const auto u = control_of(q);
    for (std::size_t piece = 0; piece < model.dynamics.size(); ++piece) {
      std::map<Symbol, Poly> step;
      for (std::size_t i = 0; i < model.state.size(); ++i) {
        const auto& body = model.dynamics[piece].body[i];
        step[model.state[i]] = u.empty() ? body : body.substitute(u);
      }
      auto regions = first_match_regions(model, piece);
      for (std::size_t ri = 0; ri < regions.size(); ++ri) {
        for (const auto& cell : cells) {
          Obligation base{stochastic_invariant(q), {}};
          base.region.insert(base.region.end(), cell.region.conjuncts.begin(), cell.region.conjuncts.end());
          base.region.insert(base.region.end(), regions[ri].begin(), regions[ri].end());
          if (!checker.inhabited(base.region)) continue;

          std::string label = std::string("cond-") + cond + " / " + a.states[q] + " / " + cell_label(a, cell.letter) +
                              " / piece-" + std::to_string(piece + 1) +
                              (regions.size() > 1 ? "." + std::to_string(ri + 1) : "");
          std::vector<StateId> order{cert.assignment.at(q, cell.letter)};
          for (StateId t : a.successors(q, cell.letter))
            if (t != order.front()) order.push_back(t);

          std::optional<ConditionResult> first_failure;
          bool done = false;
          for (StateId t : order) {
            Obligation ob = base;
            for (std::size_t j = 0; j < cert.invariant[t].size(); ++j)
              ob.conclusions.push_back({"invariant closure " + std::to_string(j + 1), cert.invariant[t][j].substitute(step)});
            Poly v_next = cert.v_safe[t].substitute(step);
            Poly diff = cert.v_safe[q] - v_next;
            ob.conclusions.push_back({"expected decrease",
                                      cert.v_safe[q] - expect_over_noise(v_next, model.noise, model.noise_spec) -
                                          Poly(cert.eps_s)});
            ob.conclusions.push_back({"bounded difference (lower)", diff - Poly(cert.beta_s)});
            ob.conclusions.push_back({"bounded difference (upper)", Poly(cert.beta_s + cert.m_s) - diff});
            Poly live_next = expect_over_noise(cert.v_live[t].substitute(step), model.noise, model.noise_spec);
            if (accepting)
              ob.conclusions.push_back({"liveness bounded increase", cert.v_live[q] + Poly(cert.m_l) - live_next});
            else
              ob.conclusions.push_back({"liveness decrease", cert.v_live[q] - live_next - Poly(cert.eps_l)});

            auto o = checker.falsify(ob);
            ConditionResult r{label, cond, o.exact, o.samples, t, std::move(o.witness)};
            if (r.passed()) {
              add(std::move(r));
              done = true;
              break;
            }
            if (!first_failure) first_failure = std::move(r);
          }
          if (!done) add(std::move(*first_failure));
        }
      }
    }
  }

  if (cert.controller) {
    for (StateId q = 0; q < a.size(); ++q) {
      Obligation ob{stochastic_invariant(q), {}};
      for (std::size_t k = 0; k < model.input.size(); ++k) {
        const auto& law = cert.controller->at(q).at(k);
        const auto& b = model.input[k];
        ob.conclusions.push_back({"input " + symbol_name(b.var) + " >= lower", law - Poly(b.box.lo)});
        ob.conclusions.push_back({"input " + symbol_name(b.var) + " <= upper", Poly(b.box.hi) - law});
      }
      run("control / " + a.states[q], 'u', ob);
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Policy

StateId AutomatonPolicy::next(StateId q, Letter a, bool in_si) const {
  const auto& table = in_si && !rejecting.count(q) ? inside : fallback;
  auto it = table.find({q, a});
  if (it == table.end()) throw ConfigError("policy has no entry for this (state, letter)");
  return it->second;
}

AutomatonPolicy extract_policy(const CertificateSolution& cert, const Ldba& automaton) {
  Ldba a = automaton.completed();
  AutomatonPolicy p;
  p.rejecting = rejecting_states(a);
  for (StateId q = 0; q < a.size(); ++q)
    for (Letter l = 0; l < a.letter_count(); ++l) {
      StateId smallest = *a.successors(q, l).begin();
      p.fallback[{q, l}] = smallest;
      auto it = cert.assignment.choice.find({q, l});
      p.inside[{q, l}] = it == cert.assignment.choice.end() ? smallest : it->second;
    }
  return p;
}

} // namespace ldbsm
