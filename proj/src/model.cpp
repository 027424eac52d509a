// SPDX-License-Identifier: Apache-2.0
#include "ldbsm/model.hpp"

#include "ldbsm/error.hpp"
#include "ldbsm/random.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace ldbsm {

bool SemiAlgebraicSet::contains(const std::map<Symbol, Rational>& point) const {
  for (const auto& a : conjuncts)
    if (!a.holds(point)) return false;
  return true;
}

std::vector<Atom> SemiAlgebraicSet::relaxed() const {
  std::vector<Atom> out;
  out.reserve(conjuncts.size());
  for (const auto& a : conjuncts) out.push_back(a.relaxed_ge());
  return out;
}

std::vector<Symbol> SdsModel::input_vars() const {
  std::vector<Symbol> out;
  for (const auto& b : input) out.push_back(b.var);
  return out;
}

SemiAlgebraicSet SdsModel::input_space() const {
  SemiAlgebraicSet s;
  for (const auto& b : input) {
    s.conjuncts.push_back({Poly::var(b.var) - Poly(b.box.lo), Rel::Ge});
    s.conjuncts.push_back({Poly(b.box.hi) - Poly::var(b.var), Rel::Ge});
  }
  return s;
}

const Predicate* SdsModel::predicate(std::string_view name) const {
  for (const auto& p : predicates)
    if (p.name == name) return &p;
  return nullptr;
}

std::optional<std::size_t> SdsModel::piece_at(const std::map<Symbol, Rational>& x) const {
  for (std::size_t i = 0; i < dynamics.size(); ++i)
    if (dynamics[i].guard.contains(x)) return i;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Loading

namespace {

[[noreturn]] void fail_at(const YAML::Node& node, const std::string& what) {
  auto mark = node.Mark();
  throw ParseError(what, mark.line + 1, mark.column + 1);
}

std::string scalar(const YAML::Node& node, const std::string& what) {
  if (!node || !node.IsScalar()) fail_at(node, "expected a scalar for " + what);
  return node.Scalar();
}

Rational rational_at(const YAML::Node& node, const std::string& what) {
  auto text = scalar(node, what);
  try {
    return parse_rational(text, true);
  } catch (const ParseError& e) {
    fail_at(node, std::string(e.what()) + " (" + what + ")");
  }
}

Poly poly_at(const YAML::Node& node, const SymbolResolver& resolve, const std::string& what) {
  auto text = scalar(node, what);
  try {
    return parse_poly(text, resolve, true);
  } catch (const ParseError& e) {
    auto mark = node.Mark();
    throw ParseError(std::string(e.what()) + " (" + what + ")", mark.line + 1,
                     mark.column + std::max(e.column(), 1));
  }
}

Atom atom_at(const YAML::Node& node, const SymbolResolver& resolve, const std::string& what) {
  auto text = scalar(node, what);
  try {
    return parse_atom(text, resolve, true);
  } catch (const ParseError& e) {
    auto mark = node.Mark();
    throw ParseError(std::string(e.what()) + " (" + what + ")", mark.line + 1,
                     mark.column + std::max(e.column(), 1));
  }
}

SemiAlgebraicSet set_at(const YAML::Node& node, const SymbolResolver& resolve, const std::string& what) {
  SemiAlgebraicSet s;
  if (!node) return s;
  if (node.IsScalar()) {
    auto text = node.Scalar();
    if (text == "true" || text == "all" || text == "otherwise") return s;
    s.conjuncts.push_back(atom_at(node, resolve, what));
    return s;
  }
  if (!node.IsSequence()) fail_at(node, "expected a constraint or list of constraints for " + what);
  for (const auto& c : node) s.conjuncts.push_back(atom_at(c, resolve, what));
  return s;
}

Interval interval_at(const YAML::Node& node, const std::string& what) {
  if (!node.IsSequence() || node.size() != 2) fail_at(node, "expected [lo, hi] for " + what);
  return {rational_at(node[0], what), rational_at(node[1], what)};
}

std::string identifier_at(const YAML::Node& node, const std::string& what) {
  auto name = scalar(node, what);
  bool ok = !name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_');
  for (char c : name) ok = ok && (std::isalnum(static_cast<unsigned char>(c)) || c == '_');
  if (!ok) fail_at(node, "invalid identifier '" + name + "' for " + what);
  return name;
}

NoiseDim noise_dim_at(const YAML::Node& node, const std::string& name) {
  NoiseDim d;
  auto what = "noise '" + name + "'";
  if (node["uniform"]) {
    auto iv = interval_at(node["uniform"], what);
    d.family = Uniform{iv.lo, iv.hi};
  } else if (node["point"]) {
    d.family = PointMass{rational_at(node["point"], what)};
  } else if (node["moments"]) {
    const auto& ms = node["moments"];
    if (!ms.IsSequence()) fail_at(ms, "expected a list of raw moments for " + what);
    ExplicitMoments e;
    for (const auto& m : ms) e.moments.push_back(rational_at(m, what));
    d.family = std::move(e);
  } else {
    fail_at(node, what + " needs one of: uniform, point, moments");
  }
  if (node["support"]) d.support = interval_at(node["support"], what);
  return d;
}

void require_only(const Poly& p, const std::set<Symbol>& allowed, const YAML::Node& node,
                  const std::string& what) {
  for (Symbol s : p.symbols())
    if (!allowed.count(s)) fail_at(node, "'" + symbol_name(s) + "' is not allowed in " + what);
}

void require_only(const SemiAlgebraicSet& set, const std::set<Symbol>& allowed,
                  const YAML::Node& node, const std::string& what) {
  for (const auto& a : set.conjuncts) require_only(a.poly, allowed, node, what);
}

} // namespace

SdsModel load_model(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  if (!root.IsMap()) throw ParseError("model document must be a mapping", 1, 1);

  SdsModel m;
  std::set<std::string> names;
  auto declare = [&](const YAML::Node& node, SymbolKind kind, const std::string& what) {
    auto name = identifier_at(node, what);
    if (!names.insert(name).second) fail_at(node, "duplicate variable '" + name + "'");
    try {
      return intern(name, kind);
    } catch (const ModelError& e) {
      fail_at(node, e.what());
    }
  };

  const auto& state = root["state"];
  if (!state || !state.IsSequence() || state.size() == 0)
    throw ParseError("model needs a non-empty 'state' list", 1, 1);
  for (const auto& s : state) m.state.push_back(declare(s, SymbolKind::State, "state variable"));

  if (const auto& input = root["input"]; input && !input.IsNull()) {
    if (!input.IsMap()) fail_at(input, "'input' must map input variables to [lo, hi]");
    for (const auto& kv : input) {
      Symbol u = declare(kv.first, SymbolKind::Input, "input variable");
      auto box = interval_at(kv.second, "input '" + symbol_name(u) + "'");
      if (box.lo > box.hi)
        fail_at(kv.second, "input space for '" + symbol_name(u) + "' is empty ([" + to_string(box.lo) +
                               ", " + to_string(box.hi) + "])");
      m.input.push_back({u, box});
    }
  }

  if (const auto& noise = root["noise"]; noise && !noise.IsNull()) {
    if (!noise.IsMap()) fail_at(noise, "'noise' must map noise variables to distributions");
    std::vector<NoiseDim> dims;
    for (const auto& kv : noise) {
      Symbol w = declare(kv.first, SymbolKind::Noise, "noise variable");
      m.noise.push_back(w);
      dims.push_back(noise_dim_at(kv.second, symbol_name(w)));
    }
    try {
      m.noise_spec = NoiseSpec(std::move(dims));
    } catch (const ModelError& e) {
      fail_at(noise, e.what());
    }
  }

  std::set<Symbol> state_set(m.state.begin(), m.state.end());
  std::set<Symbol> dyn_set = state_set;
  for (const auto& b : m.input) dyn_set.insert(b.var);
  dyn_set.insert(m.noise.begin(), m.noise.end());
  std::vector<Symbol> all(dyn_set.begin(), dyn_set.end());
  auto resolve = resolver_for(all);

  if (const auto& dyn = root["dynamics"]; dyn && !dyn.IsNull()) {
    if (!dyn.IsSequence()) fail_at(dyn, "'dynamics' must be a list of pieces");
    for (const auto& piece : dyn) {
      DynamicsPiece p;
      p.guard = set_at(piece["guard"], resolve, "guard");
      require_only(p.guard, state_set, piece["guard"], "a guard (state variables only)");
      const auto& body = piece["body"];
      if (!body || !body.IsMap()) fail_at(piece, "piece needs a 'body' mapping state variables to updates");
      p.body.resize(m.state.size());
      std::vector<bool> seen(m.state.size(), false);
      for (const auto& kv : body) {
        auto name = scalar(kv.first, "body key");
        std::size_t idx = m.state.size();
        for (std::size_t i = 0; i < m.state.size(); ++i)
          if (symbol_name(m.state[i]) == name) idx = i;
        if (idx == m.state.size()) fail_at(kv.first, "'" + name + "' is not a state variable");
        if (seen[idx]) fail_at(kv.first, "duplicate update for '" + name + "'");
        seen[idx] = true;
        p.body[idx] = poly_at(kv.second, resolve, "update of '" + name + "'");
      }
      for (std::size_t i = 0; i < m.state.size(); ++i)
        if (!seen[i])
          fail_at(body, "dimension mismatch: no update for state '" + symbol_name(m.state[i]) + "'");
      m.dynamics.push_back(std::move(p));
    }
  }
  if (m.dynamics.empty()) {
    DynamicsPiece identity;
    for (Symbol s : m.state) identity.body.push_back(Poly::var(s));
    m.dynamics.push_back(std::move(identity));
  }

  m.init = set_at(root["init"], resolve, "init");
  require_only(m.init, state_set, root["init"], "init (state variables only)");

  if (const auto& preds = root["predicates"]; preds && !preds.IsNull()) {
    if (!preds.IsMap()) fail_at(preds, "'predicates' must map names to expressions");
    for (const auto& kv : preds) {
      auto name = identifier_at(kv.first, "predicate name");
      if (m.predicate(name)) fail_at(kv.first, "duplicate predicate '" + name + "'");
      Poly e = poly_at(kv.second, resolve, "predicate '" + name + "'");
      require_only(e, state_set, kv.second, "a predicate (state variables only)");
      m.predicates.push_back({name, std::move(e)});
    }
  }

  if (const auto& ctl = root["controller"]; ctl && !ctl.IsNull()) {
    if (!ctl.IsMap()) fail_at(ctl, "'controller' must map input variables to polynomials");
    std::vector<Poly> law(m.input.size());
    std::vector<bool> seen(m.input.size(), false);
    for (const auto& kv : ctl) {
      auto name = scalar(kv.first, "controller key");
      std::size_t idx = m.input.size();
      for (std::size_t i = 0; i < m.input.size(); ++i)
        if (symbol_name(m.input[i].var) == name) idx = i;
      if (idx == m.input.size()) fail_at(kv.first, "'" + name + "' is not an input variable");
      law[idx] = poly_at(kv.second, resolve, "controller for '" + name + "'");
      require_only(law[idx], state_set, kv.second, "a controller (state variables only)");
      seen[idx] = true;
    }
    for (std::size_t i = 0; i < m.input.size(); ++i)
      if (!seen[i]) fail_at(ctl, "controller has no law for input '" + symbol_name(m.input[i].var) + "'");
    m.controller = std::move(law);
  }
  return m;
}

SdsModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return load_model(ss.str());
}

namespace {

void emit_set(YAML::Emitter& out, const SemiAlgebraicSet& s) {
  out << YAML::Flow << YAML::BeginSeq;
  for (const auto& a : s.conjuncts) out << to_string(a);
  out << YAML::EndSeq;
}

} // namespace

std::string render_model(const SdsModel& m) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "state" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (Symbol s : m.state) out << symbol_name(s);
  out << YAML::EndSeq;
  if (!m.input.empty()) {
    out << YAML::Key << "input" << YAML::Value << YAML::BeginMap;
    for (const auto& b : m.input)
      out << YAML::Key << symbol_name(b.var) << YAML::Value << YAML::Flow << YAML::BeginSeq
          << to_string(b.box.lo) << to_string(b.box.hi) << YAML::EndSeq;
    out << YAML::EndMap;
  }
  if (!m.noise.empty()) {
    out << YAML::Key << "noise" << YAML::Value << YAML::BeginMap;
    for (std::size_t i = 0; i < m.noise.size(); ++i) {
      const auto& d = m.noise_spec.dim(i);
      out << YAML::Key << symbol_name(m.noise[i]) << YAML::Value << YAML::Flow << YAML::BeginMap;
      if (auto* u = std::get_if<Uniform>(&d.family)) {
        out << YAML::Key << "uniform" << YAML::Value << YAML::Flow << YAML::BeginSeq << to_string(u->lo)
            << to_string(u->hi) << YAML::EndSeq;
      } else if (auto* p = std::get_if<PointMass>(&d.family)) {
        out << YAML::Key << "point" << YAML::Value << to_string(p->value);
      } else {
        out << YAML::Key << "moments" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (const auto& q : std::get<ExplicitMoments>(d.family).moments) out << to_string(q);
        out << YAML::EndSeq;
      }
      if (d.support)
        out << YAML::Key << "support" << YAML::Value << YAML::Flow << YAML::BeginSeq
            << to_string(d.support->lo) << to_string(d.support->hi) << YAML::EndSeq;
      out << YAML::EndMap;
    }
    out << YAML::EndMap;
  }
  out << YAML::Key << "dynamics" << YAML::Value << YAML::BeginSeq;
  for (const auto& p : m.dynamics) {
    out << YAML::BeginMap << YAML::Key << "guard" << YAML::Value;
    emit_set(out, p.guard);
    out << YAML::Key << "body" << YAML::Value << YAML::BeginMap;
    for (std::size_t i = 0; i < m.state.size(); ++i)
      out << YAML::Key << symbol_name(m.state[i]) << YAML::Value << to_string(p.body[i]);
    out << YAML::EndMap << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "init" << YAML::Value;
  emit_set(out, m.init);
  if (!m.predicates.empty()) {
    out << YAML::Key << "predicates" << YAML::Value << YAML::BeginMap;
    for (const auto& p : m.predicates) out << YAML::Key << p.name << YAML::Value << to_string(p.expr);
    out << YAML::EndMap;
  }
  if (m.controller) {
    out << YAML::Key << "controller" << YAML::Value << YAML::BeginMap;
    for (std::size_t i = 0; i < m.input.size(); ++i)
      out << YAML::Key << symbol_name(m.input[i].var) << YAML::Value << to_string((*m.controller)[i]);
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

// ---------------------------------------------------------------------------
// Letters

std::vector<LetterCell> letter_cells(const std::vector<Predicate>& predicates, std::size_t max_predicates) {
  if (predicates.size() > max_predicates || predicates.size() >= 31)
    throw CapacityError(std::to_string(predicates.size()) + " predicates exceed the configured maximum of " +
                        std::to_string(max_predicates) + " (2^|P| letter cells)");
  std::vector<LetterCell> cells;
  Letter count = Letter{1} << predicates.size();
  for (Letter letter = 0; letter < count; ++letter) {
    LetterCell cell{letter, {}};
    for (std::size_t i = 0; i < predicates.size(); ++i) {
      bool in = (letter >> i) & 1u;
      cell.region.conjuncts.push_back({predicates[i].expr, in ? Rel::Ge : Rel::Lt});
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

Letter letter_at(const std::vector<Predicate>& predicates, const std::map<Symbol, Rational>& x) {
  Letter l = 0;
  for (std::size_t i = 0; i < predicates.size(); ++i)
    if (predicates[i].expr.eval(x) >= 0) l |= Letter{1} << i;
  return l;
}

std::vector<std::optional<Interval>> implied_box(const SemiAlgebraicSet& set, std::span<const Symbol> vars) {
  std::vector<std::optional<Rational>> lo(vars.size()), hi(vars.size());
  for (const auto& atom : set.conjuncts) {
    if (atom.rel == Rel::Eq) continue;
    Atom a = atom.relaxed_ge();  // a.poly >= 0
    if (a.poly.degree() != 1) continue;
    auto syms = a.poly.symbols();
    if (syms.size() != 1) continue;
    Symbol s = *syms.begin();
    auto it = std::find(vars.begin(), vars.end(), s);
    if (it == vars.end()) continue;
    auto i = static_cast<std::size_t>(it - vars.begin());
    Rational c = a.poly.coeff(Monomial::of(s));
    Rational bound = -a.poly.constant() / c;  // c*x + k >= 0
    if (c > 0) {
      if (!lo[i] || bound > *lo[i]) lo[i] = bound;
    } else {
      if (!hi[i] || bound < *hi[i]) hi[i] = bound;
    }
  }
  std::vector<std::optional<Interval>> out(vars.size());
  for (std::size_t i = 0; i < vars.size(); ++i)
    if (lo[i] && hi[i]) out[i] = Interval{*lo[i], *hi[i]};
  return out;
}

std::vector<std::vector<Rational>> uncovered_samples(const SdsModel& model, const std::vector<Interval>& box,
                                                     std::size_t samples, std::uint64_t seed) {
  std::vector<std::vector<Rational>> misses;
  auto g = stream_engine(seed, 0);
  for (std::size_t k = 0; k < samples; ++k) {
    std::map<Symbol, Rational> x;
    std::vector<Rational> pt;
    for (std::size_t i = 0; i < model.state.size(); ++i) {
      pt.push_back(uniform_rational(g, box.at(i).lo, box.at(i).hi));
      x[model.state[i]] = pt.back();
    }
    if (!model.piece_at(x)) misses.push_back(std::move(pt));
  }
  return misses;
}

} // namespace ldbsm
