// SPDX-License-Identifier: Apache-2.0
#include "ldbsm/automaton.hpp"

#include "ldbsm/error.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

namespace ldbsm {

const std::set<StateId>& Ldba::successors(StateId q, Letter a) const {
  static const std::set<StateId> none;
  auto it = transitions.find({q, a});
  return it == transitions.end() ? none : it->second;
}

std::optional<StateId> Ldba::find(std::string_view name) const {
  for (StateId i = 0; i < states.size(); ++i)
    if (states[i] == name) return i;
  return std::nullopt;
}

std::string Ldba::letter_name(Letter a) const {
  std::string out;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!((a >> i) & 1u)) continue;
    if (!out.empty()) out += ",";
    out += atoms[i];
  }
  return out.empty() ? "~" : out;
}

bool Ldba::total() const {
  for (StateId q = 0; q < states.size(); ++q)
    for (Letter a = 0; a < letter_count(); ++a)
      if (successors(q, a).empty()) return false;
  return true;
}

Ldba Ldba::completed() const {
  if (total()) return *this;
  Ldba out = *this;
  std::string name = "sink";
  for (int k = 1; find(name); ++k) name = "sink_" + std::to_string(k);
  StateId sink = out.states.size();
  out.states.push_back(name);
  for (StateId q = 0; q < out.states.size(); ++q)
    for (Letter a = 0; a < letter_count(); ++a)
      if (out.successors(q, a).empty()) out.transitions[{q, a}] = {sink};
  if (out.declared_deterministic) out.declared_deterministic->insert(sink);
  return out;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

} // namespace

Ldba parse_automaton(std::string_view text) {
  Ldba a;
  struct Edge {
    std::string from, to;
    std::vector<std::string> letter;
    int line;
  };
  std::vector<Edge> edges;
  std::optional<std::string> init;
  std::vector<std::string> accepting, deterministic;
  bool have_states = false, have_atoms = false, have_det = false;

  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    auto fail = [&](const std::string& what, std::size_t col = 0) {
      throw ParseError(what, lineno, static_cast<int>(col) + 1);
    };
    if (auto arrow = line.find("--"); arrow != std::string::npos) {
      auto close = line.find("-->", arrow + 2);
      if (close == std::string::npos) fail("transition needs the form 'q --letter--> q2'", arrow);
      Edge e{trim(line.substr(0, arrow)), trim(line.substr(close + 3)), {}, lineno};
      auto label = trim(line.substr(arrow + 2, close - arrow - 2));
      if (label == "eps" || label == "ε" || label == "epsilon")
        fail("epsilon transitions are not supported", arrow + 2);
      if (label != "~") e.letter = split_list(label);
      if (label.empty()) fail("empty letter; write '~' for the empty letter", arrow + 2);
      if (!valid_name(e.from)) fail("invalid state name '" + e.from + "'");
      if (!valid_name(e.to)) fail("invalid state name '" + e.to + "'", close + 3);
      edges.push_back(std::move(e));
      continue;
    }
    auto colon = line.find(':');
    if (colon == std::string::npos) fail("expected 'key: value' or a transition");
    auto key = trim(line.substr(0, colon));
    auto values = split_list(line.substr(colon + 1));
    for (const auto& v : values)
      if (!valid_name(v)) fail("invalid name '" + v + "'", colon + 1);
    if (key == "states") {
      for (auto& v : values) {
        if (a.find(v)) fail("duplicate state '" + v + "'", colon + 1);
        a.states.push_back(v);
      }
      have_states = true;
    } else if (key == "init") {
      if (values.size() != 1) fail("'init' takes exactly one state", colon + 1);
      init = values[0];
    } else if (key == "accepting") {
      accepting.insert(accepting.end(), values.begin(), values.end());
    } else if (key == "atoms") {
      for (auto& v : values) {
        if (std::find(a.atoms.begin(), a.atoms.end(), v) != a.atoms.end())
          fail("duplicate atom '" + v + "'", colon + 1);
        a.atoms.push_back(v);
      }
      have_atoms = true;
    } else if (key == "deterministic") {
      deterministic.insert(deterministic.end(), values.begin(), values.end());
      have_det = true;
    } else {
      fail("unknown key '" + key + "'");
    }
  }

  if (!have_states || a.states.empty()) throw ParseError("missing 'states:' line", 0, 0);
  if (!init) throw ParseError("missing 'init:' line", 0, 0);
  auto state_or_throw = [&](const std::string& name, int line) {
    auto q = a.find(name);
    if (!q) throw ParseError("undeclared state '" + name + "'", line, 1);
    return *q;
  };
  a.initial = state_or_throw(*init, 0);
  for (const auto& s : accepting) a.accepting.insert(state_or_throw(s, 0));
  if (have_det) {
    std::set<StateId> det;
    for (const auto& s : deterministic) det.insert(state_or_throw(s, 0));
    a.declared_deterministic = std::move(det);
  }
  if (!have_atoms) {
    for (const auto& e : edges)
      for (const auto& atom : e.letter)
        if (std::find(a.atoms.begin(), a.atoms.end(), atom) == a.atoms.end()) a.atoms.push_back(atom);
  }
  if (a.atoms.size() > 16) throw CapacityError("automaton uses more than 16 atoms");
  for (const auto& e : edges) {
    Letter letter = 0;
    for (const auto& atom : e.letter) {
      auto it = std::find(a.atoms.begin(), a.atoms.end(), atom);
      if (it == a.atoms.end()) throw ParseError("atom '" + atom + "' not declared in 'atoms:'", e.line, 1);
      letter |= Letter{1} << (it - a.atoms.begin());
    }
    a.transitions[{state_or_throw(e.from, e.line), letter}].insert(state_or_throw(e.to, e.line));
  }
  return a;
}

Ldba load_automaton_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open automaton file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_automaton(ss.str());
}

std::string render_automaton(const Ldba& a) {
  std::ostringstream out;
  auto join = [&](const auto& ids) {
    std::string s;
    for (StateId q : ids) s += (s.empty() ? "" : ", ") + a.states[q];
    return s;
  };
  if (!a.atoms.empty()) {
    out << "atoms:";
    for (std::size_t i = 0; i < a.atoms.size(); ++i) out << (i ? ", " : " ") << a.atoms[i];
    out << "\n";
  }
  out << "states:";
  for (std::size_t i = 0; i < a.states.size(); ++i) out << (i ? ", " : " ") << a.states[i];
  out << "\ninit: " << a.states[a.initial] << "\n";
  out << "accepting: " << join(a.accepting) << "\n";
  if (a.declared_deterministic) out << "deterministic: " << join(*a.declared_deterministic) << "\n";
  for (const auto& [key, succ] : a.transitions)
    for (StateId t : succ)
      out << a.states[key.first] << " --" << a.letter_name(key.second) << "--> " << a.states[t] << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Validation

namespace {

/// Largest set of states that are deterministic under the completed
/// transition relation and closed under successors.
std::set<StateId> maximal_deterministic_part(const Ldba& a) {
  std::set<StateId> part;
  for (StateId q = 0; q < a.size(); ++q) {
    bool det = true;
    for (Letter l = 0; l < a.letter_count(); ++l) det = det && a.successors(q, l).size() <= 1;
    if (det) part.insert(q);
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = part.begin(); it != part.end();) {
      bool closed = true;
      for (Letter l = 0; l < a.letter_count() && closed; ++l)
        for (StateId t : a.successors(*it, l)) closed = closed && part.count(t);
      if (!closed) {
        it = part.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
  }
  return part;
}

} // namespace

ValidationReport validate(const Ldba& a) {
  ValidationReport r;
  for (StateId q = 0; q < a.size(); ++q)
    for (Letter l = 0; l < a.letter_count(); ++l)
      if (a.successors(q, l).empty())
        r.entries.push_back({Violation::Kind::MissingTransition, q, l,
                             "no transition from " + a.states[q] + " on {" + a.letter_name(l) +
                                 "}; completed with a rejecting sink"});

  r.deterministic = a.declared_deterministic ? *a.declared_deterministic : maximal_deterministic_part(a);
  for (StateId q = 0; q < a.size(); ++q)
    if (!r.deterministic.count(q)) r.nondeterministic.insert(q);

  for (StateId q : r.deterministic) {
    for (Letter l = 0; l < a.letter_count(); ++l) {
      const auto& succ = a.successors(q, l);
      if (succ.size() > 1)
        r.entries.push_back({Violation::Kind::Nondeterministic, q, l,
                             "condition (i): deterministic state " + a.states[q] + " has " +
                                 std::to_string(succ.size()) + " successors on {" + a.letter_name(l) + "}"});
      for (StateId t : succ)
        if (!r.deterministic.count(t))
          r.entries.push_back({Violation::Kind::LeavesDeterministic, q, l,
                               "condition (ii): deterministic state " + a.states[q] + " moves to " +
                                   a.states[t] + " outside the deterministic part on {" + a.letter_name(l) +
                                   "}"});
    }
  }

  auto reject = rejecting_states(a);
  if (reject.count(a.initial))
    r.entries.push_back({Violation::Kind::AcceptingUnreachable, a.initial, 0,
                         "no accepting state is reachable from the initial state"});
  for (const auto& e : r.entries) r.valid = r.valid && !e.is_error();
  return r;
}

std::set<StateId> rejecting_states(const Ldba& a) {
  std::vector<std::vector<StateId>> preds(a.size());
  for (const auto& [key, succ] : a.transitions)
    for (StateId t : succ) preds[t].push_back(key.first);
  std::vector<bool> reaches(a.size(), false);
  std::deque<StateId> queue;
  for (StateId f : a.accepting) {
    reaches[f] = true;
    queue.push_back(f);
  }
  while (!queue.empty()) {
    StateId q = queue.front();
    queue.pop_front();
    for (StateId p : preds[q])
      if (!reaches[p]) {
        reaches[p] = true;
        queue.push_back(p);
      }
  }
  std::set<StateId> out;
  for (StateId q = 0; q < a.size(); ++q)
    if (!reaches[q]) out.insert(q);
  return out;
}

std::vector<Predicate> atom_predicates(const Ldba& a, const SdsModel& model) {
  std::vector<Predicate> out;
  for (const auto& name : a.atoms) {
    const Predicate* p = model.predicate(name);
    if (!p) throw ModelError("automaton atom '" + name + "' is not a predicate of the model");
    out.push_back(*p);
  }
  return out;
}

} // namespace ldbsm
