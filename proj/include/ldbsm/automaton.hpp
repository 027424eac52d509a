// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ldbsm/model.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ldbsm {

using StateId = std::size_t;

/// Limit-deterministic Büchi automaton over letters 2^atoms. Atoms name
/// model predicates; letter bit i stands for atoms[i].
struct Ldba {
  std::vector<std::string> states;
  StateId initial = 0;
  std::set<StateId> accepting;
  std::vector<std::string> atoms;
  /// Missing (state, letter) keys mean "no successor".
  std::map<std::pair<StateId, Letter>, std::set<StateId>> transitions;
  /// Deterministic part as declared in the file; computed when absent.
  std::optional<std::set<StateId>> declared_deterministic;

  std::size_t size() const { return states.size(); }
  Letter letter_count() const { return Letter{1} << atoms.size(); }
  const std::set<StateId>& successors(StateId q, Letter a) const;
  std::optional<StateId> find(std::string_view name) const;
  std::string letter_name(Letter a) const;

  /// Copy with every missing transition sent to a fresh non-accepting sink
  /// (added only if something is missing).
  Ldba completed() const;
  bool total() const;
};

Ldba parse_automaton(std::string_view text);
Ldba load_automaton_file(const std::filesystem::path& path);
std::string render_automaton(const Ldba& a);

struct Violation {
  enum class Kind {
    Nondeterministic,       // condition (i): Q_d state with |Δ(q,σ)| != 1
    LeavesDeterministic,    // condition (ii): Q_d state with successor outside Q_d
    MissingTransition,      // incompleteness; completed implicitly with a sink
    AcceptingUnreachable,   // no accepting state reachable from the initial one
  };
  Kind kind;
  StateId state;
  Letter letter;
  std::string message;
  bool is_error() const { return kind == Kind::Nondeterministic || kind == Kind::LeavesDeterministic; }
};

struct ValidationReport {
  bool valid = true;
  std::vector<Violation> entries;
  std::set<StateId> deterministic;     // Q_d
  std::set<StateId> nondeterministic;  // Q_n
};

/// Checks the limit-determinism conditions against the declared partition,
/// or computes the largest deterministic closed part when none is declared.
ValidationReport validate(const Ldba& a);

/// States with no path to an accepting state (reverse reachability from F).
std::set<StateId> rejecting_states(const Ldba& a);

/// Resolves the automaton's atoms against the model's predicate table, in
/// atom order. Throws ModelError for names the model does not define.
std::vector<Predicate> atom_predicates(const Ldba& a, const SdsModel& model);

} // namespace ldbsm
