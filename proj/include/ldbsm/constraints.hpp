// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ldbsm/automaton.hpp"
#include "ldbsm/model.hpp"
#include "ldbsm/template.hpp"

#include <map>
#include <string>
#include <vector>

namespace ldbsm {

/// forall bound_vars . /\ premise  =>  /\ conclusion. Premise atoms are in
/// `>= 0` or `== 0` form, conclusions in `>= 0` form.
struct Entailment {
  std::string label;
  std::vector<Symbol> bound_vars;
  std::vector<Atom> premise;
  std::vector<Atom> conclusion;
};

/// One fixed successor per (state, letter). Deterministic pairs carry their
/// unique successor; nondeterministic ones the enumerated choice.
struct TransitionAssignment {
  std::map<std::pair<StateId, Letter>, StateId> choice;

  StateId at(StateId q, Letter a) const;
  /// Compact name over the nondeterministic choices only, e.g. "q0.a-q1".
  std::string name(const Ldba& automaton) const;
  bool operator==(const TransitionAssignment&) const = default;
};

/// Cartesian product over nondeterministic pairs, lexicographic in
/// (state, letter) and then successor order. Throws CapacityError past `cap`.
std::vector<TransitionAssignment> enumerate_assignments(const Ldba& automaton, std::size_t cap = 256);

/// Everything generation needs about one (model, automaton, options) triple.
struct ProductContext {
  const SdsModel* model = nullptr;
  Ldba automaton;  // completed
  ValidationReport validation;
  std::set<StateId> rejecting;
  std::vector<Predicate> atoms;  // automaton atoms resolved against the model
  std::vector<LetterCell> cells;
  SynthesisOptions options;

  /// Validates, completes the automaton and checks mode/controller
  /// consistency. Throws ConfigError or ModelError.
  static ProductContext build(const SdsModel& model, const Ldba& automaton, const SynthesisOptions& opts);
};

/// Premise for dynamics piece i: its guard, plus the negation of each
/// earlier single-conjunct guard (first-match semantics), all in `>= 0` form.
std::vector<Atom> piece_premise(const SdsModel& model, std::size_t piece);
/// The same region with strict relations kept.
std::vector<Atom> piece_region(const SdsModel& model, std::size_t piece);

/// True when the unknown-free, affine region has no point (strict
/// relations respected). Non-affine regions are never reported empty.
bool provably_empty(const std::vector<Atom>& region, const std::vector<Symbol>& vars);

/// Successor state polynomials x' = f_i(x, pi(x), w) for a piece.
std::vector<Poly> compose_step(const SdsModel& model, std::size_t piece, const std::vector<Poly>& control);

/// The SafetyCond conclusions for one transition, with "forall w" still
/// explicit (noise symbols present).
struct SafetyParts {
  std::vector<Atom> invariant_closure;   // forall w
  Atom expected_decrease;                // noise-free
  std::vector<Atom> bounded_difference;  // forall w: D - beta >= 0, beta + M - D >= 0
};

SafetyParts safety_cond(const ProductContext& ctx, const TemplateSpace& ts, StateId q, StateId q_next,
                        std::size_t piece);

/// Conditions (a)-(f) plus control-mode input containment for one
/// assignment. Throws EncodingError when the additive encoding does not apply.
std::vector<Entailment> generate(const ProductContext& ctx, const TemplateSpace& ts,
                                 const TransitionAssignment& assignment);

/// Unknowns of the template space that no entailment or side constraint uses.
std::vector<Symbol> unused_unknowns(const TemplateSpace& ts, const std::vector<Entailment>& system);

std::string render_entailments(const std::vector<Entailment>& system);

} // namespace ldbsm
