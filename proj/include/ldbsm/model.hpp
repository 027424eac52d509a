// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ldbsm/dists.hpp"
#include "ldbsm/poly.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ldbsm {

/// Conjunction of polynomial sign conditions; empty means the whole space.
struct SemiAlgebraicSet {
  std::vector<Atom> conjuncts;

  bool whole() const { return conjuncts.empty(); }
  bool contains(const std::map<Symbol, Rational>& point) const;
  /// Every conjunct in `>= 0` form (strict ones relaxed).
  std::vector<Atom> relaxed() const;
  friend bool operator==(const SemiAlgebraicSet&, const SemiAlgebraicSet&) = default;
};

/// Atomic proposition; holds at x iff expr(x) >= 0.
struct Predicate {
  std::string name;
  Poly expr;
  friend bool operator==(const Predicate&, const Predicate&) = default;
};

struct DynamicsPiece {
  SemiAlgebraicSet guard;
  /// One polynomial per state dimension, over state, input and noise.
  std::vector<Poly> body;
  friend bool operator==(const DynamicsPiece&, const DynamicsPiece&) = default;
};

struct InputBound {
  Symbol var;
  Interval box;
  friend bool operator==(const InputBound&, const InputBound&) = default;
};

struct SdsModel {
  std::vector<Symbol> state;
  std::vector<InputBound> input;
  std::vector<Symbol> noise;
  NoiseSpec noise_spec;
  std::vector<DynamicsPiece> dynamics;
  SemiAlgebraicSet init;
  std::vector<Predicate> predicates;
  /// Fixed controller, one polynomial over state per input (verification).
  std::optional<std::vector<Poly>> controller;

  std::size_t state_dim() const { return state.size(); }
  std::size_t input_dim() const { return input.size(); }
  std::vector<Symbol> input_vars() const;
  SemiAlgebraicSet input_space() const;
  const Predicate* predicate(std::string_view name) const;
  /// Index of the first piece whose guard holds at x (exact), if any.
  std::optional<std::size_t> piece_at(const std::map<Symbol, Rational>& x) const;
};

/// Parses and validates a model document (YAML). Throws ParseError with
/// line/column for syntax problems and ModelError for semantic ones.
SdsModel load_model(std::string_view text);
SdsModel load_model_file(const std::filesystem::path& path);
std::string render_model(const SdsModel& model);

/// Letters are bitmasks over an ordered atom list: bit i set iff atom i holds.
using Letter = std::uint32_t;

struct LetterCell {
  Letter letter = 0;
  /// exp_p >= 0 for atoms in the letter, exp_p < 0 for the others.
  SemiAlgebraicSet region;
};

inline constexpr std::size_t kDefaultMaxPredicates = 8;

/// The 2^|P| sign cells, in increasing letter order.
std::vector<LetterCell> letter_cells(const std::vector<Predicate>& predicates,
                                     std::size_t max_predicates = kDefaultMaxPredicates);

/// The letter a concrete state produces.
Letter letter_at(const std::vector<Predicate>& predicates, const std::map<Symbol, Rational>& x);

/// Axis-aligned bounds implied by single-variable linear conjuncts; nullopt
/// for dimensions left unbounded.
std::vector<std::optional<Interval>> implied_box(const SemiAlgebraicSet& set,
                                                 std::span<const Symbol> vars);

/// Sampling check that some guard covers every state in the box. Returns the
/// uncovered sample points (empty when coverage looks total).
std::vector<std::vector<Rational>> uncovered_samples(const SdsModel& model,
                                                     const std::vector<Interval>& box,
                                                     std::size_t samples, std::uint64_t seed);

} // namespace ldbsm
