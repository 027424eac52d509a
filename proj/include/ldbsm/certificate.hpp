// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ldbsm/automaton.hpp"
#include "ldbsm/bound.hpp"
#include "ldbsm/constraints.hpp"
#include "ldbsm/model.hpp"
#include "ldbsm/template.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ldbsm {

/// Concrete certificate over the completed automaton; vectors are indexed
/// by StateId.
struct CertificateSolution {
  std::vector<std::string> state_names;
  std::vector<Poly> v_safe, v_live;
  std::vector<std::vector<Poly>> invariant;
  /// [StateId][input]; present for synthesized controllers.
  std::optional<std::vector<std::vector<Poly>>> controller;
  Rational eta_s, eps_s, m_s, beta_s, eps_l, m_l;
  TransitionAssignment assignment;
  Rational certified_probability;
};

/// Binds a solver model into the templates. `automaton` must be the
/// completed automaton the templates were built for.
CertificateSolution extract_certificate(const TemplateSpace& ts, const Ldba& automaton,
                                        const std::map<Symbol, Rational>& values,
                                        const TransitionAssignment& assignment);

std::string render_certificate(const CertificateSolution& cert, const SdsModel& model, const Ldba& automaton);
/// Parses a certificate for (model, automaton); the automaton is completed
/// first. Coefficients must be integers or fractions: decimal literals are
/// a ParseError. Missing or unknown states are a ConfigError.
CertificateSolution load_certificate(std::string_view text, const SdsModel& model, const Ldba& automaton);
CertificateSolution load_certificate_file(const std::filesystem::path& path, const SdsModel& model,
                                          const Ldba& automaton);

struct CheckOptions {
  /// Bounding box over the state variables for the sampling path.
  std::optional<std::vector<Interval>> box;
  std::size_t samples = 100000;
  /// Grid points per condition (spread over the dimensions).
  std::size_t grid = 1000;
  /// Noise samples per state sample in addition to the support corners.
  std::size_t noise_samples = 8;
  std::uint64_t seed = 0;
};

struct Witness {
  /// State and, for "for all w" clauses, noise values.
  std::map<Symbol, Rational> point;
  std::string inequality;
  Rational value;
};

struct ConditionResult {
  /// e.g. "cond-e / q0 / cell{a} / piece-2".
  std::string label;
  /// 'a'..'f' for the certificate conditions, 'u' for input containment,
  /// 'k' for the constants' sign requirements.
  char condition = 'a';
  /// Decided by exact linear programming rather than sampling.
  bool exact = true;
  std::size_t samples = 0;
  /// (e)/(f): the successor that discharged the obligation.
  std::optional<StateId> successor;
  std::optional<Witness> witness;

  bool passed() const { return !witness; }
};

struct CheckReport {
  bool pass = true;
  std::vector<ConditionResult> results;
  std::optional<ProbabilityBound> bound;

  std::size_t failures() const;
  std::string render(const SdsModel& model, const Ldba& automaton) const;
};

/// Independent check of the certificate conditions. Conditions whose
/// polynomials are all affine in state and noise are decided exactly by LP;
/// the rest are falsified by sampling, which needs `opts.box` (ConfigError
/// otherwise).
CheckReport check(const SdsModel& model, const Ldba& automaton, const CertificateSolution& cert,
                  const CheckOptions& opts = {});

/// Automaton component of the product controller.
struct AutomatonPolicy {
  /// Used inside the stochastic invariant.
  std::map<std::pair<StateId, Letter>, StateId> inside;
  /// Smallest-order successor, used elsewhere and at rejecting states.
  std::map<std::pair<StateId, Letter>, StateId> fallback;
  std::set<StateId> rejecting;

  StateId next(StateId q, Letter a, bool in_si) const;
};

/// `automaton` is completed internally.
AutomatonPolicy extract_policy(const CertificateSolution& cert, const Ldba& automaton);

} // namespace ldbsm
