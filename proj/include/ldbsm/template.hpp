// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ldbsm/automaton.hpp"
#include "ldbsm/model.hpp"
#include "ldbsm/poly.hpp"

#include <string>
#include <vector>

namespace ldbsm {

enum class Mode { Verify, Control };

/// How "for all w" clauses are discharged: corner substitution for noise
/// that enters affinely (additive), or keeping w universally quantified
/// with the bounded-difference clause hoisted (strict).
enum class Encoding { Additive, Strict };

struct SynthesisOptions {
  unsigned degree = 1;
  unsigned invariant_count = 1;
  Rational probability{0};
  Mode mode = Mode::Verify;
  Encoding encoding = Encoding::Additive;
  unsigned sos_degree = 2;
  unsigned sos_squares = 2;
  Rational epsilon_floor{1, 1000};
  double timeout_seconds = 600.0;
  std::size_t max_assignments = 256;
  std::size_t max_predicates = kDefaultMaxPredicates;
  /// Pin M_S = 1 and eps_L = 1. (V_safe, eta_S, eps_S, beta_S, M_S) and
  /// (V_live, eps_L, M_L) can each be rescaled by a positive factor without
  /// affecting any condition or the probability bound, so this only removes
  /// a symmetry (and makes the threshold constraint bilinear).
  bool normalize_scale = true;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

struct LabeledAtom {
  std::string label;
  Atom atom;
};

struct CertificateConstants {
  Symbol eta_s, eps_s, m_s, beta_s, eps_l, m_l;
};

/// Step-1 templates: one dense degree-d polynomial with fresh unknown
/// coefficients per (object, automaton state).
struct TemplateSpace {
  std::vector<Poly> v_safe;                    // by StateId
  std::vector<Poly> v_live;                    // by StateId
  std::vector<std::vector<Poly>> invariant;    // [StateId][j], j < n_I
  std::vector<std::vector<Poly>> controller;   // [StateId][input]; empty in verify mode
  CertificateConstants constants{};
  std::vector<Symbol> unknowns;                // Omega, in allocation order
  /// eta_S <= 0, positive floors, and the probability threshold.
  std::vector<LabeledAtom> side_constraints;
  /// Unknowns pinned by normalization; substituted into the reduced system.
  std::map<Symbol, Rational> fixed;
};

/// All monomials over `vars` of total degree <= degree, in graded order.
std::vector<Monomial> dense_monomials(std::span<const Symbol> vars, unsigned degree);

/// Expected size of Omega: |Q| (2 + n_I + [control] m) C(n+d, d) + 6.
std::size_t expected_unknown_count(std::size_t states, std::size_t state_dim, std::size_t input_dim,
                                   const SynthesisOptions& opts);

/// `automaton` should already be completed.
TemplateSpace instantiate(const SdsModel& model, const Ldba& automaton, const SynthesisOptions& opts);

/// Evaluates every template under an assignment of its unknowns.
Poly concretize(const Poly& templ, const std::map<Symbol, Rational>& assignment);

} // namespace ldbsm
