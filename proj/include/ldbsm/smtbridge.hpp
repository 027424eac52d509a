// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ldbsm/positivstellensatz.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace ldbsm {

/// Byte-stable SMT-LIB2 script (QF_NRA): declarations, one assertion per
/// constraint preceded by its label as a comment, check-sat, get-value.
std::string emit_smt(const ExistentialSystem& sys);

/// Real literal in SMT-LIB2 syntax: 3.0, (/ 5.0 32.0), (- 2.0).
std::string smt_literal(const Rational& r);
std::string smt_term(const Poly& p);

enum class SolverStatus { Sat, Unsat, Unknown, Timeout, SolverError, SatUnverified };
const char* status_name(SolverStatus s);

struct SolverOutcome {
  SolverStatus status = SolverStatus::Unknown;
  /// Present iff status == Sat.
  std::optional<std::map<Symbol, Rational>> assignment;
  std::string raw;
  std::string message;
  double wall_time = 0.0;
};

/// "yices-smt2 {file}" when yices-smt2 is on PATH, else "z3 -smt2 {file}".
std::string default_solver_command();

struct SolverConfig {
  /// Shell command; "{file}" is replaced by the script path. Without the
  /// placeholder the script is fed on standard input.
  std::string command = default_solver_command();
  double timeout_seconds = 600.0;
  /// Restart schedule for solve(): attempt k gets restart_base * 1.5^k
  /// seconds (capped by what is left of the timeout); attempts after the
  /// first use a shuffled declaration and assertion order. 0 disables.
  double restart_base = 5.0;
  std::uint64_t seed = 0;
  /// Directory for the script and transcript (created if missing).
  std::filesystem::path work_dir = std::filesystem::temp_directory_path();
  std::string stem = "query";
};

/// Runs the solver on `script` and parses its verdict and model. Polls
/// `cancel` (may be null) and kills the solver when it becomes true or the
/// timeout expires.
SolverOutcome run_solver(const std::string& script, const SolverConfig& cfg,
                         const std::atomic<bool>* cancel = nullptr);

/// Parses "sat/unsat/unknown" and a get-value block. Non-rational values
/// (e.g. algebraic roots) give status Unknown with an explanatory message.
SolverOutcome parse_solver_output(const std::string& output);

/// Labels of constraints the assignment violates under exact evaluation.
/// Unknowns absent from the assignment count as 0.
std::vector<std::string> violated_constraints(const ExistentialSystem& sys,
                                              const std::map<Symbol, Rational>& assignment);

/// Same constraints and unknowns in a seeded pseudo-random order.
ExistentialSystem shuffled(const ExistentialSystem& sys, std::uint64_t seed);

/// emit + run + exactness gate: a sat model that fails re-validation is
/// reported as SatUnverified without an assignment. Unknown and timed-out
/// attempts are retried per the restart schedule.
SolverOutcome solve(const ExistentialSystem& sys, const SolverConfig& cfg, const std::atomic<bool>* cancel = nullptr);

} // namespace ldbsm
