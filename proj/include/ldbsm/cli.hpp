// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ldbsm/certificate.hpp"
#include "ldbsm/montecarlo.hpp"
#include "ldbsm/smtbridge.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ldbsm {

/// Stable exit statuses.
enum ExitCode : int { kExitSuccess = 0, kExitInputError = 1, kExitUnknown = 2, kExitCheckFail = 3 };

struct PipelineOptions {
  SynthesisOptions synthesis;
  /// Try the additive encoding and fall back to strict when it does not
  /// apply. When false, synthesis.encoding is used as given.
  bool auto_encoding = true;
  /// Empty: default_solver_command().
  std::string solver_command;
  /// Per-assignment solver budget in seconds.
  double timeout_seconds = 600.0;
  double restart_base = 5.0;
  unsigned workers = 1;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "ldbsm-run";
  /// Passed to the post-synthesis check (needed for non-affine certificates).
  std::optional<std::vector<Interval>> box;
  /// Print the SMT scripts / entailments to the log and stop before solving.
  bool dump_smt = false;
  bool dump_entailments = false;
};

struct AssignmentOutcome {
  std::string name;
  /// "skipped" when cancelled before it started.
  std::string status;
  double wall_time = 0.0;
  std::string message;
  std::size_t unknowns = 0;
  std::size_t constraints = 0;
};

struct RunResult {
  int exit_code = kExitInputError;
  std::string message;
  Encoding encoding = Encoding::Additive;
  std::vector<AssignmentOutcome> outcomes;
  std::optional<CertificateSolution> certificate;
  std::optional<CheckReport> report;
  std::filesystem::path certificate_path;
};

/// verify / control (per opts.synthesis.mode): load, generate, reduce and
/// solve every transition assignment in a worker pool, extract the first
/// validated model, check it independently and write the run directory
/// (manifest.yaml, entailments.txt, query-<assignment>.smt2,
/// certificate.yaml, report.txt). Progress goes to `log`.
RunResult run_synthesis(const std::filesystem::path& model_path, const std::filesystem::path& automaton_path,
                        const PipelineOptions& opts, std::ostream& log);

/// Loads and checks a certificate; prints the report. Exit 0 pass, 3 fail,
/// 1 input error.
int run_check(const std::filesystem::path& model_path, const std::filesystem::path& automaton_path,
              const std::filesystem::path& certificate_path, const CheckOptions& opts, std::ostream& out);

/// Loads a certificate and simulates under its policy; optional per-run CSV.
int run_simulate(const std::filesystem::path& model_path, const std::filesystem::path& automaton_path,
                 const std::filesystem::path& certificate_path, const SimConfig& cfg,
                 const std::optional<std::filesystem::path>& csv, std::ostream& out);

/// "lo:hi,lo:hi,..." with exact rationals (decimals allowed).
std::vector<Interval> parse_box(std::string_view text);

} // namespace ldbsm
