// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ldbsm/certificate.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace ldbsm {

struct SimConfig {
  std::uint64_t horizon = 10000;  // T
  std::uint64_t runs = 10000;     // N
  std::uint64_t seed = 0;
  std::uint64_t visit_threshold = 10;  // k
  /// Fixed initial states, used round-robin instead of sampling the init box.
  std::vector<std::vector<Rational>> initial_points;

  /// Throws ConfigError when N or k is zero.
  void validate() const;
};

struct RunSummary {
  std::vector<double> initial;
  /// Step at which V_safe(x_t, q_t) >= 0 first held; -1 if never.
  std::int64_t exit_step = -1;
  std::uint64_t accepting_visits = 0;
  /// First step t with q_{t+1} accepting; -1 if none.
  std::int64_t first_visit = -1;
  StateId final_state = 0;
  std::vector<double> final_x;

  friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

struct SimStats {
  double fraction_exited_si = 0.0;
  double fraction_k_accepting_visits = 0.0;
  double mean_accepting_visits = 0.0;
  std::vector<RunSummary> runs;

  friend bool operator==(const SimStats&, const SimStats&) = default;
};

/// Simulates the product system under the certificate's controller (or the
/// model's) and the automaton policy. Step t reads the letter of x_t, so a
/// visit at step t means q_{t+1} is accepting. Inputs are clamped to the
/// input box. Throws SimulationError for noise that cannot be sampled and
/// ModelError when no dynamics piece covers a visited state.
SimStats simulate(const SdsModel& model, const Ldba& automaton, const CertificateSolution& cert,
                  const AutomatonPolicy& policy, const SimConfig& cfg);

std::string render_stats(const SimStats& stats, const SimConfig& cfg);
void write_runs_csv(std::ostream& out, const SimStats& stats, const SdsModel& model, const Ldba& automaton);

} // namespace ldbsm
