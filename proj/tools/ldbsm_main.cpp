// SPDX-License-Identifier: Apache-2.0
// Command-line front end: verify, control, check, simulate.
#include "ldbsm/cli.hpp"
#include "ldbsm/error.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace ldbsm;

namespace {

struct SynthArgs {
  std::string model, automaton;
  unsigned degree = 1, ninv = 1, sos_degree = 2, sos_squares = 2, workers = 1;
  std::string prob, encoding = "auto", solver_cmd, out, box;
  double timeout = 600.0, restart_base = 5.0;
  std::uint64_t seed = 0;
  bool dump_smt = false, dump_entailments = false, no_normalize = false;
};

void add_synthesis(CLI::App* cmd, SynthArgs& a) {
  cmd->add_option("model", a.model, "model file (YAML)")->required()->check(CLI::ExistingFile);
  cmd->add_option("automaton", a.automaton, "automaton file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--prob", a.prob, "probability threshold p in [0, 1]")->required();
  cmd->add_option("--degree", a.degree, "template degree")->capture_default_str();
  cmd->add_option("--ninv", a.ninv, "inequalities per invariant")->capture_default_str();
  cmd->add_option("--encoding", a.encoding, "auto, additive or strict")
      ->check(CLI::IsMember({"auto", "additive", "strict"}))
      ->capture_default_str();
  cmd->add_option("--sos-degree", a.sos_degree, "degree of SOS multipliers")->capture_default_str();
  cmd->add_option("--sos-squares", a.sos_squares, "squares per SOS multiplier")->capture_default_str();
  cmd->add_option("--solver-cmd", a.solver_cmd, "solver command; {file} is the script path");
  cmd->add_option("--timeout", a.timeout, "solver budget per assignment (s)")->capture_default_str();
  cmd->add_option("--restart-base", a.restart_base, "first restart slice (s); 0 disables restarts")
      ->capture_default_str();
  cmd->add_option("--workers", a.workers, "assignments solved concurrently")->capture_default_str();
  cmd->add_option("--seed", a.seed, "seed for restarts and the check")->capture_default_str();
  cmd->add_option("--out", a.out, "run directory");
  cmd->add_option("--box", a.box, "bounding box lo:hi,... for the sampling check");
  cmd->add_flag("--dump-smt", a.dump_smt, "print the SMT scripts and stop");
  cmd->add_flag("--dump-entailments", a.dump_entailments, "print the entailments and stop");
  cmd->add_flag("--no-normalize", a.no_normalize, "do not pin M_S = eps_L = 1");
}

int run_synth(const SynthArgs& a, Mode mode) {
  PipelineOptions o;
  try {
    o.synthesis.mode = mode;
    o.synthesis.degree = a.degree;
    o.synthesis.invariant_count = a.ninv;
    o.synthesis.probability = parse_rational(a.prob);
    o.synthesis.sos_degree = a.sos_degree;
    o.synthesis.sos_squares = a.sos_squares;
    o.synthesis.timeout_seconds = a.timeout;
    o.synthesis.normalize_scale = !a.no_normalize;
    o.auto_encoding = a.encoding == "auto";
    o.synthesis.encoding = a.encoding == "strict" ? Encoding::Strict : Encoding::Additive;
    o.synthesis.validate();
    if (!a.box.empty()) o.box = parse_box(a.box);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  o.solver_command = a.solver_cmd;
  o.timeout_seconds = a.timeout;
  o.restart_base = a.restart_base;
  o.workers = a.workers;
  o.seed = a.seed;
  o.dump_smt = a.dump_smt;
  o.dump_entailments = a.dump_entailments;
  o.out_dir = a.out.empty() ? std::filesystem::path("ldbsm-run") : std::filesystem::path(a.out);
  auto r = run_synthesis(a.model, a.automaton, o, a.dump_smt || a.dump_entailments ? std::cout : std::cerr);
  return r.exit_code;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthesize and check supermartingale certificates for omega-regular specifications"};
  app.require_subcommand(1);

  SynthArgs verify_args, control_args;
  auto* verify = app.add_subcommand("verify", "certify a model with a fixed (or no) controller");
  add_synthesis(verify, verify_args);
  auto* control = app.add_subcommand("control", "synthesize a controller together with a certificate");
  add_synthesis(control, control_args);

  std::string model, automaton, certificate, box, csv;
  CheckOptions check_opts;
  auto* chk = app.add_subcommand("check", "check a certificate file");
  chk->add_option("model", model)->required()->check(CLI::ExistingFile);
  chk->add_option("automaton", automaton)->required()->check(CLI::ExistingFile);
  chk->add_option("certificate", certificate)->required()->check(CLI::ExistingFile);
  chk->add_option("--box", box, "bounding box lo:hi,... for non-affine conditions");
  chk->add_option("--samples", check_opts.samples, "random samples per condition")->capture_default_str();
  chk->add_option("--seed", check_opts.seed)->capture_default_str();

  SimConfig sim;
  std::vector<std::string> init_points;
  auto* simc = app.add_subcommand("simulate", "Monte-Carlo runs under a certificate's policy");
  simc->add_option("model", model)->required()->check(CLI::ExistingFile);
  simc->add_option("automaton", automaton)->required()->check(CLI::ExistingFile);
  simc->add_option("certificate", certificate)->required()->check(CLI::ExistingFile);
  simc->add_option("--horizon,-T", sim.horizon)->capture_default_str();
  simc->add_option("--runs,-N", sim.runs)->capture_default_str();
  simc->add_option("--seed", sim.seed)->capture_default_str();
  simc->add_option("--visits,-k", sim.visit_threshold, "accepting-visit threshold")->capture_default_str();
  simc->add_option("--init", init_points, "fixed initial state, comma-separated (repeatable)");
  simc->add_option("--csv", csv, "write per-run summaries");

  CLI11_PARSE(app, argc, argv);

  if (*verify) return run_synth(verify_args, Mode::Verify);
  if (*control) return run_synth(control_args, Mode::Control);
  if (*chk) {
    try {
      if (!box.empty()) check_opts.box = parse_box(box);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitInputError;
    }
    return run_check(model, automaton, certificate, check_opts, std::cout);
  }
  if (*simc) {
    try {
      for (const auto& p : init_points) {
        std::vector<Rational> x;
        std::stringstream ss(p);
        std::string item;
        while (std::getline(ss, item, ',')) x.push_back(parse_rational(item));
        sim.initial_points.push_back(std::move(x));
      }
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitInputError;
    }
    std::optional<std::filesystem::path> csv_path;
    if (!csv.empty()) csv_path = csv;
    return run_simulate(model, automaton, certificate, sim, csv_path, std::cout);
  }
  return kExitInputError;
}
