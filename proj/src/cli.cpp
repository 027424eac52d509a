// SPDX-License-Identifier: Apache-2.0
#include "ldbsm/cli.hpp"

#include "ldbsm/constraints.hpp"
#include "ldbsm/error.hpp"
#include "ldbsm/positivstellensatz.hpp"

#include <yaml-cpp/yaml.h>

#include <atomic>
#include <chrono>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

namespace ldbsm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const char* mode_name(Mode m) { return m == Mode::Control ? "control" : "verify"; }
const char* encoding_name(Encoding e) { return e == Encoding::Strict ? "strict" : "additive"; }

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
  if (!f) throw ConfigError("cannot write " + p.string());
}

struct Prepared {
  std::string name;
  std::vector<Entailment> entailments;
  ExistentialSystem system;
};

std::vector<Prepared> prepare(const ProductContext& ctx, const TemplateSpace& ts,
                              const std::vector<TransitionAssignment>& assignments) {
  std::vector<Prepared> out;
  for (const auto& asg : assignments) {
    Prepared p{asg.name(ctx.automaton), generate(ctx, ts, asg), {}};
    p.system = reduce_system(p.entailments, ts, ctx.options);
    out.push_back(std::move(p));
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const std::filesystem::path& model_path,
                    const std::filesystem::path& automaton_path, const PipelineOptions& opts, const RunResult& r,
                    const std::string& solver, double total) {
  const auto& s = opts.synthesis;
  YAML::Emitter out;
  out.SetDoublePrecision(4);
  out << YAML::BeginMap;
  out << YAML::Key << "command" << YAML::Value << mode_name(s.mode);
  out << YAML::Key << "inputs" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "model" << YAML::Value << model_path.string();
  out << YAML::Key << "automaton" << YAML::Value << automaton_path.string();
  out << YAML::EndMap;
  out << YAML::Key << "options" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "degree" << YAML::Value << s.degree;
  out << YAML::Key << "invariants" << YAML::Value << s.invariant_count;
  out << YAML::Key << "probability" << YAML::Value << YAML::DoubleQuoted << to_string(s.probability);
  out << YAML::Key << "encoding" << YAML::Value << (opts.auto_encoding ? "auto" : encoding_name(s.encoding));
  out << YAML::Key << "sos_degree" << YAML::Value << s.sos_degree;
  out << YAML::Key << "sos_squares" << YAML::Value << s.sos_squares;
  out << YAML::Key << "normalize_scale" << YAML::Value << s.normalize_scale;
  out << YAML::Key << "solver" << YAML::Value << solver;
  out << YAML::Key << "timeout" << YAML::Value << opts.timeout_seconds;
  out << YAML::Key << "restart_base" << YAML::Value << opts.restart_base;
  out << YAML::Key << "workers" << YAML::Value << opts.workers;
  out << YAML::Key << "seed" << YAML::Value << opts.seed;
  out << YAML::EndMap;
  out << YAML::Key << "encoding_used" << YAML::Value << encoding_name(r.encoding);
  out << YAML::Key << "assignments" << YAML::Value << YAML::BeginSeq;
  for (const auto& o : r.outcomes) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << o.name;
    out << YAML::Key << "status" << YAML::Value << o.status;
    out << YAML::Key << "wall_time" << YAML::Value << o.wall_time;
    out << YAML::Key << "unknowns" << YAML::Value << o.unknowns;
    out << YAML::Key << "constraints" << YAML::Value << o.constraints;
    out << YAML::Key << "query" << YAML::Value << "query-" + o.name + ".smt2";
    if (!o.message.empty()) out << YAML::Key << "message" << YAML::Value << o.message;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  const char* verdict = r.exit_code == kExitSuccess ? "success" : r.exit_code == kExitUnknown ? "unknown"
                        : r.exit_code == kExitCheckFail                                  ? "check-fail"
                                                                                         : "input-error";
  out << YAML::Key << "verdict" << YAML::Value << verdict;
  if (r.certificate) {
    out << YAML::Key << "certificate" << YAML::Value << r.certificate_path.filename().string();
    out << YAML::Key << "certified_probability" << YAML::Value << YAML::DoubleQuoted
        << to_string(r.certificate->certified_probability);
  } else {
    out << YAML::Key << "failure" << YAML::Value << r.message;
  }
  out << YAML::Key << "total_time" << YAML::Value << total;
  out << YAML::EndMap;
  write_file(path, std::string(out.c_str()) + "\n");
}

} // namespace

std::vector<Interval> parse_box(std::string_view text) {
  std::vector<Interval> out;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("box entries have the form lo:hi");
    Interval iv{parse_rational(item.substr(0, colon)), parse_rational(item.substr(colon + 1))};
    if (iv.lo > iv.hi) throw ConfigError("box entry " + item + " is empty");
    out.push_back(iv);
  }
  if (out.empty()) throw ConfigError("empty bounding box");
  return out;
}

RunResult run_synthesis(const std::filesystem::path& model_path, const std::filesystem::path& automaton_path,
                        const PipelineOptions& opts, std::ostream& log) {
  const auto t0 = Clock::now();
  RunResult result;
  SdsModel model;
  std::string solver = opts.solver_command.empty() ? default_solver_command() : opts.solver_command;

  ProductContext ctx;
  TemplateSpace ts;
  std::vector<TransitionAssignment> assignments;
  std::vector<Prepared> prepared;
  try {
    model = load_model_file(model_path);
    Ldba automaton = load_automaton_file(automaton_path);
    SynthesisOptions so = opts.synthesis;
    if (opts.auto_encoding) so.encoding = Encoding::Additive;
    ctx = ProductContext::build(model, automaton, so);
    for (const auto& v : ctx.validation.entries)
      if (!v.is_error()) log << "note: " << v.message << "\n";
    ts = instantiate(model, ctx.automaton, so);
    assignments = enumerate_assignments(ctx.automaton, so.max_assignments);
    try {
      prepared = prepare(ctx, ts, assignments);
    } catch (const EncodingError& e) {
      if (!opts.auto_encoding) throw;
      log << "note: " << e.what() << "; switching to the strict encoding\n";
      so.encoding = Encoding::Strict;
      ctx.options = so;
      prepared = prepare(ctx, ts, assignments);
    }
    result.encoding = so.encoding;
  } catch (const Error& e) {
    result.exit_code = kExitInputError;
    result.message = e.what();
    log << "error: " << e.what() << "\n";
    return result;
  }

  if (opts.dump_entailments || opts.dump_smt) {
    for (const auto& p : prepared) {
      if (opts.dump_entailments) log << "; assignment " << p.name << "\n" << render_entailments(p.entailments);
      if (opts.dump_smt) log << "; assignment " << p.name << "\n" << emit_smt(p.system);
    }
    result.exit_code = kExitSuccess;
    result.message = "dumped";
    return result;
  }

  try {
    std::filesystem::create_directories(opts.out_dir);
    std::string ents;
    for (const auto& p : prepared) ents += "# assignment " + p.name + "\n\n" + render_entailments(p.entailments);
    write_file(opts.out_dir / "entailments.txt", ents);
  } catch (const std::exception& e) {
    result.exit_code = kExitInputError;
    result.message = std::string("cannot prepare run directory: ") + e.what();
    log << "error: " << result.message << "\n";
    return result;
  }

  log << mode_name(opts.synthesis.mode) << ": " << prepared.size() << " transition assignment(s), encoding "
      << encoding_name(result.encoding) << ", solver '" << solver << "'\n";

  // Worker pool over assignments; the first validated model cancels the rest.
  std::vector<std::optional<SolverOutcome>> outcomes(prepared.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> cancel{false};
  auto worker = [&] {
    for (;;) {
      if (cancel.load()) return;
      std::size_t i = next.fetch_add(1);
      if (i >= prepared.size()) return;
      SolverConfig cfg;
      cfg.command = solver;
      cfg.timeout_seconds = opts.timeout_seconds;
      cfg.restart_base = opts.restart_base;
      cfg.seed = opts.seed;
      cfg.work_dir = opts.out_dir;
      cfg.stem = "query-" + prepared[i].name;
      SolverOutcome o;
      try {
        o = solve(prepared[i].system, cfg, &cancel);
      } catch (const std::exception& e) {
        o.status = SolverStatus::SolverError;
        o.message = e.what();
      }
      if (o.status == SolverStatus::Sat) cancel.store(true);
      outcomes[i] = std::move(o);
    }
  };
  unsigned n_workers = std::max(1u, std::min<unsigned>(opts.workers, static_cast<unsigned>(prepared.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }

  std::optional<std::size_t> winner;
  for (std::size_t i = 0; i < prepared.size(); ++i) {
    AssignmentOutcome ao{prepared[i].name, "skipped", 0.0, "", prepared[i].system.unknowns.size(),
                         prepared[i].system.constraints.size()};
    if (outcomes[i]) {
      ao.status = status_name(outcomes[i]->status);
      ao.wall_time = outcomes[i]->wall_time;
      ao.message = outcomes[i]->message;
      if (outcomes[i]->status == SolverStatus::Sat && !winner) winner = i;
    }
    log << "  " << ao.name << ": " << ao.status;
    if (outcomes[i]) log << " (" << ao.wall_time << " s)";
    if (!ao.message.empty()) log << " " << ao.message;
    log << "\n";
    result.outcomes.push_back(std::move(ao));
  }

  if (!winner) {
    result.exit_code = kExitUnknown;
    result.message = "Unknown: no certificate found for any transition assignment (unsat, timeout or solver "
                     "failure). This does not show that the specification fails; the method is incomplete.";
    log << result.message << "\n";
  } else {
    const auto& values = *outcomes[*winner]->assignment;
    result.certificate = extract_certificate(ts, ctx.automaton, values, assignments[*winner]);
    result.certificate_path = opts.out_dir / "certificate.yaml";
    write_file(result.certificate_path, render_certificate(*result.certificate, model, ctx.automaton));
    auto bound = probability_bound(result.certificate->eta_s, result.certificate->eps_s, result.certificate->m_s);
    log << "certificate: " << result.certificate_path.string() << " (assignment " << prepared[*winner].name
        << ")\ncertified probability >= " << bound.decimal << "\n";

    CheckOptions co;
    co.box = opts.box;
    co.seed = opts.seed;
    try {
      result.report = check(model, ctx.automaton, *result.certificate, co);
      write_file(opts.out_dir / "report.txt", result.report->render(model, ctx.automaton));
      if (result.report->pass) {
        result.exit_code = kExitSuccess;
        result.message = "certificate found and independently checked";
        log << "check: pass\n";
      } else {
        result.exit_code = kExitCheckFail;
        result.message = "synthesized certificate fails the independent check";
        log << "check: FAIL (" << result.report->failures() << " condition(s)); see report.txt\n";
      }
    } catch (const ConfigError& e) {
      result.exit_code = kExitSuccess;
      result.message = std::string("certificate found; independent check skipped: ") + e.what();
      write_file(opts.out_dir / "report.txt", result.message + "\n");
      log << "check: skipped (" << e.what() << ")\n";
    }
  }
  write_manifest(opts.out_dir / "manifest.yaml", model_path, automaton_path, opts, result, solver, seconds_since(t0));
  return result;
}

int run_check(const std::filesystem::path& model_path, const std::filesystem::path& automaton_path,
              const std::filesystem::path& certificate_path, const CheckOptions& opts, std::ostream& out) {
  try {
    auto model = load_model_file(model_path);
    auto automaton = load_automaton_file(automaton_path);
    auto cert = load_certificate_file(certificate_path, model, automaton);
    auto report = check(model, automaton, cert, opts);
    out << report.render(model, automaton);
    return report.pass ? kExitSuccess : kExitCheckFail;
  } catch (const Error& e) {
    out << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

int run_simulate(const std::filesystem::path& model_path, const std::filesystem::path& automaton_path,
                 const std::filesystem::path& certificate_path, const SimConfig& cfg,
                 const std::optional<std::filesystem::path>& csv, std::ostream& out) {
  try {
    auto model = load_model_file(model_path);
    auto automaton = load_automaton_file(automaton_path);
    auto cert = load_certificate_file(certificate_path, model, automaton);
    auto stats = simulate(model, automaton, cert, extract_policy(cert, automaton), cfg);
    out << render_stats(stats, cfg);
    if (csv) {
      std::ofstream f(*csv);
      if (!f) throw ConfigError("cannot write " + csv->string());
      write_runs_csv(f, stats, model, automaton);
    }
    return kExitSuccess;
  } catch (const Error& e) {
    out << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

} // namespace ldbsm
