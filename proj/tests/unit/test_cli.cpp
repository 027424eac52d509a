#include "ldbsm/cli.hpp"
#include "ldbsm/error.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace ldbsm;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("ldbsm-unit-" + name);
  std::filesystem::remove_all(p);
  return p;
}

PipelineOptions options(const std::string& dir, const char* p) {
  PipelineOptions o;
  o.synthesis.probability = parse_rational(p);
  o.out_dir = scratch(dir);
  o.timeout_seconds = 60;
  return o;
}

} // namespace

TEST_CASE("box parsing") {
  auto b = parse_box("-2:1, 0.5:3/2");
  REQUIRE(b.size() == 2);
  CHECK(b[0] == Interval{-2, 1});
  CHECK(b[1] == Interval{Rational(1, 2), Rational(3, 2)});
  CHECK_THROWS_AS(parse_box("1:-1"), Error);
  CHECK_THROWS_AS(parse_box("1"), Error);
}

TEST_CASE("p = 1 is unknown, never an input error") {
  std::ostringstream log;
  auto r = run_synthesis(oracle::data("models/random_walk.yaml"), oracle::data("automata/GF_a.ldba"),
                         options("p1", "1"), log);
  CHECK(r.exit_code == kExitUnknown);
  CHECK_FALSE(r.certificate);
  CHECK(log.str().find("does not show") != std::string::npos);
}

TEST_CASE("an empty input box is an input error") {
  auto dir = scratch("emptybox");
  std::filesystem::create_directories(dir);
  auto model = dir / "model.yaml";
  std::ofstream(model) << "state: [x]\ninput:\n  u: [1, -1]\nnoise:\n  w: {uniform: [0, 1]}\n"
                          "dynamics:\n  - guard: otherwise\n    body: {x: \"x + u + w\"}\npredicates:\n  a: \"-x\"\n";
  std::ostringstream log;
  auto o = options("emptybox-run", "9/10");
  o.synthesis.mode = Mode::Control;
  CHECK(run_synthesis(model, oracle::data("automata/GF_a.ldba"), o, log).exit_code == kExitInputError);
}

TEST_CASE("dump flags stop before solving") {
  std::ostringstream log;
  auto o = options("dump", "9999/10000");
  o.dump_entailments = true;
  auto r = run_synthesis(oracle::data("models/random_walk.yaml"), oracle::data("automata/GF_a.ldba"), o, log);
  CHECK(r.exit_code == kExitSuccess);
  CHECK(log.str().find("[cond-a / q0]") != std::string::npos);
  CHECK_FALSE(r.certificate);

  std::ostringstream smt;
  o.dump_entailments = false;
  o.dump_smt = true;
  run_synthesis(oracle::data("models/random_walk.yaml"), oracle::data("automata/GF_a.ldba"), o, smt);
  CHECK(smt.str().find("(check-sat)") != std::string::npos);
}

TEST_CASE("verification end to end") {
  std::ostringstream log;
  auto o = options("verify-fa", "9999/10000");
  auto r = run_synthesis(oracle::data("models/random_walk.yaml"), oracle::data("automata/F_a.ldba"), o, log);
  REQUIRE(r.exit_code == kExitSuccess);
  REQUIRE(r.certificate);
  REQUIRE(r.report);
  CHECK(r.report->pass);
  CHECK(r.certificate->certified_probability >= Rational(9999, 10000));
  for (const char* f : {"manifest.yaml", "entailments.txt", "certificate.yaml", "report.txt", "query-det.smt2"})
    CHECK(std::filesystem::exists(o.out_dir / f));

  std::ostringstream out;
  CHECK(run_check(oracle::data("models/random_walk.yaml"), oracle::data("automata/F_a.ldba"), r.certificate_path, {},
                  out) == kExitSuccess);
  SimConfig sim;
  sim.runs = 100;
  sim.horizon = 200;
  std::ostringstream simout;
  CHECK(run_simulate(oracle::data("models/random_walk.yaml"), oracle::data("automata/F_a.ldba"), r.certificate_path,
                     sim, std::nullopt, simout) == kExitSuccess);
  CHECK(simout.str().find("fraction_exited_SI: 0\n") != std::string::npos);
}

TEST_CASE("missing files are input errors") {
  std::ostringstream log;
  auto r = run_synthesis("/nonexistent/model.yaml", oracle::data("automata/GF_a.ldba"), options("missing", "1/2"), log);
  CHECK(r.exit_code == kExitInputError);
}
