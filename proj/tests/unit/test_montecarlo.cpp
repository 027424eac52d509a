#include "ldbsm/error.hpp"
#include "ldbsm/montecarlo.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace ldbsm;

namespace {

struct Walk {
  SdsModel model = load_model_file(oracle::data("models/random_walk.yaml"));
  Ldba automaton = load_automaton_file(oracle::data("automata/GF_a.ldba"));
  CertificateSolution cert =
      load_certificate_file(oracle::data("certificates/random_walk_GF_a.yaml"), model, automaton);
  AutomatonPolicy policy = extract_policy(cert, automaton);
};

} // namespace

TEST_CASE("empty horizon") {
  Walk w;
  SimConfig cfg;
  cfg.horizon = 0;
  cfg.runs = 50;
  auto s = simulate(w.model, w.automaton, w.cert, w.policy, cfg);
  CHECK(s.fraction_exited_si == 0);
  CHECK(s.fraction_k_accepting_visits == 0);
  CHECK(s.mean_accepting_visits == 0);
  for (const auto& r : s.runs) {
    CHECK(r.exit_step == -1);
    CHECK(r.first_visit == -1);
    CHECK(r.final_x == r.initial);
  }
}

TEST_CASE("deterministic descent") {
  auto m = load_model("state: [x]\nnoise:\n  w: {point: 0}\ndynamics:\n  - guard: otherwise\n"
                      "    body: {x: \"x - 1 + w\"}\ninit: [\"x >= 2\", \"x <= 3\"]\npredicates:\n  a: \"-x\"\n");
  auto fa = parse_automaton("atoms: a\nstates: q0, q1\ninit: q0\naccepting: q1\n"
                            "q0 --~--> q0\nq0 --a--> q1\nq1 --~--> q1\nq1 --a--> q1\n");
  CertificateSolution c;
  c.state_names = {"q0", "q1"};
  c.v_safe = {Poly(-1), Poly(-1)};
  c.v_live = {Poly(0), Poly(0)};
  c.invariant = {{Poly(0)}, {Poly(0)}};
  c.assignment = enumerate_assignments(fa.completed())[0];
  SimConfig cfg;
  cfg.horizon = 20;
  cfg.runs = 3;
  cfg.initial_points = {{Rational(5, 2)}};
  auto s = simulate(m, fa, c, extract_policy(c, fa), cfg);
  for (const auto& r : s.runs) {
    // x: 2.5, 1.5, 0.5, -0.5 -> the letter {a} is read at t = 3.
    CHECK(r.first_visit == 3);
    CHECK(r.accepting_visits == 17);
    CHECK(r.final_state == 1);
    CHECK(r.final_x[0] == doctest::Approx(-17.5));
    CHECK(r.exit_step == -1);
  }
  CHECK(s.fraction_k_accepting_visits == 1);
}

TEST_CASE("runs are reproducible from the seed") {
  Walk w;
  SimConfig cfg;
  cfg.horizon = 500;
  cfg.runs = 200;
  cfg.seed = 7;
  auto a = simulate(w.model, w.automaton, w.cert, w.policy, cfg);
  auto b = simulate(w.model, w.automaton, w.cert, w.policy, cfg);
  CHECK(a == b);
  cfg.seed = 8;
  CHECK_FALSE(simulate(w.model, w.automaton, w.cert, w.policy, cfg) == a);

  std::ostringstream csv;
  write_runs_csv(csv, a, w.model, w.automaton);
  auto text = csv.str();
  CHECK(text.rfind("run,exit_step,accepting_visits,first_visit,final_state,init_x,final_x\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 201);
}

TEST_CASE("every run either exits or keeps visiting") {
  Walk w;
  SimConfig cfg;
  cfg.horizon = 2000;
  cfg.runs = 1000;
  cfg.seed = 3;
  auto s = simulate(w.model, w.automaton, w.cert, w.policy, cfg);
  CHECK(s.fraction_exited_si + s.fraction_k_accepting_visits >= 1.0 - 3.0 / std::sqrt(1000.0));
  // Initial states come from the init set.
  for (const auto& r : s.runs) {
    CHECK(r.initial[0] >= 2.0);
    CHECK(r.initial[0] <= 3.0);
  }
}

TEST_CASE("simulation input errors") {
  Walk w;
  SimConfig cfg;
  cfg.runs = 0;
  CHECK_THROWS_AS(simulate(w.model, w.automaton, w.cert, w.policy, cfg), ConfigError);
  cfg.runs = 1;
  cfg.visit_threshold = 0;
  CHECK_THROWS_AS(simulate(w.model, w.automaton, w.cert, w.policy, cfg), ConfigError);

  auto moments = load_model("state: [x]\nnoise:\n  w: {moments: [0, 1]}\ndynamics:\n  - guard: otherwise\n"
                            "    body: {x: \"x + w\"}\ninit: [\"x >= 2\", \"x <= 3\"]\npredicates:\n  a: \"-x\"\n");
  SimConfig ok;
  ok.runs = 1;
  ok.horizon = 1;
  CHECK_THROWS_AS(simulate(moments, w.automaton, w.cert, w.policy, ok), SimulationError);
}
