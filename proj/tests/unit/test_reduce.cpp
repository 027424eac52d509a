#include "ldbsm/error.hpp"
#include "ldbsm/positivstellensatz.hpp"
#include "ldbsm/smtbridge.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace ldbsm;
using testutil::P;

namespace {

Entailment entail(std::vector<std::string> premise, std::vector<std::string> conclusion) {
  Entailment e;
  e.label = "t";
  e.bound_vars = {testutil::state("x")};
  for (const auto& p : premise) e.premise.push_back({P(p), Rel::Ge});
  for (const auto& c : conclusion) e.conclusion.push_back({P(c), Rel::Ge});
  return e;
}

SolverStatus run(const ExistentialSystem& sys) {
  SolverConfig cfg;
  cfg.timeout_seconds = 30;
  cfg.restart_base = 0;
  cfg.stem = "unit-reduce";
  return solve(sys, cfg).status;
}

/// Re-expands sum l_i a_i + mu under the assignment and compares with c.
Poly farkas_combination(const Entailment& e, const ExistentialSystem& sys, const std::map<Symbol, Rational>& v) {
  Poly sum;
  for (std::size_t i = 0; i < e.premise.size(); ++i) sum += Poly(v.at(sys.unknowns[i])) * e.premise[i].poly;
  return sum + Poly(v.at(sys.unknowns[e.premise.size()]));
}

} // namespace

TEST_CASE("Farkas: hand combinations satisfy the reduced system") {
  UnknownFactory f("lam_t1_");
  auto e = entail({"x - 2", "3 - x"}, {"5 - x"});
  auto sys = farkas_reduce(e, f);
  REQUIRE(sys.unknowns.size() == 3);
  std::map<Symbol, Rational> v{{sys.unknowns[0], 0}, {sys.unknowns[1], 1}, {sys.unknowns[2], 2}};
  CHECK(violated_constraints(sys, v).empty());
  CHECK(farkas_combination(e, sys, v) == e.conclusion[0].poly);
  v[sys.unknowns[2]] = 1;
  CHECK_FALSE(violated_constraints(sys, v).empty());

  UnknownFactory g("lam_t2_");
  auto taut = entail({}, {"1"});
  CHECK(farkas_reduce(taut, g).constraints.empty());

  UnknownFactory h("lam_t3_");
  auto shift = entail({"x"}, {"x + 1"});
  auto s3 = farkas_reduce(shift, h);
  std::map<Symbol, Rational> v3{{s3.unknowns[0], 1}, {s3.unknowns[1], 1}};
  CHECK(violated_constraints(s3, v3).empty());
}

TEST_CASE("Farkas rejects nonlinear entailments") {
  UnknownFactory f("lam_t4_");
  CHECK_THROWS_AS(farkas_reduce(entail({"1 - x^2"}, {"2 - x"}), f), ReductionError);
}

TEST_CASE("premises that are negative constants make the entailment vacuous") {
  auto e = entail({"-1", "x"}, {"-x - 5"});
  CHECK_FALSE(simplify_premise(e));
  UnknownFactory f("lam_t5_");
  CHECK(farkas_reduce(entail({"-1"}, {"-x"}), f).constraints.empty());
}

TEST_CASE("Farkas systems are decided by the solver") {
  UnknownFactory f("lam_t6_");
  CHECK(run(farkas_reduce(entail({"x - 2", "3 - x"}, {"5 - x"}), f)) == SolverStatus::Sat);
  CHECK(run(farkas_reduce(entail({"x - 2", "3 - x"}, {"x - 5/2"}), f)) == SolverStatus::Unsat);
}

TEST_CASE("Putinar examples") {
  UnknownFactory f("sos_t1_");
  CHECK(run(putinar_reduce(entail({"1 - x^2"}, {"2 - x^2"}), 0, 2, f)) == SolverStatus::Sat);
  CHECK(run(putinar_reduce(entail({}, {"x^2"}), 0, 2, f)) == SolverStatus::Sat);
  // x - x^2 = x (1 - x) needs the product of the premises; with constant
  // multipliers the x^2 coefficient of sigma_0 would have to be -1.
  CHECK(run(putinar_reduce(entail({"x", "1 - x"}, {"x - x^2"}), 0, 2, f)) == SolverStatus::Unsat);
  // (1 - x)^2 x + x^2 (1 - x) = x - x^2.
  CHECK(run(putinar_reduce(entail({"x", "1 - x"}, {"x - x^2"}), 2, 2, f)) == SolverStatus::Sat);
  CHECK_THROWS_AS(putinar_reduce(entail({}, {"x"}), 1, 2, f), ConfigError);
}

TEST_CASE("Putinar: coefficient matching is exact under a hand solution") {
  UnknownFactory f("sos_t2_");
  auto e = entail({"1 - x^2"}, {"2 - x^2"});
  auto sys = putinar_reduce(e, 0, 1, f);
  // sigma_0 = (h0 + h1 x)^2 and sigma_1 = g0^2: take h = (1, 0), g = 1.
  std::map<Symbol, Rational> v;
  for (Symbol s : sys.unknowns) v[s] = 0;
  REQUIRE(sys.unknowns.size() == 3);
  v[sys.unknowns[0]] = 1;
  v[sys.unknowns[2]] = 1;
  CHECK(violated_constraints(sys, v).empty());
  v[sys.unknowns[2]] = 2;
  CHECK_FALSE(violated_constraints(sys, v).empty());
}
