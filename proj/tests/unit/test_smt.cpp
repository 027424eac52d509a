#include "ldbsm/smtbridge.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>

using namespace ldbsm;

namespace {

SolverConfig quick(const char* stem) {
  SolverConfig cfg;
  cfg.timeout_seconds = 30;
  cfg.restart_base = 0;
  cfg.stem = stem;
  return cfg;
}

Poly var(const char* name) { return Poly::var(testutil::unknown(name)); }

} // namespace

TEST_CASE("literals") {
  CHECK(smt_literal(Rational(3)) == "3.0");
  CHECK(smt_literal(Rational(-2)) == "(- 2.0)");
  CHECK(smt_literal(Rational(5, 32)) == "(/ 5.0 32.0)");
}

TEST_CASE("smallest script") {
  ExistentialSystem sys;
  sys.unknowns = {testutil::unknown("eta_S")};
  sys.constraints.push_back({"eta", {var("eta_S"), Rel::Le}});
  auto s = emit_smt(sys);
  CHECK(s.find("(set-logic QF_NRA)") != std::string::npos);
  CHECK(s.find("(declare-const eta_S Real)") != std::string::npos);
  CHECK(s.find("(assert (<= eta_S 0.0))") != std::string::npos);
  CHECK(s.find("(check-sat)") != std::string::npos);
  CHECK(s.find("(get-value (eta_S))") != std::string::npos);
  CHECK(emit_smt(sys) == s);
}

TEST_CASE("threshold constraint is a product of three unknowns") {
  ExistentialSystem sys;
  sys.unknowns = {testutil::unknown("eta_S"), testutil::unknown("eps_S"), testutil::unknown("M_S")};
  Poly lhs = Poly(8) * var("eta_S") * var("eps_S");
  Poly rhs = var("M_S") * var("M_S") * Poly(Rational(-921, 100));
  sys.constraints.push_back({"threshold", {lhs - rhs, Rel::Le}});
  auto s = emit_smt(sys);
  CHECK(s.find("(* 8.0 eta_S eps_S)") != std::string::npos);
  CHECK(s.find("M_S M_S)") != std::string::npos);
}

TEST_CASE("golden script") {
  ExistentialSystem sys;
  sys.unknowns = {testutil::unknown("g_a"), testutil::unknown("g_b")};
  sys.constraints.push_back({"first", {var("g_a") - Poly(Rational(1, 3)), Rel::Ge}});
  sys.constraints.push_back({"second", {var("g_a") * var("g_b") - Poly(2), Rel::Eq}});
  CHECK(emit_smt(sys) == testutil::slurp(std::filesystem::path(LDBSM_GOLDEN_DIR) / "small.smt2"));
}

TEST_CASE("solver round trips") {
  ExistentialSystem eq;
  Symbol a = testutil::unknown("a_sat");
  eq.unknowns = {a};
  eq.constraints.push_back({"lo", {Poly::var(a) - Poly(1), Rel::Ge}});
  eq.constraints.push_back({"hi", {Poly::var(a) - Poly(1), Rel::Le}});
  auto out = solve(eq, quick("unit-sat"));
  REQUIRE(out.status == SolverStatus::Sat);
  CHECK(out.assignment->at(a) == 1);

  ExistentialSystem contra;
  Symbol b = testutil::unknown("a_unsat");
  contra.unknowns = {b};
  contra.constraints.push_back({"pos", {Poly::var(b), Rel::Gt}});
  contra.constraints.push_back({"neg", {Poly::var(b), Rel::Lt}});
  CHECK(solve(contra, quick("unit-unsat")).status == SolverStatus::Unsat);

  CHECK(emit_smt({}).find("(assert true)") != std::string::npos);
  CHECK(solve({}, quick("unit-empty")).status == SolverStatus::Sat);

  ExistentialSystem falsum;
  falsum.constraints.push_back({"never", {Poly(-1), Rel::Ge}});
  CHECK(solve(falsum, quick("unit-false")).status == SolverStatus::Unsat);
}

TEST_CASE("parsing solver output") {
  Symbol p = testutil::unknown("p_val"), q = testutil::unknown("q_val"), r = testutil::unknown("r_val");
  auto out = parse_solver_output("sat\n((p_val (/ 1.0 3.0))\n (q_val (- 0.25))\n (r_val 7))\n");
  REQUIRE(out.status == SolverStatus::Sat);
  CHECK(out.assignment->at(p) == Rational(1, 3));
  CHECK(out.assignment->at(q) == Rational(-1, 4));
  CHECK(out.assignment->at(r) == 7);
  CHECK(parse_solver_output("unsat\n").status == SolverStatus::Unsat);
  CHECK(parse_solver_output("unknown\n").status == SolverStatus::Unknown);
  CHECK(parse_solver_output("sat\n((p_val (root-obj (+ (^ x 2) (- 2)) 1)))\n").status == SolverStatus::Unknown);
  CHECK(parse_solver_output("(error \"boom\")\n").status == SolverStatus::SolverError);
}

TEST_CASE("exactness gate") {
  Symbol a = testutil::unknown("gate_a");
  ExistentialSystem sys;
  sys.unknowns = {a};
  sys.constraints.push_back({"third", {Poly(3) * Poly::var(a) - Poly(1), Rel::Eq}});
  CHECK(violated_constraints(sys, {{a, Rational(1, 3)}}).empty());
  CHECK(violated_constraints(sys, {{a, Rational(3333, 10000)}}) == std::vector<std::string>{"third"});
  // A solver that answers with a rounded decimal is not trusted.
  SolverConfig cfg = quick("unit-gate");
  cfg.command = "printf 'sat\\n((gate_a 0.3333))\\n'";
  auto out = solve(sys, cfg);
  CHECK(out.status == SolverStatus::SatUnverified);
  CHECK_FALSE(out.assignment);
}

TEST_CASE("timeouts") {
  SolverConfig cfg = quick("unit-timeout");
  cfg.command = "sleep 5";
  cfg.timeout_seconds = 0.3;
  ExistentialSystem sys;
  sys.unknowns = {testutil::unknown("slow")};
  sys.constraints.push_back({"x", {Poly::var(testutil::unknown("slow")), Rel::Ge}});
  auto out = solve(sys, cfg);
  CHECK(out.status == SolverStatus::Timeout);
  CHECK(out.wall_time < 3.0);
}

TEST_CASE("shuffling permutes without changing the system") {
  ExistentialSystem sys;
  for (int i = 0; i < 12; ++i) {
    Symbol s = testutil::unknown(("sh" + std::to_string(i)).c_str());
    sys.unknowns.push_back(s);
    sys.constraints.push_back({"c" + std::to_string(i), {Poly::var(s) - Poly(i), Rel::Ge}});
  }
  auto a = shuffled(sys, 1), b = shuffled(sys, 1), c = shuffled(sys, 2);
  CHECK(emit_smt(a) == emit_smt(b));
  CHECK(emit_smt(a) != emit_smt(c));
  auto names = [](const ExistentialSystem& s) {
    std::vector<std::string> n;
    for (const auto& x : s.constraints) n.push_back(x.label);
    std::sort(n.begin(), n.end());
    return n;
  };
  CHECK(names(a) == names(sys));
  auto ua = a.unknowns, us = sys.unknowns;
  std::sort(ua.begin(), ua.end());
  std::sort(us.begin(), us.end());
  CHECK(ua == us);
}
