#include "ldbsm/bound.hpp"
#include "ldbsm/certificate.hpp"
#include "ldbsm/cli.hpp"
#include "ldbsm/error.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <fstream>

using namespace ldbsm;

namespace {

struct Example {
  SdsModel model = load_model_file(oracle::data("models/random_walk.yaml"));
  Ldba automaton = load_automaton_file(oracle::data("automata/GF_a.ldba"));
  std::string text = testutil::slurp(oracle::data("certificates/random_walk_GF_a.yaml"));

  CertificateSolution load(const std::string& t) const { return load_certificate(t, model, automaton); }
  CertificateSolution cert() const { return load(text); }
};

std::string replace(std::string s, const std::string& from, const std::string& to) {
  auto at = s.find(from);
  REQUIRE(at != std::string::npos);
  return s.replace(at, from.size(), to);
}

const ConditionResult* first_failure(const CheckReport& r) {
  for (const auto& c : r.results)
    if (!c.passed()) return &c;
  return nullptr;
}

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  auto p = std::filesystem::temp_directory_path() / ("ldbsm-unit-" + name);
  std::ofstream(p) << text;
  return p;
}

} // namespace

TEST_CASE("probability bound") {
  auto b = probability_bound(-8, Rational(5, 32), 1);
  CHECK(b.decimal.substr(0, 12) == "0.9999546000");
  CHECK(b.approx == doctest::Approx(0.9999546001).epsilon(1e-10));
  CHECK(b.lower < 1);
  CHECK(probability_bound(0, Rational(5, 32), 1).lower == 0);
  CHECK(probability_bound(-1, Rational(1, 8), 1).approx == doctest::Approx(0.6321205588).epsilon(1e-10));
  CHECK_THROWS_AS(probability_bound(1, 1, 1), DomainError);
  CHECK_THROWS_AS(probability_bound(-1, 0, 1), DomainError);
  CHECK_THROWS_AS(probability_bound(-1, 1, 0), DomainError);
}

TEST_CASE("log(1 - p) is rounded down") {
  CHECK_FALSE(log_one_minus_lower(1));
  CHECK(*log_one_minus_lower(0) <= 0);
  auto l = *log_one_minus_lower(Rational(9999, 10000));
  // ln(1e-4) = -9.2103403719761827...
  CHECK(l < testutil::Q("-92103403719761827/10000000000000000"));
  CHECK(l > testutil::Q("-92103403719761828/10000000000000000"));
}

TEST_CASE("the hand-written certificate passes exactly") {
  Example ex;
  auto r = check(ex.model, ex.automaton, ex.cert());
  CHECK(r.pass);
  CHECK(r.failures() == 0);
  for (const auto& c : r.results) CHECK(c.exact);
  REQUIRE(r.bound);
  CHECK(r.bound->approx >= 0.9999);
  CHECK(r.render(ex.model, ex.automaton).find("verdict: pass") != std::string::npos);
}

TEST_CASE("eta = -9 fails the initial level at x = 3") {
  Example ex;
  auto r = check(ex.model, ex.automaton, ex.load(replace(ex.text, "eta_S: \"-8\"", "eta_S: \"-9\"")));
  CHECK_FALSE(r.pass);
  CHECK(r.failures() == 1);
  auto* f = first_failure(r);
  REQUIRE(f);
  CHECK(f->condition == 'b');
  REQUIRE(f->witness);
  CHECK(f->witness->point.at(ex.model.state[0]) == 3);
  // eta - V_safe(3) = -9 + 129/16.
  CHECK(f->witness->value == Rational(-15, 16));
}

TEST_CASE("a negative liveness function fails (d)") {
  Example ex;
  auto r = check(ex.model, ex.automaton, ex.load(replace(ex.text, "\"367/2 + 3/4*x\"", "\"-1\"")));
  CHECK_FALSE(r.pass);
  bool found = false;
  for (const auto& c : r.results)
    if (c.condition == 'd' && !c.passed()) {
      found = true;
      CHECK(c.witness->value == -1);
    }
  CHECK(found);
}

TEST_CASE("eps_S = 1 breaks the expected decrease") {
  Example ex;
  auto r = check(ex.model, ex.automaton, ex.load(replace(ex.text, "eps_S: \"5/32\"", "eps_S: \"1\"")));
  CHECK_FALSE(r.pass);
  bool found = false;
  for (const auto& c : r.results)
    if (c.condition == 'e' && !c.passed()) {
      found = true;
      // The decrease is 5/32 everywhere, so the margin is 5/32 - 1.
      CHECK(c.witness->value == Rational(-27, 32));
    }
  CHECK(found);
}

TEST_CASE("certificate files: format rules") {
  Example ex;
  CHECK_THROWS_AS(ex.load(replace(ex.text, "-9 + 5/16*x", "-9 + 0.3125*x")), ParseError);
  CHECK_THROWS_AS(ex.load(replace(ex.text, "  q1:\n", "  q7:\n")), ConfigError);
  auto again = ex.load(render_certificate(ex.cert(), ex.model, ex.automaton));
  auto orig = ex.cert();
  CHECK(again.v_safe == orig.v_safe);
  CHECK(again.v_live == orig.v_live);
  CHECK(again.invariant == orig.invariant);
  CHECK(again.eta_s == orig.eta_s);
  CHECK(again.m_l == orig.m_l);
}

TEST_CASE("check command exit statuses") {
  Example ex;
  std::ostringstream out;
  auto model = oracle::data("models/random_walk.yaml"), aut = oracle::data("automata/GF_a.ldba");
  CHECK(run_check(model, aut, oracle::data("certificates/random_walk_GF_a.yaml"), {}, out) == kExitSuccess);
  auto bad = write_temp("eps.yaml", replace(ex.text, "eps_S: \"5/32\"", "eps_S: \"1\""));
  CHECK(run_check(model, aut, bad, {}, out) == kExitCheckFail);
  auto flt = write_temp("float.yaml", replace(ex.text, "M_L: \"260\"", "M_L: 260.0"));
  CHECK(run_check(model, aut, flt, {}, out) == kExitInputError);
  CHECK(run_check(model, aut, "/nonexistent/cert.yaml", {}, out) == kExitInputError);
}

TEST_CASE("non-affine certificates need a box and are sampled") {
  Example ex;
  auto quad = replace(ex.text, "\"73 + 1/2*x\"", "\"73 + 1/2*x - 1/1000000*x^2\"");
  auto cert = ex.load(quad);
  CHECK_THROWS_AS(check(ex.model, ex.automaton, cert), ConfigError);
  CheckOptions o;
  o.box = std::vector<Interval>{{-300, 300}};
  o.samples = 2000;
  auto r = check(ex.model, ex.automaton, cert, o);
  CHECK(r.pass);
  bool sampled = false;
  for (const auto& c : r.results) sampled = sampled || !c.exact;
  CHECK(sampled);

  // Roots near -24.6 and 29.6: a step of +1 from x = 28.8 leaves the set.
  auto broken = ex.load(replace(ex.text, "\"73 + 1/2*x\"", "\"73 + 1/2*x - 1/10*x^2\""));
  auto rb = check(ex.model, ex.automaton, broken, o);
  CHECK_FALSE(rb.pass);
}

TEST_CASE("policy extraction") {
  Example ex;
  auto pol = extract_policy(ex.cert(), ex.automaton);
  for (StateId q = 0; q < 2; ++q)
    for (Letter l = 0; l < 2; ++l) {
      StateId det = *ex.automaton.successors(q, l).begin();
      CHECK(pol.next(q, l, true) == det);
      CHECK(pol.next(q, l, false) == det);
    }

  auto fg = load_automaton_file(oracle::data("automata/FG_a.ldba"));
  CertificateSolution c = ex.cert();
  c.state_names = {"q0", "q1", "q2"};
  c.v_safe.push_back(c.v_safe[0]);
  c.v_live.push_back(c.v_live[0]);
  c.invariant.push_back(c.invariant[0]);
  c.assignment = enumerate_assignments(fg.completed())[1];
  auto p2 = extract_policy(c, fg);
  CHECK(p2.next(0, 1, true) == 1);
  CHECK(p2.next(0, 1, false) == 0);
  CHECK(p2.next(0, 0, true) == 0);
  CHECK(p2.rejecting == std::set<StateId>{2});
}
