#include "ldbsm/dists.hpp"
#include "ldbsm/error.hpp"
#include "ldbsm/poly.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace ldbsm;
using testutil::P;
using testutil::Q;

namespace {

Poly random_poly(std::mt19937_64& g, const std::vector<Symbol>& vars, unsigned max_degree, int terms) {
  Poly p;
  for (int t = 0; t < terms; ++t) {
    Monomial m;
    for (Symbol s : vars) {
      unsigned e = static_cast<unsigned>(g() % (max_degree + 1));
      if (e && m.degree() + e <= max_degree) m = m * Monomial::of(s, e);
    }
    p += Poly::term(testutil::small_rational(g), m);
  }
  return p;
}

std::map<Symbol, Rational> random_point(std::mt19937_64& g, const std::vector<Symbol>& vars) {
  std::map<Symbol, Rational> pt;
  for (Symbol s : vars) pt[s] = testutil::small_rational(g, 10, 16);
  return pt;
}

} // namespace

TEST_CASE("evaluation") {
  Symbol x = testutil::state("x");
  CHECK(P("-9 + 5/16*x").eval({{x, 3}}) == Q("-129/16"));
  CHECK(Poly().eval({{x, 7}}) == 0);
  CHECK(Poly().eval({}) == 0);
  CHECK(P("73 + 1/2*x").eval({{x, -146}}) == 0);
  CHECK_THROWS_AS(P("x").eval({}), BindingError);
}

TEST_CASE("substitution") {
  Symbol x = testutil::state("x");
  Symbol w = testutil::noise("w");
  CHECK(P("x^2").substitute({{x, P("x + w")}}) == P("x^2 + 2*x*w + w^2"));
  CHECK(P("-9 + 5/16*x").substitute({{x, P("x + w")}}) == P("-9 + 5/16*x + 5/16*w"));
  CHECK(P("x").substitute({{x, P("x")}}) == P("x"));
  (void)w;
}

TEST_CASE("expectation over uniform noise") {
  testutil::state("x");
  Symbol w = testutil::noise("w");
  NoiseSpec spec({NoiseDim{Uniform{-2, 1}, std::nullopt}});
  std::vector<Symbol> noise{w};
  CHECK(expect_over_noise(P("-9 + 5/16*(x + w)"), noise, spec) == P("-9 - 5/32 + 5/16*x"));
  CHECK(expect_over_noise(P("w^2"), noise, spec) == Poly(1));
  CHECK(expect_over_noise(P("x"), noise, spec) == P("x"));
}

TEST_CASE("parsing and printing") {
  testutil::state("x");
  testutil::state("y");
  CHECK(P("(x + 1)**2") == P("x^2 + 2*x + 1"));
  CHECK(P("x/4 - y") == P("1/4*x - y"));
  CHECK(P("0.125*x") == P("1/8*x"));
  CHECK_THROWS_AS(P("x / y"), ParseError);
  CHECK_THROWS_AS(P("zzz_undeclared + 1"), ParseError);
  CHECK(P(to_string(P("-3/7*x^2*y + 5 - y"))) == P("-3/7*x^2*y + 5 - y"));
  CHECK_THROWS_AS(parse_poly("0.5*x", [](std::string_view n) { return lookup_symbol(n); }, false), ParseError);
}

TEST_CASE("ring laws hold exactly on random polynomials") {
  std::vector<Symbol> vars{testutil::state("x"), testutil::state("y"), testutil::noise("w")};
  auto g = stream_engine(11, 0);
  for (int i = 0; i < 200; ++i) {
    Poly p = random_poly(g, vars, 3, 4), q = random_poly(g, vars, 3, 4), r = random_poly(g, vars, 2, 3);
    CHECK(p + q == q + p);
    CHECK(p * q == q * p);
    CHECK((p + q) + r == p + (q + r));
    CHECK((p * q) * r == p * (q * r));
    CHECK(p * (q + r) == p * q + p * r);
    auto pt = random_point(g, vars);
    CHECK((p + q).eval(pt) == p.eval(pt) + q.eval(pt));
    CHECK((p * q).eval(pt) == p.eval(pt) * q.eval(pt));
  }
}

TEST_CASE("substitute then evaluate composes") {
  std::vector<Symbol> vars{testutil::state("x"), testutil::state("y")};
  auto g = stream_engine(12, 0);
  for (int i = 0; i < 200; ++i) {
    Poly p = random_poly(g, vars, 3, 4);
    std::map<Symbol, Poly> bind{{vars[0], random_poly(g, vars, 2, 3)}, {vars[1], random_poly(g, vars, 2, 3)}};
    auto pt = random_point(g, vars);
    std::map<Symbol, Rational> inner{{vars[0], bind[vars[0]].eval(pt)}, {vars[1], bind[vars[1]].eval(pt)}};
    CHECK(p.substitute(bind).eval(pt) == p.eval(inner));
  }
}

TEST_CASE("expectation is linear and fixes noise-free polynomials") {
  std::vector<Symbol> st{testutil::state("x"), testutil::state("y")};
  std::vector<Symbol> nz{testutil::noise("w"), testutil::noise("v")};
  std::vector<Symbol> all{st[0], st[1], nz[0], nz[1]};
  NoiseSpec spec({NoiseDim{Uniform{-2, 1}, std::nullopt}, NoiseDim{Uniform{0, 3}, std::nullopt}});
  auto g = stream_engine(13, 0);
  for (int i = 0; i < 100; ++i) {
    Poly p = random_poly(g, all, 3, 5), q = random_poly(g, all, 3, 5), s = random_poly(g, st, 3, 4);
    Rational a = testutil::small_rational(g), b = testutil::small_rational(g);
    CHECK(expect_over_noise(a * p + b * q, nz, spec) ==
          a * expect_over_noise(p, nz, spec) + b * expect_over_noise(q, nz, spec));
    CHECK(expect_over_noise(s, nz, spec) == s);
  }
}

TEST_CASE("collect splits off unknown coefficients") {
  Symbol x = testutil::state("x");
  Symbol t0 = testutil::unknown("t_c0"), t1 = testutil::unknown("t_c1");
  Poly p = Poly::var(t0) + Poly::var(t1) * Poly::var(x) + P("3*x");
  auto c = p.collect([](Symbol s) { return !is_unknown(s); });
  REQUIRE(c.size() == 2);
  CHECK(c[Monomial{}] == Poly::var(t0));
  CHECK(c[Monomial::of(x)] == Poly::var(t1) + Poly(3));
}

TEST_CASE("compiled evaluation agrees with exact evaluation") {
  std::vector<Symbol> vars{testutil::state("x"), testutil::state("y")};
  auto g = stream_engine(14, 0);
  for (int i = 0; i < 100; ++i) {
    Poly p = random_poly(g, vars, i % 2 ? 1 : 3, 4);
    CompiledPoly c(p, vars);
    auto pt = random_point(g, vars);
    std::vector<double> v{to_double(pt[vars[0]]), to_double(pt[vars[1]])};
    CHECK(c(v) == doctest::Approx(to_double(p.eval(pt))).epsilon(1e-12));
  }
}

TEST_CASE("rationals") {
  CHECK(Q("-5/16") == Rational(-5, 16));
  CHECK(Q("1e-3") == Rational(1, 1000));
  Rational r(-10, 32);
  r.canonicalize();
  CHECK(to_string(r) == "-5/16");
  CHECK(from_double(0.375) == Rational(3, 8));
  CHECK_THROWS_AS(parse_rational("0.5", false), ParseError);
  CHECK_THROWS_AS(parse_rational("1/0"), ParseError);
}
