#include "ldbsm/dists.hpp"
#include "ldbsm/error.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace ldbsm;

TEST_CASE("closed-form moments") {
  NoiseSpec s({NoiseDim{Uniform{-2, 1}, std::nullopt}, NoiseDim{Uniform{0, 1}, std::nullopt},
               NoiseDim{PointMass{0}, std::nullopt}});
  CHECK(s.raw_moments(0, 3) == std::vector<Rational>{Rational(-1, 2), 1, Rational(-5, 4)});
  CHECK(s.raw_moments(1, 2) == std::vector<Rational>{Rational(1, 2), Rational(1, 3)});
  CHECK(s.raw_moments(2, 5) == std::vector<Rational>(5, Rational(0)));
  CHECK(s.moment(0, 0) == 1);
}

TEST_CASE("uniform moments match quadrature") {
  auto g = stream_engine(21, 0);
  for (int i = 0; i < 40; ++i) {
    Rational a = testutil::small_rational(g, 6, 4);
    Rational b = a + Rational(1 + static_cast<long>(g() % 12), 4);
    NoiseSpec s({NoiseDim{Uniform{a, b}, std::nullopt}});
    for (unsigned k = 1; k <= 6; ++k) {
      double exact = to_double(s.moment(0, k));
      double quad = oracle::uniform_moment(to_double(a), to_double(b), k);
      CHECK(std::abs(exact - quad) <= 1e-12 * std::max(1.0, std::abs(quad)));
    }
  }
}

TEST_CASE("symmetric uniform has vanishing odd moments") {
  for (long c = 1; c <= 7; ++c) {
    NoiseSpec s({NoiseDim{Uniform{Rational(-c, 3), Rational(c, 3)}, std::nullopt}});
    for (unsigned k = 1; k <= 9; k += 2) CHECK(s.moment(0, k) == 0);
    CHECK(s.moment(0, 2) > 0);
  }
}

TEST_CASE("explicit moments and validation") {
  NoiseSpec s({NoiseDim{ExplicitMoments{{0, 2}}, std::nullopt}});
  CHECK(s.moment(0, 2) == 2);
  CHECK_FALSE(s.bounded());
  CHECK_FALSE(s.samplable());
  CHECK_THROWS_AS(s.moment(0, 3), Error);
  CHECK_THROWS_AS(NoiseSpec({NoiseDim{Uniform{1, 1}, std::nullopt}}), ModelError);
  CHECK_THROWS_AS(NoiseSpec({NoiseDim{ExplicitMoments{{2, 1}}, std::nullopt}}), ModelError);
  CHECK_THROWS_AS(NoiseSpec({NoiseDim{Uniform{-2, 1}, Interval{-1, 1}}}), ModelError);
  NoiseSpec boxed({NoiseDim{ExplicitMoments{{0, 1}}, Interval{-3, 3}}});
  CHECK(boxed.bounded());
  CHECK(boxed.support(0) == Interval{-3, 3});
}
