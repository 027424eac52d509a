// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ldbsm/rational.hpp"

#include <cstdint>
#include <random>

namespace ldbsm {

/// SplitMix64 finalizer; derives independent per-stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// mt19937_64 seeded for stream `index` of a run seeded with `seed`. The
/// engine's output sequence is fixed by the C++ standard, so streams match
/// across platforms.
inline std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(index + 1)));
}

/// Uniform in [0, 1) from the top 53 bits.
inline double unit_double(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform_double(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * unit_double(g);
}

/// Exact rational uniformly on a 2^bits grid over [lo, hi].
inline Rational uniform_rational(std::mt19937_64& g, const Rational& lo, const Rational& hi,
                                 unsigned bits = 20) {
  std::uint64_t k = g() >> (64 - bits);
  Rational t(Integer(static_cast<unsigned long>(k)), Integer(1) << bits);
  t.canonicalize();
  return Rational(lo + (hi - lo) * t);
}

} // namespace ldbsm
