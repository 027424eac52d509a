// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ldbsm/poly.hpp"
#include "ldbsm/rational.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace ldbsm {

struct Uniform {
  Rational lo, hi;
};
struct PointMass {
  Rational value;
};
/// Raw moments m_1..m_K supplied directly.
struct ExplicitMoments {
  std::vector<Rational> moments;
};

using NoiseFamily = std::variant<Uniform, PointMass, ExplicitMoments>;

struct Interval {
  Rational lo, hi;
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// One noise dimension: its family and, optionally, a declared support box.
struct NoiseDim {
  NoiseFamily family;
  std::optional<Interval> support;
};

/// Componentwise-independent disturbance distribution.
class NoiseSpec {
public:
  NoiseSpec() = default;
  /// Validates each dimension; throws ModelError on lo >= hi, m_2 < m_1^2,
  /// or a support box not containing the family's support.
  explicit NoiseSpec(std::vector<NoiseDim> dims);

  std::size_t dims() const { return dims_.size(); }
  const NoiseDim& dim(std::size_t i) const { return dims_.at(i); }

  /// [m_1, ..., m_k] for one dimension.
  std::vector<Rational> raw_moments(std::size_t dim, unsigned upto) const;
  Rational moment(std::size_t dim, unsigned order) const;

  /// Known bounded support: the family's own (uniform, point mass) or the
  /// declared box.
  std::optional<Interval> support(std::size_t dim) const;
  bool bounded() const;
  bool samplable() const;

private:
  std::vector<NoiseDim> dims_;
};

/// Moment-substituted expectation over the noise symbols of a model.
Poly expect_over_noise(const Poly& p, std::span<const Symbol> noise, const NoiseSpec& spec);

} // namespace ldbsm
