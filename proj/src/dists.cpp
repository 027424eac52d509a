// SPDX-License-Identifier: Apache-2.0
#include "ldbsm/dists.hpp"

#include "ldbsm/error.hpp"

namespace ldbsm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::optional<Interval> family_support(const NoiseFamily& f) {
  return std::visit(overloaded{
                        [](const Uniform& u) -> std::optional<Interval> { return Interval{u.lo, u.hi}; },
                        [](const PointMass& p) -> std::optional<Interval> {
                          return Interval{p.value, p.value};
                        },
                        [](const ExplicitMoments&) -> std::optional<Interval> { return std::nullopt; },
                    },
                    f);
}

} // namespace

NoiseSpec::NoiseSpec(std::vector<NoiseDim> dims) : dims_(std::move(dims)) {
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const auto& d = dims_[i];
    auto where = "noise dimension " + std::to_string(i + 1) + ": ";
    if (auto* u = std::get_if<Uniform>(&d.family); u && u->lo >= u->hi)
      throw ModelError(where + "uniform requires lo < hi (got [" + to_string(u->lo) + ", " +
                       to_string(u->hi) + "])");
    if (auto* e = std::get_if<ExplicitMoments>(&d.family)) {
      if (e->moments.empty()) throw ModelError(where + "explicit moments list is empty");
      if (e->moments.size() >= 2 && e->moments[1] < e->moments[0] * e->moments[0])
        throw ModelError(where + "second moment smaller than squared mean");
    }
    if (d.support) {
      if (d.support->lo > d.support->hi) throw ModelError(where + "empty support box");
      if (auto own = family_support(d.family);
          own && (own->lo < d.support->lo || own->hi > d.support->hi))
        throw ModelError(where + "support box does not contain the distribution's support");
    }
  }
}

Rational NoiseSpec::moment(std::size_t dim, unsigned order) const {
  if (order == 0) return Rational(1);
  const auto& family = dims_.at(dim).family;
  return std::visit(
      overloaded{
          [&](const Uniform& u) {
            // (b^{k+1} - a^{k+1}) / ((k+1)(b-a))
            Rational num = ldbsm::pow(u.hi, order + 1) - ldbsm::pow(u.lo, order + 1);
            Rational den = Rational(order + 1) * (u.hi - u.lo);
            return Rational(num / den);
          },
          [&](const PointMass& p) { return ldbsm::pow(p.value, order); },
          [&](const ExplicitMoments& e) {
            if (order > e.moments.size())
              throw DegreeError("noise dimension " + std::to_string(dim + 1) + " needs moment of order " +
                                std::to_string(order) + " but only " + std::to_string(e.moments.size()) +
                                " supplied");
            return e.moments[order - 1];
          },
      },
      family);
}

std::vector<Rational> NoiseSpec::raw_moments(std::size_t dim, unsigned upto) const {
  if (upto < 1) throw DomainError("moment order must be at least 1");
  std::vector<Rational> out;
  out.reserve(upto);
  for (unsigned k = 1; k <= upto; ++k) out.push_back(moment(dim, k));
  return out;
}

std::optional<Interval> NoiseSpec::support(std::size_t dim) const {
  const auto& d = dims_.at(dim);
  if (auto own = family_support(d.family)) return own;
  return d.support;
}

bool NoiseSpec::bounded() const {
  for (std::size_t i = 0; i < dims_.size(); ++i)
    if (!support(i)) return false;
  return true;
}

bool NoiseSpec::samplable() const {
  for (const auto& d : dims_)
    if (std::holds_alternative<ExplicitMoments>(d.family)) return false;
  return true;
}

Poly expect_over_noise(const Poly& p, std::span<const Symbol> noise, const NoiseSpec& spec) {
  if (noise.size() != spec.dims())
    throw ModelError("noise variable count does not match the noise specification");
  return expect_over_noise(p, noise, [&](std::size_t dim, unsigned k) { return spec.moment(dim, k); });
}

} // namespace ldbsm
