// Copyright 2026 The dpamp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "dpamp/mixtures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpamp/errors.hpp"

namespace dpamp::mixtures {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kWeightSumTol = 1e-12;

bool IsBinaryOutcome(double z) { return z == 0.0 || z == 1.0; }
}  // namespace

ComponentFamily ComponentFamily::Gaussian(double sigma) {
  if (!(sigma > 0) || !std::isfinite(sigma)) {
    throw InvalidArgumentError("Gaussian scale must be positive and finite");
  }
  return ComponentFamily(Family::kGaussian, sigma);
}

ComponentFamily ComponentFamily::Laplace(double lambda) {
  if (!(lambda > 0) || !std::isfinite(lambda)) {
    throw InvalidArgumentError("Laplace scale must be positive and finite");
  }
  return ComponentFamily(Family::kLaplace, lambda);
}

ComponentFamily ComponentFamily::Bernoulli() {
  return ComponentFamily(Family::kBernoulli, 0.0);
}

MixtureDistribution::MixtureDistribution(
    ComponentFamily family, std::vector<MixtureComponent> components)
    : family_(family) {
  if (components.empty()) {
    throw InvalidArgumentError("mixture needs at least one component");
  }
  double weight_sum = 0;
  for (const auto& c : components) {
    if (!(c.weight >= 0) || !std::isfinite(c.weight)) {
      throw InvalidArgumentError("mixture weights must be nonnegative");
    }
    if (!std::isfinite(c.location)) {
      throw InvalidArgumentError("mixture locations must be finite");
    }
    if (family_.kind() == Family::kBernoulli &&
        (c.location < 0 || c.location > 1)) {
      throw InvalidArgumentError(
          "Bernoulli locations are success probabilities in [0, 1]");
    }
    weight_sum += c.weight;
  }
  if (std::abs(weight_sum - 1.0) > kWeightSumTol) {
    throw InvalidArgumentError("mixture weights must sum to 1");
  }
  for (const auto& c : components) {
    if (c.weight > 0) components_.push_back(c);
  }
  if (components_.empty()) {
    throw InvalidArgumentError("mixture needs at least one component");
  }
}

double MixtureDistribution::min_location() const {
  double m = kInf;
  for (const auto& c : components_) m = std::min(m, c.location);
  return m;
}

double MixtureDistribution::max_location() const {
  double m = -kInf;
  for (const auto& c : components_) m = std::max(m, c.location);
  return m;
}

double MixtureDistribution::bernoulli_success_probability() const {
  if (family_.kind() != Family::kBernoulli) {
    throw UnsupportedError(
        "bernoulli_success_probability requires the Bernoulli family");
  }
  double p = 0;
  for (const auto& c : components_) p += c.weight * c.location;
  return p;
}

MixtureDistribution MixtureDistribution::reflected() const {
  if (!family_.continuous()) {
    throw UnsupportedError("reflection requires a continuous family");
  }
  std::vector<MixtureComponent> comps = components_;
  for (auto& c : comps) c.location = -c.location;
  return MixtureDistribution(family_, std::move(comps));
}

double log_density(const MixtureDistribution& m, double z) {
  const auto& family = m.family();
  switch (family.kind()) {
    case Family::kBernoulli: {
      if (!IsBinaryOutcome(z)) {
        throw DomainError("Bernoulli density is defined on {0, 1}");
      }
      const double p = m.bernoulli_success_probability();
      const double value = z == 1.0 ? p : 1.0 - p;
      return value > 0 ? std::log(value) : -kInf;
    }
    case Family::kGaussian:
    case Family::kLaplace: {
      const double scale = family.scale();
      std::vector<double> terms;
      terms.reserve(m.components().size());
      for (const auto& c : m.components()) {
        const double u = (z - c.location) / scale;
        const double log_pdf = family.kind() == Family::kGaussian
                                   ? numeric::NormalLogPdf(u)
                                   : numeric::StandardLaplaceLogPdf(u);
        terms.push_back(std::log(c.weight) + log_pdf - std::log(scale));
      }
      return numeric::LogSumExp(terms);
    }
  }
  throw UnsupportedError("unknown family");
}

double density(const MixtureDistribution& m, double z) {
  return std::exp(log_density(m, z));
}

double cdf(const MixtureDistribution& m, double z) {
  const auto& family = m.family();
  if (!family.continuous()) {
    throw UnsupportedError("cdf requires a continuous family");
  }
  const double scale = family.scale();
  double value = 0;
  for (const auto& c : m.components()) {
    const double u = (z - c.location) / scale;
    value += c.weight * (family.kind() == Family::kGaussian
                             ? numeric::NormalCdf(u)
                             : numeric::StandardLaplaceCdf(u));
  }
  return std::min(1.0, std::max(0.0, value));
}

double privacy_loss(const MixtureDistribution& p, const MixtureDistribution& q,
                    double z) {
  if (p.family() != q.family()) {
    throw UnsupportedError("privacy loss requires matching families");
  }
  const double log_p = log_density(p, z);
  const double log_q = log_density(q, z);
  if (std::isinf(log_p) && std::isinf(log_q)) {
    throw DomainError("privacy loss undefined where both densities vanish");
  }
  return log_p - log_q;
}

numeric::Bracket loss_invert(const MixtureDistribution& p,
                             const MixtureDistribution& q, double target,
                             std::pair<double, double> bracket, double tol) {
  if (!p.family().continuous()) {
    throw UnsupportedError("loss inversion requires continuous families");
  }
  const auto [lo, hi] = bracket;
  if (!(lo < hi)) throw BracketError("loss_invert needs a nonempty bracket");
  auto loss = [&](double z) { return privacy_loss(p, q, z); };
  const double loss_lo = loss(lo);
  const double loss_hi = loss(hi);
  if (loss_lo == loss_hi) {
    if (target == loss_lo) return numeric::Bracket{lo, hi};
    throw OutOfRangeError("target outside the constant loss value");
  }
  const bool increasing = loss_hi > loss_lo;
  const double low_value = increasing ? loss_lo : loss_hi;
  const double high_value = increasing ? loss_hi : loss_lo;
  if (target < low_value || target > high_value) {
    throw OutOfRangeError("target outside the attained loss range");
  }
  if (increasing) {
    return numeric::BisectNondecreasing(loss, lo, hi, target, tol);
  }
  auto negated = [&](double z) { return -loss(z); };
  auto b = numeric::BisectNondecreasing(negated, lo, hi, -target, tol);
  return b;
}

std::pair<double, double> default_loss_bracket(const MixtureDistribution& p,
                                               const MixtureDistribution& q) {
  const double scale = std::max(p.family().scale(), q.family().scale());
  const double lo = std::min(p.min_location(), q.min_location());
  const double hi = std::max(p.max_location(), q.max_location());
  return {lo - 1.0 - 10.0 * scale, hi + 1.0 + 10.0 * scale};
}

}  // namespace dpamp::mixtures
