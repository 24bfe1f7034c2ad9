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
#pragma once

#include <utility>
#include <vector>

#include "dpamp/numeric.hpp"

namespace dpamp::mixtures {

// Default absolute width tolerance for privacy-loss bisection.
inline constexpr double kDefaultBisectionTol = 1e-6;
// Default relative tolerance for quadrature over mixture densities.
inline constexpr double kDefaultQuadratureTol = 1e-10;

enum class Family { kGaussian, kLaplace, kBernoulli };

// The component family shared by every component of a mixture. Continuous
// families carry a positive noise scale; Bernoulli components are point
// parameters on {0, 1} outcomes and carry no scale.
class ComponentFamily {
 public:
  static ComponentFamily Gaussian(double sigma);
  static ComponentFamily Laplace(double lambda);
  static ComponentFamily Bernoulli();

  Family kind() const { return kind_; }
  double scale() const { return scale_; }
  bool continuous() const { return kind_ != Family::kBernoulli; }

  friend bool operator==(const ComponentFamily&, const ComponentFamily&) =
      default;

 private:
  ComponentFamily(Family kind, double scale) : kind_(kind), scale_(scale) {}

  Family kind_;
  double scale_;
};

struct MixtureComponent {
  double weight = 0;
  // Mean for continuous families; success probability for Bernoulli.
  double location = 0;
};

// A finite univariate mixture in unit-sensitivity coordinates: bound
// constructors pre-divide means by sigma/L2 (or lambda/L1) so that every
// evaluator sees one canonical parameterization.
class MixtureDistribution {
 public:
  // Validates: weights nonnegative and summing to 1 within 1e-12, at least
  // one component, Bernoulli locations in [0, 1]. Zero-weight components are
  // dropped.
  MixtureDistribution(ComponentFamily family,
                      std::vector<MixtureComponent> components);

  const ComponentFamily& family() const { return family_; }
  const std::vector<MixtureComponent>& components() const {
    return components_;
  }

  double min_location() const;
  double max_location() const;

  // A Bernoulli mixture is itself Bernoulli; this is its collapsed success
  // probability sum_k w_k * theta_k. Throws for continuous families.
  double bernoulli_success_probability() const;

  // The mixture with all locations negated (densities reflected about 0).
  // Continuous families only.
  MixtureDistribution reflected() const;

 private:
  ComponentFamily family_;
  std::vector<MixtureComponent> components_;
};

// Mixture density at z. For Bernoulli, z must be exactly 0 or 1.
double density(const MixtureDistribution& m, double z);

// log density(m, z); -inf where the density vanishes.
double log_density(const MixtureDistribution& m, double z);

// Mixture CDF at z; continuous families only.
double cdf(const MixtureDistribution& m, double z);

// log(density(p, z) / density(q, z)); +-inf when exactly one density is 0.
// Throws UndefinedLoss (DomainError) when both vanish.
double privacy_loss(const MixtureDistribution& p, const MixtureDistribution& q,
                    double z);

// Inverts the privacy loss of (p, q) at level `target` by bisection over
// `bracket`. The loss must be monotone (either direction) on the bracket;
// the caller asserts this, and flat stretches are allowed. Returns the final
// bisection bracket so callers can round pessimistically or optimistically.
numeric::Bracket loss_invert(const MixtureDistribution& p,
                             const MixtureDistribution& q, double target,
                             std::pair<double, double> bracket,
                             double tol = kDefaultBisectionTol);

// Default bisection bracket for the group dominating pairs:
// [-(K+ + 1) - 10 sigma', (K- + 1) + 10 sigma'] in scaled coordinates. The
// loss saturates outside the convex hull of the component means plus noise
// tails.
std::pair<double, double> default_loss_bracket(const MixtureDistribution& p,
                                               const MixtureDistribution& q);

}  // namespace dpamp::mixtures
