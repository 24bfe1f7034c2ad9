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

#include <vector>

#include "dpamp/mixtures.hpp"

namespace dpamp::divergence {

enum class Kind { kHockeyStick, kRenyiMoment };

enum class Method {
  kAuto,           // exact for Bernoulli, closed form for single-component
                   // continuous pairs, quadrature otherwise
  kExact,          // finite sums; discrete families only
  kQuadrature,     // adaptive Gauss-Kronrod over a padded window
  kLossBisection,  // hockey stick via pessimistic loss inversion
  kClosedForm,     // single-component continuous pairs only
};

enum class Direction { kPoint, kPessimistic, kOptimistic };

struct DivergenceValue {
  double value = 0;      // H_alpha in [0, 1] or Lambda_alpha (exp(log_value))
  double log_value = 0;  // reliable even when Lambda overflows a double
  Method method = Method::kAuto;
  Direction direction = Direction::kPoint;
};

struct CandidatePair {
  mixtures::MixtureDistribution p;
  mixtures::MixtureDistribution q;
};

struct EvalOptions {
  Method method = Method::kAuto;
  double quadrature_tol = mixtures::kDefaultQuadratureTol;
  double bisection_tol = mixtures::kDefaultBisectionTol;
  // Used by the loss-bisection route only.
  Direction direction = Direction::kPessimistic;
};

// Hockey-stick divergence H_alpha(p || q) for alpha >= 0.
DivergenceValue hockey_stick(const mixtures::MixtureDistribution& p,
                             const mixtures::MixtureDistribution& q,
                             double alpha, const EvalOptions& options = {});

// Scaled exponentiated Renyi moment Lambda_alpha(p || q) for alpha > 1.
// The RDP parameter is log_value / (alpha - 1).
DivergenceValue renyi_moment(const mixtures::MixtureDistribution& p,
                             const mixtures::MixtureDistribution& q,
                             double alpha, const EvalOptions& options = {});

// Pointwise maximum of the per-pair divergence over a candidate set whose
// guarantee is the max (randomized-response tau candidates, (K+, K-) splits).
DivergenceValue divergence_of_candidates(
    const std::vector<CandidatePair>& candidates, double alpha, Kind kind,
    const EvalOptions& options = {});

// Closed forms for single-component pairs sharing a scale, exposed for the
// binomial-expansion RDP routes. `distance` is the separation of the two
// means in unit-sensitivity coordinates.
double gaussian_log_renyi_moment(double distance, double sigma, double alpha);
double laplace_log_renyi_moment(double distance, double lambda, double alpha);
double bernoulli_log_renyi_moment(double p_success, double q_success,
                                  double alpha);

// Closed-form hockey stick for single-component pairs (shifted Gaussian /
// Laplace with matching scales).
double gaussian_hockey_stick(double distance, double sigma, double epsilon);
double laplace_hockey_stick(double distance, double lambda, double epsilon);
double bernoulli_hockey_stick(double p_success, double q_success,
                              double alpha);

}  // namespace dpamp::divergence
