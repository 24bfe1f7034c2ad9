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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dpamp/amplification.hpp"
#include "dpamp/curves.hpp"
#include "dpamp/divergence.hpp"

namespace dpamp::accounting {

// Discretized distribution of the privacy loss log(p(Z)/q(Z)), Z ~ P, on an
// arithmetic grid loss = index * grid_step, plus an atom at +infinity. A
// pessimistic PLD rounds losses up (delta over-estimates); an optimistic one
// rounds down and may drop untrackable tail mass (recorded in dropped_mass).
// The estimate flag is immutable and propagates through composition.
struct PrivacyLossDistribution {
  double grid_step = 1e-3;
  std::int64_t min_index = 0;
  std::vector<double> masses;
  double inf_mass = 0;
  bool pessimistic = true;
  double dropped_mass = 0;

  std::int64_t max_index() const {
    return min_index + static_cast<std::int64_t>(masses.size()) - 1;
  }
  double loss_at(std::size_t i) const {
    return (min_index + static_cast<std::int64_t>(i)) * grid_step;
  }
  double finite_mass() const;
  double total_mass() const { return finite_mass() + inf_mass; }
};

struct PldOptions {
  double grid_step = 1e-3;
  // Probability mass truncated from the privacy-loss tails when
  // discretizing a continuous pair.
  double tail_mass_cutoff = 1.928749847963918e-22;  // exp(-50)
  bool pessimistic = true;
  double bisection_tol = 1e-9;
};

enum class ConvolutionBackend { kDirect, kFft };

struct ComposeOptions {
  // Tail mass truncated at every pairwise convolution.
  double truncation = 1e-15;
  // Hard cap on the bucket count of any intermediate result.
  std::size_t max_support = std::size_t{1} << 26;
  ConvolutionBackend backend = ConvolutionBackend::kDirect;
};

// Discretizes the privacy loss of a dominating pair. Continuous pairs
// require a monotone loss (flat stretches allowed) and use pessimistic or
// optimistic grid rounding via loss inversion; Bernoulli pairs are computed
// exactly before grid snapping.
PrivacyLossDistribution pld_from_pair(const divergence::CandidatePair& pair,
                                      const PldOptions& options = {});

// Convolution of two independent PLDs (same grid step and estimate flag).
PrivacyLossDistribution pld_convolve(const PrivacyLossDistribution& a,
                                     const PrivacyLossDistribution& b,
                                     const ComposeOptions& options = {});

// T-fold self-composition by exponentiation-by-squaring over convolution.
PrivacyLossDistribution pld_compose(const PrivacyLossDistribution& pld,
                                    std::int64_t iterations,
                                    const ComposeOptions& options = {});

// delta(epsilon) = E[(1 - e^{epsilon - L})_+] + inf_mass.
double pld_delta(const PrivacyLossDistribution& pld, double epsilon);

// Smallest grid-resolved epsilon with pld_delta(epsilon) <= delta_target.
// Returns +infinity when the target is unreachable (inf_mass > target) and
// -infinity when every epsilon qualifies (delta_target = 1).
double pld_epsilon(const PrivacyLossDistribution& pld, double delta_target);

// JSON document {version, grid_step, min_index, masses, inf_mass,
// pessimistic, dropped_mass} for caching between CLI runs.
nlohmann::json pld_to_json(const PrivacyLossDistribution& pld);
PrivacyLossDistribution pld_from_json(const nlohmann::json& doc);

// Pointwise rho * T.
curves::RdpCurve rdp_compose(const curves::RdpCurve& curve,
                             std::int64_t iterations);

enum class RdpToAdpFormula { kStandard, kImproved };

// Minimum over curve points of the RDP-to-ADP conversion at delta_target;
// clamped at 0.
double rdp_to_adp(const curves::RdpCurve& curve, double delta_target,
                  RdpToAdpFormula formula = RdpToAdpFormula::kImproved);

enum class GroupMethod { kSpecific, kAgnostic, kPosthoc };

struct ProfileOptions {
  double bisection_tol = 1e-6;
  divergence::Direction direction = divergence::Direction::kPessimistic;
};

// Single-iteration delta(epsilon) curve for Poisson-subsampled group privacy
// under the chosen method, monotone-repaired. `specific` maximizes the tight
// mixture bound over all (K+, K-) splits; `agnostic` evaluates the
// mechanism-agnostic closed form; `posthoc` applies the generic group
// property to the tight K = 1 curve.
curves::PrivacyCurve group_profile(
    const amplification::AmplificationSetting& setting, int group_size,
    GroupMethod method, std::span<const double> epsilon_grid,
    const ProfileOptions& options = {});

}  // namespace dpamp::accounting
