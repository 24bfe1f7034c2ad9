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

#include <string>
#include <vector>

#include "dpamp/curves.hpp"
#include "dpamp/divergence.hpp"
#include "dpamp/mixtures.hpp"

namespace dpamp::amplification {

struct SubsamplingScheme {
  enum class Tag { kPoisson, kWithoutReplacement, kWithReplacement,
                   kPermutePartition };

  Tag tag = Tag::kPoisson;
  double rate = 0;       // Poisson inclusion probability
  int dataset_size = 0;  // N (for permute-and-partition: half of 2N)
  int batch_size = 0;    // q

  static SubsamplingScheme Poisson(double rate);
  static SubsamplingScheme WithoutReplacement(int dataset_size, int batch_size);
  static SubsamplingScheme WithReplacement(int dataset_size, int batch_size);
  static SubsamplingScheme PermutePartition(int half_size);
};

// The "insert K+, remove K-" relation between datasets.
struct GroupRelation {
  int k_plus = 0;
  int k_minus = 0;
  int total() const { return k_plus + k_minus; }
};

struct BaseMechanismSpec {
  enum class Tag { kGaussian, kLaplace, kRandomizedResponse };

  Tag tag = Tag::kGaussian;
  double noise_scale = 0;  // sigma or lambda
  double sensitivity = 0;  // L2 or L1
  double theta = 0;        // randomized-response true response probability

  static BaseMechanismSpec Gaussian(double sigma, double l2_sensitivity = 1.0);
  static BaseMechanismSpec Laplace(double lambda, double l1_sensitivity = 1.0);
  static BaseMechanismSpec RandomizedResponse(double theta);

  bool continuous() const { return tag != Tag::kRandomizedResponse; }
  // Noise scale in unit-sensitivity coordinates (sigma / L2 or lambda / L1).
  double scaled_noise() const { return noise_scale / sensitivity; }
  mixtures::ComponentFamily family() const;
};

// One or more candidate mixture pairs; the guarantee is the pointwise
// maximum of the per-pair divergence.
struct BoundCandidateSet {
  std::vector<divergence::CandidatePair> pairs;
  std::string provenance;
  std::vector<GroupRelation> relation_splits;
};

struct AmplificationSetting {
  BaseMechanismSpec mechanism;
  SubsamplingScheme scheme;
};

struct EpsilonDelta {
  double epsilon = 0;
  double delta = 0;
};

// Exponentiated Renyi moment carried in log space so that large orders do
// not overflow; rho(alpha) = log_value / (alpha - 1).
struct RenyiMoment {
  double log_value = 0;
  double value() const;
  double rdp_rho(double alpha) const;
};

// Dominating mixture pairs for Poisson subsampling under the
// "insert K+, remove K-" relation. Gaussian and Laplace yield a single pair
// of (K- + 1)- and (K+ + 1)-component mixtures; randomized response yields
// two candidates (tau = theta and tau = 1 - theta).
BoundCandidateSet poisson_group_pair(const BaseMechanismSpec& mech, double rate,
                                     GroupRelation relation);

// max over all (K+, K-) with K+ + K- = group_size of the candidate-set
// divergence at this order.
divergence::DivergenceValue group_bound(const BaseMechanismSpec& mech,
                                        double rate, int group_size,
                                        double alpha, divergence::Kind kind,
                                        const divergence::EvalOptions& options = {});

// Relaxed dominating pair for subsampling without replacement under
// substitution: the group pair with K+ = K- = 1 and rate q / N.
BoundCandidateSet wor_substitution_pair(const BaseMechanismSpec& mech, int N,
                                        int q);

// Privacy profile for subsampling without replacement under substitution:
// H_alpha((1-w) q + w p || q) for alpha >= 1 and H_alpha(p || (1-w) p + w q)
// for alpha < 1, with w = q / N and (p, q) the mechanism's worst-case
// substitution pair.
double wor_substitution_profile(const BaseMechanismSpec& mech, int N, int q,
                                double epsilon,
                                const divergence::EvalOptions& options = {});

// Dominating pair for subsampling with replacement under substitution:
// (q + 1)-component mixtures at means 0..q and 0..-q with binomial weights
// Binom(i | q, 1/N). Continuous mechanisms only.
BoundCandidateSet wr_substitution_pair(const BaseMechanismSpec& mech, int N,
                                       int q);

// Tight mechanism-agnostic group ADP: epsilon' = log(1 + w (e^eps - 1)) with
// w = 1 - (1-r)^K, delta' = sum_k Binom(k | K, r) delta_k, where delta_k is
// the mechanism's hockey stick at sensitivity k ("white-box" profiles;
// delta_k = delta_1 for randomized response).
EpsilonDelta balle_group_adp(const BaseMechanismSpec& mech, double rate, int K,
                             double epsilon);

// Tight mechanism-agnostic group RDP via binomial expansion (integer
// alpha >= 2). The conventional factor 2 is omitted unless requested.
RenyiMoment agnostic_group_rdp(const BaseMechanismSpec& mech, double rate,
                               int K, int alpha, bool include_factor2 = false);

// Poisson subsampling RDP baseline via the alternative decomposition
// (integer alpha >= 2); factor 2 omitted unless requested.
RenyiMoment zhu_poisson_rdp(const BaseMechanismSpec& mech, double rate,
                            int alpha, bool include_factor2 = false);

// Subsampling without replacement / substitution RDP baseline:
// 1 + 2 sum_{l=2}^alpha C(alpha, l) w^l max Lambda_l, w = q / N.
RenyiMoment wang_wor_rdp(const BaseMechanismSpec& mech, int N, int q,
                         int alpha);

// Tight subsampled randomized response under substitution: exact two-outcome
// sums maximized over tau in {theta, 1 - theta}; any real alpha > 1.
RenyiMoment rr_wor_tight_rdp(double theta, int N, int q, double alpha);

// Subsampling without replacement under insertion/removal: scans dataset
// sizes N in (q_min, n_max] and keeps the worst bound. The distance-2 inner
// terms double the sensitivity.
RenyiMoment wor_insertion_removal_rdp(const BaseMechanismSpec& mech, int q_min,
                                      int q, int alpha, int n_max = -1);

// Hybrid relation (dataset substitution, batch insertion/removal):
// wang_wor_rdp with distance-2 inner terms.
RenyiMoment hybrid_wor_substitution_rdp(const BaseMechanismSpec& mech, int N,
                                        int q, int alpha);

// Node-level WOR group RDP: sum_k HyperGeom(k | N, K, q) Lambda_alpha at
// substitution distance k; any real alpha > 1.
RenyiMoment node_group_wor_rdp(const BaseMechanismSpec& mech, int N, int K,
                               int q, double alpha);

// Epoch-level permute-and-partition bound for 2-fold non-adaptive
// composition. `conditional` selects the symmetrized-product-mixture bound;
// otherwise the base mechanism's worst-case moment is returned unchanged.
// Gaussian bases use means in {0, 1}; randomized response is exact.
RenyiMoment epoch_permute_partition_rdp(const BaseMechanismSpec& mech,
                                        double alpha, bool conditional = true,
                                        double quadrature_tol = 1e-10);

// Post-hoc group privacy for ADP: (K eps, sum_{k=0}^{K-1} e^{k eps} delta),
// delta' clipped to 1.
EpsilonDelta posthoc_group_adp(double epsilon, double delta, int K);

// Post-hoc group privacy for RDP via the Renyi triangle inequality
// D_alpha <= (alpha - 1/2)/(alpha - 1) D_{2 alpha} + alpha/(alpha-1)
// D_{2 alpha - 1}, applied log2(K) times. Points whose doubled orders are
// not covered by the input curve are dropped. K must be a power of two.
curves::RdpCurve posthoc_group_rdp(const curves::RdpCurve& curve, int K);

}  // namespace dpamp::amplification
