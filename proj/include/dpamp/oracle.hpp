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

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dpamp/amplification.hpp"
#include "dpamp/divergence.hpp"
#include "dpamp/numeric.hpp"

namespace dpamp::oracle {

// Hard caps that keep every oracle computation exact.
inline constexpr int kMaxUniverse = 12;
inline constexpr int kMaxAlphabet = 8;

// Elements are indices into the instance's universe. Batches are sorted
// element vectors: strictly increasing for sets, nondecreasing for the
// multisets of subsampling with replacement.
using Element = int;
using Batch = std::vector<Element>;

enum class BatchRelation { kInsertionRemoval, kSubstitution };

// A finite base mechanism: a pmf over a small output alphabet per batch.
struct DiscreteBaseMechanism {
  std::vector<std::string> alphabet;
  std::map<Batch, std::vector<double>> table;

  void validate() const;  // pmfs sum to 1 within 1e-15, sizes match
  const std::vector<double>& pmf(const Batch& batch) const;
};

// A fully enumerable dataset / base-mechanism / scheme triple.
struct DiscreteInstance {
  std::vector<std::string> universe;
  Batch dataset_x;
  Batch dataset_x_prime;
  amplification::SubsamplingScheme scheme;
  BatchRelation relation = BatchRelation::kInsertionRemoval;
  DiscreteBaseMechanism base;

  void validate() const;
};

// Exact batch pmf of the subsampling scheme applied to `dataset`.
// Poisson, without-replacement, and with-replacement schemes; the
// permute-and-partition scheme is handled by epoch_exact_log_moment below.
std::map<Batch, double> subsample_distribution(const DiscreteInstance& inst,
                                               const Batch& dataset);

// Exact output pmf of the subsampled mechanism on `dataset`.
std::vector<double> mixture_output_distribution(const DiscreteInstance& inst,
                                                const Batch& dataset);

// Exact H_alpha or Lambda_alpha between the two dataset mixtures.
double exact_divergence(const DiscreteInstance& inst, double alpha,
                        divergence::Kind kind);

// Pairwise induced distances over an enumerated batch space, computed by
// breadth-first search under the relation's single-step moves (never by
// formula, so hybrid relations remain checkable).
class BatchSpace {
 public:
  // Set-valued spaces (Poisson / WOR): all subsets of the universe.
  static BatchSpace AllSubsets(int universe_size, BatchRelation relation);
  // Multiset spaces (WR): all multisets of the given size under substitution.
  static BatchSpace Multisets(int universe_size, int batch_size);

  int distance(const Batch& a, const Batch& b) const;
  int distance_to_set(const Batch& a, const std::vector<Batch>& set) const;
  int set_distance(const std::vector<Batch>& a,
                   const std::vector<Batch>& b) const;

 private:
  BatchSpace() = default;
  std::vector<Batch> batches_;
  std::map<Batch, int> index_;
  std::vector<std::vector<int>> dist_;
};

// A simultaneous coupling between I + J conditional subsampling
// distributions. Events enter through their probabilities and conditional
// pmfs (whose supports define the sets that distance compatibility checks).
struct Coupling {
  int left_arity = 0;   // I
  int right_arity = 0;  // J
  std::map<std::vector<Batch>, double> support;
  std::vector<double> left_event_probs;   // Pr[S(x) in A_i]
  std::vector<double> right_event_probs;  // Pr[S(x') in E_j]
  std::vector<std::map<Batch, double>> marginals;  // length I + J
};

struct CheckReport {
  bool ok = true;
  std::vector<std::string> violations;
};

// True iff every marginal of the support matches its target pmf within
// 1e-12 and the support sums to 1.
CheckReport check_coupling_valid(const Coupling& coupling,
                                 const std::vector<std::map<Batch, double>>&
                                     marginals);

// True iff every support tuple attains the minimal batch-to-support and
// support-to-support distances (reference index 1, i.e. tuple position 0).
CheckReport check_distance_compatible(const Coupling& coupling,
                                      const BatchSpace& space);

// Right-hand side of the conditional transport bound: the gamma-weighted sum
// of exact conditional-mixture divergences.
double transport_bound_value(const Coupling& coupling,
                             const DiscreteInstance& inst, double alpha,
                             divergence::Kind kind);

// The canonical group coupling: sample the unmodified part, then add the
// removed / inserted elements in uniformly random order. Requires a Poisson
// instance under insertion/removal.
Coupling canonical_group_coupling(const DiscreteInstance& inst);

// Conditioning on one event per batch; the bound then equals the exact
// divergence.
Coupling per_batch_coupling(const DiscreteInstance& inst);

// A randomized valid coupling between the canonical conditionals: the
// independent product coupling perturbed by marginal-preserving swaps.
Coupling randomized_group_coupling(const DiscreteInstance& inst,
                                   numeric::SplitMix64& rng, int swaps = 32);

// A deliberately broken coupling (support mass shuffled between tuples) for
// negative tests.
Coupling shuffled_coupling(Coupling coupling, numeric::SplitMix64& rng);

// Poisson randomized-response instance whose exact divergence attains the
// closed-form group bound: h(y) is 1 when y contains no modified element or
// any removed element, and 0 when it contains an inserted one.
DiscreteInstance rr_worst_case_instance(double rate, double theta, int k_plus,
                                        int k_minus);

// WOR randomized-response instance under substitution attaining the tight
// subsampled randomized-response bound.
DiscreteInstance rr_wor_worst_case_instance(double theta, int dataset_size,
                                            int batch_size);

// Randomized small Poisson group instance (for soundness sweeps).
DiscreteInstance random_group_instance(numeric::SplitMix64& rng,
                                       int max_universe = 6,
                                       int max_alphabet = 3);

// Exact log Lambda_alpha of the 2-fold permute-and-partition composition
// (scheme tag kPermutePartition, |x| = 2N <= 8); outputs live on the product
// alphabet.
double epoch_exact_log_moment(const DiscreteInstance& inst, double alpha);

// Instance fixtures as JSON ({universe, x, x_prime, scheme, relation, base})
// for regression tests.
nlohmann::json instance_to_json(const DiscreteInstance& inst);
DiscreteInstance instance_from_json(const nlohmann::json& doc);

}  // namespace dpamp::oracle
