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
#include "dpamp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dpamp/errors.hpp"

namespace dpamp::oracle {

namespace {

using amplification::SubsamplingScheme;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPmfTol = 1e-15;
constexpr double kMarginalTol = 1e-12;

bool IsSet(const Batch& batch) {
  return std::adjacent_find(batch.begin(), batch.end(),
                            std::greater_equal<Element>()) == batch.end();
}

std::vector<Batch> AllSubsetsOf(const Batch& elements) {
  std::vector<Batch> out;
  const std::size_t n = elements.size();
  out.reserve(std::size_t{1} << n);
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    Batch y;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) y.push_back(elements[i]);
    }
    out.push_back(std::move(y));
  }
  return out;
}

void KSubsetsRec(const Batch& elements, std::size_t start, int remaining,
                 Batch& current, std::vector<Batch>& out) {
  if (remaining == 0) {
    out.push_back(current);
    return;
  }
  for (std::size_t i = start;
       i + static_cast<std::size_t>(remaining) <= elements.size(); ++i) {
    current.push_back(elements[i]);
    KSubsetsRec(elements, i + 1, remaining - 1, current, out);
    current.pop_back();
  }
}

std::vector<Batch> KSubsetsOf(const Batch& elements, int k) {
  std::vector<Batch> out;
  Batch current;
  KSubsetsRec(elements, 0, k, current, out);
  return out;
}

void MultisetsRec(const Batch& elements, std::size_t start, int remaining,
                  Batch& current, std::vector<Batch>& out) {
  if (remaining == 0) {
    out.push_back(current);
    return;
  }
  for (std::size_t i = start; i < elements.size(); ++i) {
    current.push_back(elements[i]);
    MultisetsRec(elements, i, remaining - 1, current, out);
    current.pop_back();
  }
}

std::vector<Batch> MultisetsOf(const Batch& elements, int k) {
  std::vector<Batch> out;
  Batch current;
  MultisetsRec(elements, 0, k, current, out);
  return out;
}

Batch SetDifference(const Batch& a, const Batch& b) {
  Batch out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return out;
}

Batch SetUnion(const Batch& a, const Batch& b) {
  Batch out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

std::size_t IntersectionSize(const Batch& a, const Batch& b) {
  Batch out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out.size();
}

double ExactDivergenceOfPmfs(const std::vector<double>& p,
                             const std::vector<double>& q, double alpha,
                             divergence::Kind kind) {
  if (kind == divergence::Kind::kHockeyStick) {
    double value = 0;
    for (std::size_t z = 0; z < p.size(); ++z) {
      value += std::max(p[z] - alpha * q[z], 0.0);
    }
    return value;
  }
  if (!(alpha > 1)) throw InvalidArgumentError("Renyi moment needs alpha > 1");
  double value = 0;
  for (std::size_t z = 0; z < p.size(); ++z) {
    if (p[z] == 0) continue;
    if (q[z] == 0) return kInf;
    value += std::pow(p[z], alpha) * std::pow(q[z], 1.0 - alpha);
  }
  return value;
}

}  // namespace

void DiscreteBaseMechanism::validate() const {
  if (alphabet.empty() || alphabet.size() > kMaxAlphabet) {
    throw SizeLimitError("output alphabet must have 1..8 symbols");
  }
  if (table.empty()) throw InvalidArgumentError("base mechanism table empty");
  for (const auto& [batch, pmf] : table) {
    if (pmf.size() != alphabet.size()) {
      throw InvalidArgumentError("pmf size does not match alphabet");
    }
    double sum = 0;
    for (double v : pmf) {
      if (!(v >= 0)) throw InvalidArgumentError("pmf entries must be >= 0");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kPmfTol) {
      throw InvalidArgumentError("base mechanism pmf must sum to 1");
    }
  }
}

const std::vector<double>& DiscreteBaseMechanism::pmf(const Batch& batch) const {
  auto it = table.find(batch);
  if (it == table.end()) {
    throw InvalidArgumentError("base mechanism table has no entry for batch");
  }
  return it->second;
}

void DiscreteInstance::validate() const {
  if (universe.empty() || universe.size() > kMaxUniverse) {
    throw SizeLimitError("universe must have 1..12 elements");
  }
  for (const Batch* d : {&dataset_x, &dataset_x_prime}) {
    if (!IsSet(*d)) throw InvalidArgumentError("datasets must be sorted sets");
    for (Element e : *d) {
      if (e < 0 || e >= static_cast<Element>(universe.size())) {
        throw InvalidArgumentError("dataset element outside the universe");
      }
    }
  }
  base.validate();
}

std::map<Batch, double> subsample_distribution(const DiscreteInstance& inst,
                                               const Batch& dataset) {
  inst.validate();
  std::map<Batch, double> out;
  switch (inst.scheme.tag) {
    case SubsamplingScheme::Tag::kPoisson: {
      const double r = inst.scheme.rate;
      const int n = static_cast<int>(dataset.size());
      for (auto& y : AllSubsetsOf(dataset)) {
        const int k = static_cast<int>(y.size());
        const double prob = std::pow(r, k) * std::pow(1.0 - r, n - k);
        out[std::move(y)] = prob;
      }
      break;
    }
    case SubsamplingScheme::Tag::kWithoutReplacement: {
      const int q = inst.scheme.batch_size;
      if (q > static_cast<int>(dataset.size())) {
        throw InvalidArgumentError("batch size exceeds dataset size");
      }
      auto batches = KSubsetsOf(dataset, q);
      const double prob = 1.0 / static_cast<double>(batches.size());
      for (auto& y : batches) out[std::move(y)] = prob;
      break;
    }
    case SubsamplingScheme::Tag::kWithReplacement: {
      const int q = inst.scheme.batch_size;
      auto batches = MultisetsOf(dataset, q);
      if (batches.size() > 20000) {
        throw SizeLimitError("with-replacement batch space too large");
      }
      const double prob = 1.0 / static_cast<double>(batches.size());
      for (auto& y : batches) out[std::move(y)] = prob;
      break;
    }
    case SubsamplingScheme::Tag::kPermutePartition:
      throw UnsupportedError(
          "permute-and-partition is enumerated by epoch_exact_log_moment");
  }
  return out;
}

std::vector<double> mixture_output_distribution(const DiscreteInstance& inst,
                                                const Batch& dataset) {
  const auto weights = subsample_distribution(inst, dataset);
  std::vector<double> out(inst.base.alphabet.size(), 0.0);
  for (const auto& [batch, weight] : weights) {
    const auto& pmf = inst.base.pmf(batch);
    for (std::size_t z = 0; z < out.size(); ++z) out[z] += weight * pmf[z];
  }
  return out;
}

double exact_divergence(const DiscreteInstance& inst, double alpha,
                        divergence::Kind kind) {
  const auto p = mixture_output_distribution(inst, inst.dataset_x);
  const auto q = mixture_output_distribution(inst, inst.dataset_x_prime);
  return ExactDivergenceOfPmfs(p, q, alpha, kind);
}

BatchSpace BatchSpace::AllSubsets(int universe_size, BatchRelation relation) {
  if (universe_size < 1 || universe_size > kMaxUniverse) {
    throw SizeLimitError("universe must have 1..12 elements");
  }
  Batch all(universe_size);
  std::iota(all.begin(), all.end(), 0);
  BatchSpace space;
  space.batches_ = AllSubsetsOf(all);
  for (std::size_t i = 0; i < space.batches_.size(); ++i) {
    space.index_[space.batches_[i]] = static_cast<int>(i);
  }
  // Single-step moves.
  const int n = static_cast<int>(space.batches_.size());
  std::vector<std::vector<int>> adjacency(n);
  for (int i = 0; i < n; ++i) {
    const Batch& y = space.batches_[i];
    for (Element e = 0; e < universe_size; ++e) {
      const bool contains = std::binary_search(y.begin(), y.end(), e);
      if (relation == BatchRelation::kInsertionRemoval) {
        Batch other = contains ? SetDifference(y, {e}) : SetUnion(y, {e});
        adjacency[i].push_back(space.index_.at(other));
      } else if (!contains) {
        // Substitution: swap one member for e.
        for (Element member : y) {
          Batch other = SetUnion(SetDifference(y, {member}), {e});
          adjacency[i].push_back(space.index_.at(other));
        }
      }
    }
  }
  space.dist_.assign(n, std::vector<int>(n, -1));
  for (int start = 0; start < n; ++start) {
    auto& dist = space.dist_[start];
    std::deque<int> queue = {start};
    dist[start] = 0;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : adjacency[u]) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          queue.push_back(v);
        }
      }
    }
  }
  return space;
}

BatchSpace BatchSpace::Multisets(int universe_size, int batch_size) {
  if (universe_size < 1 || universe_size > kMaxUniverse) {
    throw SizeLimitError("universe must have 1..12 elements");
  }
  Batch all(universe_size);
  std::iota(all.begin(), all.end(), 0);
  BatchSpace space;
  space.batches_ = MultisetsOf(all, batch_size);
  if (space.batches_.size() > 20000) {
    throw SizeLimitError("multiset batch space too large");
  }
  const int n = static_cast<int>(space.batches_.size());
  for (int i = 0; i < n; ++i) space.index_[space.batches_[i]] = i;
  std::vector<std::vector<int>> adjacency(n);
  for (int i = 0; i < n; ++i) {
    const Batch& y = space.batches_[i];
    for (std::size_t pos = 0; pos < y.size(); ++pos) {
      for (Element e = 0; e < universe_size; ++e) {
        Batch other = y;
        other[pos] = e;
        std::sort(other.begin(), other.end());
        if (other != y) adjacency[i].push_back(space.index_.at(other));
      }
    }
  }
  space.dist_.assign(n, std::vector<int>(n, -1));
  for (int start = 0; start < n; ++start) {
    auto& dist = space.dist_[start];
    std::deque<int> queue = {start};
    dist[start] = 0;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : adjacency[u]) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          queue.push_back(v);
        }
      }
    }
  }
  return space;
}

int BatchSpace::distance(const Batch& a, const Batch& b) const {
  auto ia = index_.find(a);
  auto ib = index_.find(b);
  if (ia == index_.end() || ib == index_.end()) {
    throw InvalidArgumentError("batch outside the enumerated space");
  }
  return dist_[ia->second][ib->second];
}

int BatchSpace::distance_to_set(const Batch& a,
                                const std::vector<Batch>& set) const {
  int best = std::numeric_limits<int>::max();
  for (const auto& b : set) best = std::min(best, distance(a, b));
  return best;
}

int BatchSpace::set_distance(const std::vector<Batch>& a,
                             const std::vector<Batch>& b) const {
  int best = std::numeric_limits<int>::max();
  for (const auto& x : a) best = std::min(best, distance_to_set(x, b));
  return best;
}

CheckReport check_coupling_valid(
    const Coupling& coupling,
    const std::vector<std::map<Batch, double>>& marginals) {
  CheckReport report;
  const int arity = coupling.left_arity + coupling.right_arity;
  if (static_cast<int>(marginals.size()) != arity) {
    report.ok = false;
    report.violations.push_back("marginal count does not match arity");
    return report;
  }
  double total = 0;
  for (const auto& [tuple, prob] : coupling.support) {
    if (static_cast<int>(tuple.size()) != arity) {
      report.ok = false;
      report.violations.push_back("support tuple arity mismatch");
      return report;
    }
    if (prob < 0) {
      report.ok = false;
      report.violations.push_back("negative coupling probability");
    }
    total += prob;
  }
  if (std::abs(total - 1.0) > kMarginalTol) {
    report.ok = false;
    report.violations.push_back("coupling mass is " + std::to_string(total));
  }
  for (int n = 0; n < arity; ++n) {
    std::map<Batch, double> marginal;
    for (const auto& [tuple, prob] : coupling.support) {
      marginal[tuple[n]] += prob;
    }
    for (const auto& [batch, prob] : marginals[n]) {
      const double got = marginal.count(batch) ? marginal.at(batch) : 0.0;
      if (std::abs(got - prob) > kMarginalTol) {
        report.ok = false;
        std::ostringstream os;
        os << "marginal " << n << " mismatch at batch index vector (got "
           << got << ", want " << prob << ")";
        report.violations.push_back(os.str());
      }
    }
    for (const auto& [batch, prob] : marginal) {
      if (prob > kMarginalTol && marginals[n].count(batch) == 0) {
        report.ok = false;
        report.violations.push_back("marginal " + std::to_string(n) +
                                    " has mass outside the target support");
      }
    }
  }
  return report;
}

CheckReport check_distance_compatible(const Coupling& coupling,
                                      const BatchSpace& space) {
  CheckReport report;
  const int arity = coupling.left_arity + coupling.right_arity;
  std::vector<std::vector<Batch>> supports(arity);
  for (int n = 0; n < arity; ++n) {
    for (const auto& [batch, prob] : coupling.marginals[n]) {
      if (prob > 0) supports[n].push_back(batch);
    }
  }
  for (const auto& [tuple, prob] : coupling.support) {
    if (prob <= 0) continue;
    // Reference index 1 (tuple position 0): the batch itself against the
    // other supports.
    for (int u = 1; u < arity; ++u) {
      const int got = space.distance(tuple[0], tuple[u]);
      const int want = space.distance_to_set(tuple[0], supports[u]);
      if (got != want) {
        report.ok = false;
        std::ostringstream os;
        os << "tuple position " << u << ": distance " << got
           << " != minimal distance " << want;
        report.violations.push_back(os.str());
      }
    }
    for (int t = 1; t < arity; ++t) {
      for (int u = t + 1; u < arity; ++u) {
        const int got = space.distance(tuple[t], tuple[u]);
        const int want = space.set_distance(supports[t], supports[u]);
        if (got != want) {
          report.ok = false;
          std::ostringstream os;
          os << "tuple positions (" << t << "," << u << "): distance " << got
             << " != minimal support distance " << want;
          report.violations.push_back(os.str());
        }
      }
    }
    if (!report.ok && report.violations.size() > 16) break;
  }
  return report;
}

double transport_bound_value(const Coupling& coupling,
                             const DiscreteInstance& inst, double alpha,
                             divergence::Kind kind) {
  const std::size_t alphabet = inst.base.alphabet.size();
  double bound = 0;
  for (const auto& [tuple, prob] : coupling.support) {
    if (prob <= 0) continue;
    std::vector<double> p(alphabet, 0.0);
    std::vector<double> q(alphabet, 0.0);
    for (int i = 0; i < coupling.left_arity; ++i) {
      const auto& pmf = inst.base.pmf(tuple[i]);
      for (std::size_t z = 0; z < alphabet; ++z) {
        p[z] += coupling.left_event_probs[i] * pmf[z];
      }
    }
    for (int j = 0; j < coupling.right_arity; ++j) {
      const auto& pmf = inst.base.pmf(tuple[coupling.left_arity + j]);
      for (std::size_t z = 0; z < alphabet; ++z) {
        q[z] += coupling.right_event_probs[j] * pmf[z];
      }
    }
    bound += prob * ExactDivergenceOfPmfs(p, q, alpha, kind);
  }
  return bound;
}

namespace {

struct GroupDecomposition {
  Batch removed;   // g- = x \ x'
  Batch inserted;  // g+ = x' \ x
  Batch common;    // x intersect x'
};

GroupDecomposition DecomposeGroup(const DiscreteInstance& inst) {
  GroupDecomposition d;
  d.removed = SetDifference(inst.dataset_x, inst.dataset_x_prime);
  d.inserted = SetDifference(inst.dataset_x_prime, inst.dataset_x);
  d.common = SetDifference(inst.dataset_x, d.removed);
  return d;
}

// Conditional pmfs s_x(. | "i removed elements sampled") and their event
// probabilities, for both datasets.
struct GroupConditionals {
  std::vector<double> left_probs;
  std::vector<double> right_probs;
  std::vector<std::map<Batch, double>> marginals;  // left then right
};

GroupConditionals GroupEventConditionals(const DiscreteInstance& inst,
                                         const GroupDecomposition& d) {
  const int k_minus = static_cast<int>(d.removed.size());
  const int k_plus = static_cast<int>(d.inserted.size());
  GroupConditionals out;
  const auto sx = subsample_distribution(inst, inst.dataset_x);
  const auto sx_prime = subsample_distribution(inst, inst.dataset_x_prime);
  out.left_probs.assign(k_minus + 1, 0.0);
  out.right_probs.assign(k_plus + 1, 0.0);
  std::vector<std::map<Batch, double>> left(k_minus + 1), right(k_plus + 1);
  for (const auto& [y, prob] : sx) {
    const int i = static_cast<int>(IntersectionSize(y, d.removed));
    out.left_probs[i] += prob;
    left[i][y] += prob;
  }
  for (const auto& [y, prob] : sx_prime) {
    const int j = static_cast<int>(IntersectionSize(y, d.inserted));
    out.right_probs[j] += prob;
    right[j][y] += prob;
  }
  for (int i = 0; i <= k_minus; ++i) {
    for (auto& [y, prob] : left[i]) prob /= out.left_probs[i];
  }
  for (int j = 0; j <= k_plus; ++j) {
    for (auto& [y, prob] : right[j]) prob /= out.right_probs[j];
  }
  out.marginals = std::move(left);
  for (auto& m : right) out.marginals.push_back(std::move(m));
  return out;
}

void RequirePoissonGroupInstance(const DiscreteInstance& inst) {
  if (inst.scheme.tag != SubsamplingScheme::Tag::kPoisson ||
      inst.relation != BatchRelation::kInsertionRemoval) {
    throw UnsupportedError(
        "group couplings require a Poisson instance under insertion/removal");
  }
}

}  // namespace

Coupling canonical_group_coupling(const DiscreteInstance& inst) {
  RequirePoissonGroupInstance(inst);
  const auto d = DecomposeGroup(inst);
  const int k_minus = static_cast<int>(d.removed.size());
  const int k_plus = static_cast<int>(d.inserted.size());
  if (k_minus + k_plus < 1) {
    throw InvalidArgumentError("datasets must differ");
  }
  auto conditionals = GroupEventConditionals(inst, d);

  Coupling coupling;
  coupling.left_arity = k_minus + 1;
  coupling.right_arity = k_plus + 1;
  coupling.left_event_probs = conditionals.left_probs;
  coupling.right_event_probs = conditionals.right_probs;
  coupling.marginals = conditionals.marginals;

  // Base batches: Poisson draws from the unmodified elements, extended by
  // all orders in which the removed / inserted elements can be added.
  const double r = inst.scheme.rate;
  std::vector<Batch> perm_minus, perm_plus;
  {
    Batch p = d.removed;
    do {
      perm_minus.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    Batch q = d.inserted;
    do {
      perm_plus.push_back(q);
    } while (std::next_permutation(q.begin(), q.end()));
  }
  const double perm_weight =
      1.0 / (static_cast<double>(perm_minus.size()) * perm_plus.size());
  for (const auto& base : AllSubsetsOf(d.common)) {
    const double base_prob =
        std::pow(r, base.size()) *
        std::pow(1.0 - r, d.common.size() - base.size());
    for (const auto& pm : perm_minus) {
      for (const auto& pp : perm_plus) {
        std::vector<Batch> tuple;
        tuple.reserve(k_minus + k_plus + 2);
        Batch current = base;
        tuple.push_back(current);
        for (Element e : pm) {
          current = SetUnion(current, {e});
          tuple.push_back(current);
        }
        current = base;
        tuple.push_back(current);
        for (Element e : pp) {
          current = SetUnion(current, {e});
          tuple.push_back(current);
        }
        coupling.support[std::move(tuple)] += base_prob * perm_weight;
      }
    }
  }
  return coupling;
}

Coupling per_batch_coupling(const DiscreteInstance& inst) {
  const auto sx = subsample_distribution(inst, inst.dataset_x);
  const auto sx_prime = subsample_distribution(inst, inst.dataset_x_prime);
  Coupling coupling;
  coupling.left_arity = static_cast<int>(sx.size());
  coupling.right_arity = static_cast<int>(sx_prime.size());
  std::vector<Batch> tuple;
  for (const auto& [y, prob] : sx) {
    coupling.left_event_probs.push_back(prob);
    coupling.marginals.push_back({{y, 1.0}});
    tuple.push_back(y);
  }
  for (const auto& [y, prob] : sx_prime) {
    coupling.right_event_probs.push_back(prob);
    coupling.marginals.push_back({{y, 1.0}});
    tuple.push_back(y);
  }
  coupling.support[tuple] = 1.0;
  return coupling;
}

Coupling randomized_group_coupling(const DiscreteInstance& inst,
                                   numeric::SplitMix64& rng, int swaps) {
  RequirePoissonGroupInstance(inst);
  const auto d = DecomposeGroup(inst);
  auto conditionals = GroupEventConditionals(inst, d);
  const int arity = static_cast<int>(conditionals.marginals.size());

  Coupling coupling;
  coupling.left_arity = static_cast<int>(conditionals.left_probs.size());
  coupling.right_arity = static_cast<int>(conditionals.right_probs.size());
  coupling.left_event_probs = conditionals.left_probs;
  coupling.right_event_probs = conditionals.right_probs;
  coupling.marginals = conditionals.marginals;

  // Independent product coupling.
  std::vector<std::vector<std::pair<Batch, double>>> atoms(arity);
  for (int n = 0; n < arity; ++n) {
    for (const auto& [y, prob] : coupling.marginals[n]) {
      atoms[n].push_back({y, prob});
    }
  }
  std::vector<std::size_t> cursor(arity, 0);
  std::vector<std::pair<std::vector<Batch>, double>> entries;
  while (true) {
    std::vector<Batch> tuple;
    double prob = 1.0;
    for (int n = 0; n < arity; ++n) {
      tuple.push_back(atoms[n][cursor[n]].first);
      prob *= atoms[n][cursor[n]].second;
    }
    entries.push_back({std::move(tuple), prob});
    int pos = arity - 1;
    while (pos >= 0 && ++cursor[pos] == atoms[pos].size()) {
      cursor[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }

  // Marginal-preserving swaps: exchanging coordinate values between two
  // tuples leaves every single-coordinate marginal unchanged.
  for (int s = 0; s < swaps && entries.size() > 1; ++s) {
    const std::size_t i = rng.NextBelow(entries.size());
    const std::size_t j = rng.NextBelow(entries.size());
    if (i == j) continue;
    const double move = std::min(entries[i].second, entries[j].second) *
                        rng.NextDouble();
    if (move <= 0) continue;
    std::vector<Batch> a = entries[i].first;
    std::vector<Batch> b = entries[j].first;
    for (int n = 0; n < arity; ++n) {
      if (rng.NextBelow(2) == 1) std::swap(a[n], b[n]);
    }
    entries[i].second -= move;
    entries[j].second -= move;
    entries.push_back({std::move(a), move});
    entries.push_back({std::move(b), move});
  }
  for (auto& [tuple, prob] : entries) {
    if (prob > 0) coupling.support[tuple] += prob;
  }
  return coupling;
}

Coupling shuffled_coupling(Coupling coupling, numeric::SplitMix64& rng) {
  // Move a chunk of mass from one support tuple onto a cyclic shift of
  // itself, which breaks the marginals whenever the tuple is not constant.
  std::vector<std::vector<Batch>> tuples;
  for (const auto& [tuple, prob] : coupling.support) tuples.push_back(tuple);
  for (int attempt = 0; attempt < 64; ++attempt) {
    const auto& tuple = tuples[rng.NextBelow(tuples.size())];
    std::vector<Batch> rotated(tuple.begin() + 1, tuple.end());
    rotated.push_back(tuple.front());
    if (rotated == tuple) continue;
    const double mass = coupling.support[tuple];
    coupling.support[tuple] = mass / 2;
    coupling.support[rotated] += mass / 2;
    return coupling;
  }
  throw InvalidArgumentError("could not shuffle a constant coupling");
}

DiscreteInstance rr_worst_case_instance(double rate, double theta, int k_plus,
                                        int k_minus) {
  if (k_plus + k_minus < 1) {
    throw InvalidArgumentError("group relation must modify something");
  }
  if (k_plus + k_minus > kMaxUniverse) {
    throw SizeLimitError("group too large for exact enumeration");
  }
  DiscreteInstance inst;
  for (int i = 0; i < k_minus; ++i) {
    inst.universe.push_back("r" + std::to_string(i));
  }
  for (int i = 0; i < k_plus; ++i) {
    inst.universe.push_back("i" + std::to_string(i));
  }
  Batch removed, inserted;
  for (int i = 0; i < k_minus; ++i) removed.push_back(i);
  for (int i = 0; i < k_plus; ++i) inserted.push_back(k_minus + i);
  inst.dataset_x = removed;
  inst.dataset_x_prime = inserted;
  inst.scheme = SubsamplingScheme::Poisson(rate);
  inst.relation = BatchRelation::kInsertionRemoval;
  inst.base.alphabet = {"0", "1"};
  Batch all;
  for (int i = 0; i < k_minus + k_plus; ++i) all.push_back(i);
  // The divergence-maximizing response flips on the side with the larger
  // mixing weight 1 - (1-r)^K: batches touching that side answer with the
  // opposite probability, everything else answers truthfully. For orders
  // alpha >= 1 this realizes the maximizing tau of the closed-form bound.
  const bool flip_on_removed = k_minus >= k_plus;
  for (const auto& y : AllSubsetsOf(all)) {
    const bool touches_removed = IntersectionSize(y, removed) > 0;
    const bool touches_inserted = IntersectionSize(y, inserted) > 0;
    int h = 1;
    if (flip_on_removed) {
      if (touches_removed) h = 0;
    } else {
      if (touches_inserted && !touches_removed) h = 0;
    }
    const double success = h == 1 ? theta : 1.0 - theta;
    inst.base.table[y] = {1.0 - success, success};
  }
  return inst;
}

DiscreteInstance rr_wor_worst_case_instance(double theta, int dataset_size,
                                            int batch_size) {
  if (dataset_size + 1 > kMaxUniverse) {
    throw SizeLimitError("dataset too large for exact enumeration");
  }
  if (batch_size < 1 || batch_size > dataset_size) {
    throw InvalidArgumentError("need 1 <= q <= N");
  }
  DiscreteInstance inst;
  // Element 0 is the substituted element a; the last element is a'.
  for (int i = 0; i < dataset_size; ++i) {
    inst.universe.push_back("e" + std::to_string(i));
  }
  inst.universe.push_back("a'");
  const Element a = 0;
  const Element a_prime = dataset_size;
  for (int i = 0; i < dataset_size; ++i) inst.dataset_x.push_back(i);
  for (int i = 1; i < dataset_size; ++i) inst.dataset_x_prime.push_back(i);
  inst.dataset_x_prime.push_back(a_prime);
  inst.scheme = SubsamplingScheme::WithoutReplacement(dataset_size, batch_size);
  inst.relation = BatchRelation::kSubstitution;
  inst.base.alphabet = {"0", "1"};
  Batch all;
  for (int i = 0; i <= dataset_size; ++i) all.push_back(i);
  // Flip the response whenever the substituted element a is sampled. For
  // orders alpha > 1 this realizes the maximizing tau of the tight bound.
  for (const auto& y : AllSubsetsOf(all)) {
    const int h = std::binary_search(y.begin(), y.end(), a) ? 0 : 1;
    const double success = h == 1 ? theta : 1.0 - theta;
    inst.base.table[y] = {1.0 - success, success};
  }
  return inst;
}

DiscreteInstance random_group_instance(numeric::SplitMix64& rng,
                                       int max_universe, int max_alphabet) {
  DiscreteInstance inst;
  const int n = 2 + static_cast<int>(rng.NextBelow(max_universe - 1));
  for (int i = 0; i < n; ++i) {
    inst.universe.push_back("e" + std::to_string(i));
  }
  // Split the universe into removed / inserted / common / unused.
  Batch removed, inserted, common;
  int k_minus = 0, k_plus = 0;
  for (int i = 0; i < n; ++i) {
    switch (rng.NextBelow(4)) {
      case 0:
        if (k_minus < 2) {
          removed.push_back(i);
          ++k_minus;
          break;
        }
        [[fallthrough]];
      case 1:
        if (k_plus < 2) {
          inserted.push_back(i);
          ++k_plus;
          break;
        }
        [[fallthrough]];
      default:
        common.push_back(i);
    }
  }
  if (removed.empty() && inserted.empty()) {
    removed.push_back(common.back());
    common.pop_back();
  }
  inst.dataset_x = SetUnion(common, removed);
  inst.dataset_x_prime = SetUnion(common, inserted);
  const double rate = 0.1 + 0.8 * rng.NextDouble();
  inst.scheme = SubsamplingScheme::Poisson(rate);
  inst.relation = BatchRelation::kInsertionRemoval;
  const int alphabet = 2 + static_cast<int>(rng.NextBelow(max_alphabet - 1));
  for (int z = 0; z < alphabet; ++z) {
    inst.base.alphabet.push_back(std::to_string(z));
  }
  Batch all;
  for (int i = 0; i < n; ++i) all.push_back(i);
  for (const auto& y : AllSubsetsOf(all)) {
    std::vector<double> pmf(alphabet);
    double sum = 0;
    for (int z = 0; z < alphabet; ++z) {
      pmf[z] = 0.05 + rng.NextDouble();
      sum += pmf[z];
    }
    for (int z = 0; z < alphabet; ++z) pmf[z] /= sum;
    // Re-normalize exactly.
    double acc = 0;
    for (int z = 0; z + 1 < alphabet; ++z) acc += pmf[z];
    pmf[alphabet - 1] = 1.0 - acc;
    inst.base.table[y] = pmf;
  }
  return inst;
}

double epoch_exact_log_moment(const DiscreteInstance& inst, double alpha) {
  if (inst.scheme.tag != SubsamplingScheme::Tag::kPermutePartition) {
    throw UnsupportedError("epoch enumeration needs permute-and-partition");
  }
  const int full = static_cast<int>(inst.dataset_x.size());
  if (full % 2 != 0 || full > 8) {
    throw SizeLimitError("permute-and-partition enumeration needs |x| = 2N <= 8");
  }
  const int half = full / 2;
  const std::size_t alphabet = inst.base.alphabet.size();
  auto product_mixture = [&](const Batch& dataset) {
    std::vector<double> out(alphabet * alphabet, 0.0);
    const auto halves = KSubsetsOf(dataset, half);
    const double weight = 1.0 / static_cast<double>(halves.size());
    for (const auto& y1 : halves) {
      const Batch y2 = SetDifference(dataset, y1);
      const auto& p1 = inst.base.pmf(y1);
      const auto& p2 = inst.base.pmf(y2);
      for (std::size_t z1 = 0; z1 < alphabet; ++z1) {
        for (std::size_t z2 = 0; z2 < alphabet; ++z2) {
          out[z1 * alphabet + z2] += weight * p1[z1] * p2[z2];
        }
      }
    }
    return out;
  };
  const auto p = product_mixture(inst.dataset_x);
  const auto q = product_mixture(inst.dataset_x_prime);
  return std::log(
      ExactDivergenceOfPmfs(p, q, alpha, divergence::Kind::kRenyiMoment));
}

nlohmann::json instance_to_json(const DiscreteInstance& inst) {
  nlohmann::json doc;
  doc["version"] = 1;
  doc["universe"] = inst.universe;
  auto names = [&](const Batch& batch) {
    std::vector<std::string> out;
    for (Element e : batch) out.push_back(inst.universe[e]);
    return out;
  };
  doc["x"] = names(inst.dataset_x);
  doc["x_prime"] = names(inst.dataset_x_prime);
  switch (inst.scheme.tag) {
    case SubsamplingScheme::Tag::kPoisson:
      doc["scheme"] = {{"tag", "poisson"}, {"rate", inst.scheme.rate}};
      break;
    case SubsamplingScheme::Tag::kWithoutReplacement:
      doc["scheme"] = {{"tag", "wor"},
                       {"dataset_size", inst.scheme.dataset_size},
                       {"batch_size", inst.scheme.batch_size}};
      break;
    case SubsamplingScheme::Tag::kWithReplacement:
      doc["scheme"] = {{"tag", "wr"},
                       {"dataset_size", inst.scheme.dataset_size},
                       {"batch_size", inst.scheme.batch_size}};
      break;
    case SubsamplingScheme::Tag::kPermutePartition:
      doc["scheme"] = {{"tag", "permute_partition"},
                       {"half_size", inst.scheme.dataset_size}};
      break;
  }
  doc["relation"] = inst.relation == BatchRelation::kInsertionRemoval
                        ? "insertion_removal"
                        : "substitution";
  doc["alphabet"] = inst.base.alphabet;
  nlohmann::json table = nlohmann::json::object();
  for (const auto& [batch, pmf] : inst.base.table) {
    std::string key;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (i > 0) key += ",";
      key += inst.universe[batch[i]];
    }
    table[key] = pmf;
  }
  doc["table"] = table;
  return doc;
}

DiscreteInstance instance_from_json(const nlohmann::json& doc) {
  DiscreteInstance inst;
  inst.universe = doc.at("universe").get<std::vector<std::string>>();
  std::map<std::string, Element> ids;
  for (std::size_t i = 0; i < inst.universe.size(); ++i) {
    ids[inst.universe[i]] = static_cast<Element>(i);
  }
  auto parse_batch = [&](const std::vector<std::string>& names) {
    Batch out;
    for (const auto& name : names) out.push_back(ids.at(name));
    std::sort(out.begin(), out.end());
    return out;
  };
  inst.dataset_x = parse_batch(doc.at("x").get<std::vector<std::string>>());
  inst.dataset_x_prime =
      parse_batch(doc.at("x_prime").get<std::vector<std::string>>());
  const auto& scheme = doc.at("scheme");
  const std::string tag = scheme.at("tag").get<std::string>();
  if (tag == "poisson") {
    inst.scheme = SubsamplingScheme::Poisson(scheme.at("rate").get<double>());
  } else if (tag == "wor") {
    inst.scheme = SubsamplingScheme::WithoutReplacement(
        scheme.at("dataset_size").get<int>(),
        scheme.at("batch_size").get<int>());
  } else if (tag == "wr") {
    inst.scheme = SubsamplingScheme::WithReplacement(
        scheme.at("dataset_size").get<int>(),
        scheme.at("batch_size").get<int>());
  } else if (tag == "permute_partition") {
    inst.scheme =
        SubsamplingScheme::PermutePartition(scheme.at("half_size").get<int>());
  } else {
    throw InvalidArgumentError("unknown scheme tag: " + tag);
  }
  const std::string relation = doc.at("relation").get<std::string>();
  if (relation == "insertion_removal") {
    inst.relation = BatchRelation::kInsertionRemoval;
  } else if (relation == "substitution") {
    inst.relation = BatchRelation::kSubstitution;
  } else {
    throw InvalidArgumentError("unknown relation: " + relation);
  }
  inst.base.alphabet = doc.at("alphabet").get<std::vector<std::string>>();
  for (const auto& [key, pmf] : doc.at("table").items()) {
    Batch batch;
    if (!key.empty()) {
      std::stringstream ss(key);
      std::string name;
      while (std::getline(ss, name, ',')) batch.push_back(ids.at(name));
      std::sort(batch.begin(), batch.end());
    }
    inst.base.table[batch] = pmf.get<std::vector<double>>();
  }
  inst.validate();
  return inst;
}

}  // namespace dpamp::oracle
