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
#include "dpamp/amplification.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "dpamp/errors.hpp"
#include "dpamp/numeric.hpp"

namespace dpamp::amplification {

namespace {

using divergence::CandidatePair;
using mixtures::ComponentFamily;
using mixtures::MixtureComponent;
using mixtures::MixtureDistribution;

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1 - (1 - r)^k without cancellation for small rates.
double OneMinusPow(double rate, int k) {
  if (rate >= 1) return k == 0 ? 0.0 : 1.0;
  return -std::expm1(static_cast<double>(k) * std::log1p(-rate));
}

void RequireRate(double rate) {
  if (!(rate >= 0) || !(rate <= 1)) {
    throw InvalidArgumentError("subsampling rate must lie in [0, 1]");
  }
}

void RequireIntegerOrder(int alpha) {
  if (alpha < 2) {
    throw UnsupportedError(
        "binomial-expansion RDP routes require integer alpha >= 2");
  }
}

// log Lambda_l between worst-case base outputs at the given induced batch
// distance, in unit-sensitivity coordinates.
double InnerLogMoment(const BaseMechanismSpec& mech, int distance,
                      double order) {
  if (order <= 1 || distance == 0) return 0;
  switch (mech.tag) {
    case BaseMechanismSpec::Tag::kGaussian:
      return divergence::gaussian_log_renyi_moment(distance,
                                                   mech.scaled_noise(), order);
    case BaseMechanismSpec::Tag::kLaplace:
      return divergence::laplace_log_renyi_moment(distance,
                                                  mech.scaled_noise(), order);
    case BaseMechanismSpec::Tag::kRandomizedResponse:
      return divergence::bernoulli_log_renyi_moment(mech.theta,
                                                    1.0 - mech.theta, order);
  }
  throw UnsupportedError("unknown mechanism");
}

// Worst-case hockey stick of the base mechanism at the given induced batch
// distance ("white-box" group privacy profile).
double InnerHockeyStick(const BaseMechanismSpec& mech, int distance,
                        double epsilon) {
  switch (mech.tag) {
    case BaseMechanismSpec::Tag::kGaussian:
      return divergence::gaussian_hockey_stick(distance, mech.scaled_noise(),
                                               epsilon);
    case BaseMechanismSpec::Tag::kLaplace:
      return divergence::laplace_hockey_stick(distance, mech.scaled_noise(),
                                              epsilon);
    case BaseMechanismSpec::Tag::kRandomizedResponse:
      // delta_k = delta_1 for randomized response.
      return distance == 0 ? std::max(0.0, 1.0 - std::exp(epsilon))
                           : divergence::bernoulli_hockey_stick(
                                 mech.theta, 1.0 - mech.theta,
                                 std::exp(epsilon));
  }
  throw UnsupportedError("unknown mechanism");
}

// log of sum_{l=0}^{alpha} Binom(l | alpha, w) * exp(inner(l)). Entirely in
// log space: at large orders the top-l weights underflow a linear pmf while
// their inner moments dominate the sum.
double LogBinomialMixture(int alpha, double w,
                          const std::function<double(int)>& inner_log) {
  if (w <= 0) return inner_log(0);
  if (w >= 1) return inner_log(alpha);
  std::vector<double> terms;
  terms.reserve(alpha + 1);
  for (int l = 0; l <= alpha; ++l) {
    const double log_pmf = numeric::LogBinomialCoefficient(alpha, l) +
                           l * std::log(w) + (alpha - l) * std::log1p(-w);
    terms.push_back(log_pmf + inner_log(l));
  }
  return numeric::LogSumExp(terms);
}

MixtureDistribution BinomialLocationMixture(const ComponentFamily& family,
                                            int count, double rate,
                                            double sign) {
  std::vector<MixtureComponent> comps;
  comps.reserve(count + 1);
  for (int i = 0; i <= count; ++i) {
    comps.push_back({numeric::BinomialPmf(i, count, rate), sign * i});
  }
  return MixtureDistribution(family, std::move(comps));
}

// Worst-case single pair of the mechanism under one batch substitution, in
// unit-sensitivity coordinates.
CandidatePair WorstCaseBasePair(const BaseMechanismSpec& mech) {
  if (mech.continuous()) {
    const ComponentFamily family = mech.family();
    return CandidatePair{MixtureDistribution(family, {{1.0, 1.0}}),
                         MixtureDistribution(family, {{1.0, 0.0}})};
  }
  const ComponentFamily family = ComponentFamily::Bernoulli();
  return CandidatePair{MixtureDistribution(family, {{1.0, mech.theta}}),
                       MixtureDistribution(family, {{1.0, 1.0 - mech.theta}})};
}

}  // namespace

SubsamplingScheme SubsamplingScheme::Poisson(double rate) {
  RequireRate(rate);
  SubsamplingScheme s;
  s.tag = Tag::kPoisson;
  s.rate = rate;
  return s;
}

SubsamplingScheme SubsamplingScheme::WithoutReplacement(int dataset_size,
                                                        int batch_size) {
  if (dataset_size < 1 || batch_size < 1 || batch_size > dataset_size) {
    throw InvalidArgumentError("need 1 <= q <= N for WOR subsampling");
  }
  SubsamplingScheme s;
  s.tag = Tag::kWithoutReplacement;
  s.dataset_size = dataset_size;
  s.batch_size = batch_size;
  return s;
}

SubsamplingScheme SubsamplingScheme::WithReplacement(int dataset_size,
                                                     int batch_size) {
  if (dataset_size < 1 || batch_size < 1) {
    throw InvalidArgumentError("need N >= 1 and q >= 1 for WR subsampling");
  }
  SubsamplingScheme s;
  s.tag = Tag::kWithReplacement;
  s.dataset_size = dataset_size;
  s.batch_size = batch_size;
  return s;
}

SubsamplingScheme SubsamplingScheme::PermutePartition(int half_size) {
  if (half_size < 1) {
    throw InvalidArgumentError("permute-and-partition needs N >= 1");
  }
  SubsamplingScheme s;
  s.tag = Tag::kPermutePartition;
  s.dataset_size = half_size;
  s.batch_size = half_size;
  return s;
}

BaseMechanismSpec BaseMechanismSpec::Gaussian(double sigma,
                                              double l2_sensitivity) {
  if (!(sigma > 0) || !(l2_sensitivity > 0)) {
    throw InvalidArgumentError("Gaussian mechanism needs positive sigma, L2");
  }
  BaseMechanismSpec m;
  m.tag = Tag::kGaussian;
  m.noise_scale = sigma;
  m.sensitivity = l2_sensitivity;
  return m;
}

BaseMechanismSpec BaseMechanismSpec::Laplace(double lambda,
                                             double l1_sensitivity) {
  if (!(lambda > 0) || !(l1_sensitivity > 0)) {
    throw InvalidArgumentError("Laplace mechanism needs positive lambda, L1");
  }
  BaseMechanismSpec m;
  m.tag = Tag::kLaplace;
  m.noise_scale = lambda;
  m.sensitivity = l1_sensitivity;
  return m;
}

BaseMechanismSpec BaseMechanismSpec::RandomizedResponse(double theta) {
  if (!(theta >= 0) || !(theta <= 1)) {
    throw InvalidArgumentError("randomized response needs theta in [0, 1]");
  }
  BaseMechanismSpec m;
  m.tag = Tag::kRandomizedResponse;
  m.theta = theta;
  m.sensitivity = 1;
  return m;
}

ComponentFamily BaseMechanismSpec::family() const {
  switch (tag) {
    case Tag::kGaussian:
      return ComponentFamily::Gaussian(scaled_noise());
    case Tag::kLaplace:
      return ComponentFamily::Laplace(scaled_noise());
    case Tag::kRandomizedResponse:
      return ComponentFamily::Bernoulli();
  }
  throw UnsupportedError("unknown mechanism");
}

double RenyiMoment::value() const { return std::exp(log_value); }

double RenyiMoment::rdp_rho(double alpha) const {
  return std::max(0.0, log_value / (alpha - 1.0));
}

BoundCandidateSet poisson_group_pair(const BaseMechanismSpec& mech,
                                     double rate, GroupRelation relation) {
  RequireRate(rate);
  if (relation.k_plus < 0 || relation.k_minus < 0) {
    throw InvalidArgumentError("group relation counts must be nonnegative");
  }
  if (relation.total() < 1) {
    throw InvalidArgumentError("degenerate group relation: K+ = K- = 0");
  }
  BoundCandidateSet set;
  set.relation_splits = {relation};
  if (mech.continuous()) {
    const ComponentFamily family = mech.family();
    set.pairs.push_back(CandidatePair{
        BinomialLocationMixture(family, relation.k_minus, rate, +1.0),
        BinomialLocationMixture(family, relation.k_plus, rate, -1.0)});
    set.provenance = mech.tag == BaseMechanismSpec::Tag::kGaussian
                         ? "poisson-group-gaussian"
                         : "poisson-group-laplace";
    return set;
  }
  const double w1 = OneMinusPow(rate, relation.k_minus);
  const double w2 = OneMinusPow(rate, relation.k_plus);
  const ComponentFamily family = ComponentFamily::Bernoulli();
  for (double tau : {mech.theta, 1.0 - mech.theta}) {
    MixtureDistribution p(family, {{1.0 - w1, mech.theta}, {w1, tau}});
    MixtureDistribution q(family, {{1.0 - w2, mech.theta}, {w2, 1.0 - tau}});
    set.pairs.push_back(CandidatePair{std::move(p), std::move(q)});
  }
  set.provenance = "poisson-group-randomized-response";
  return set;
}

divergence::DivergenceValue group_bound(const BaseMechanismSpec& mech,
                                        double rate, int group_size,
                                        double alpha, divergence::Kind kind,
                                        const divergence::EvalOptions& options) {
  if (group_size < 1) throw InvalidArgumentError("group size must be >= 1");
  std::vector<CandidatePair> candidates;
  for (int k_minus = 0; k_minus <= group_size; ++k_minus) {
    auto set = poisson_group_pair(mech, rate,
                                  {group_size - k_minus, k_minus});
    for (auto& pair : set.pairs) candidates.push_back(std::move(pair));
  }
  return divergence::divergence_of_candidates(candidates, alpha, kind, options);
}

BoundCandidateSet wor_substitution_pair(const BaseMechanismSpec& mech, int N,
                                        int q) {
  if (N < 1 || q < 1 || q > N) {
    throw InvalidArgumentError("need 1 <= q <= N");
  }
  auto set = poisson_group_pair(mech, static_cast<double>(q) / N, {1, 1});
  set.provenance = "wor-substitution-relaxed";
  return set;
}

double wor_substitution_profile(const BaseMechanismSpec& mech, int N, int q,
                                double epsilon,
                                const divergence::EvalOptions& options) {
  if (N < 1 || q < 1 || q > N) {
    throw InvalidArgumentError("need 1 <= q <= N");
  }
  const double w = static_cast<double>(q) / N;
  const double alpha = std::exp(epsilon);
  const CandidatePair base = WorstCaseBasePair(mech);
  const auto& family = base.p.family();

  auto mix = [&](const MixtureDistribution& heavy,
                 const MixtureDistribution& light) {
    std::vector<MixtureComponent> comps;
    for (const auto& c : heavy.components()) {
      comps.push_back({(1.0 - w) * c.weight, c.location});
    }
    for (const auto& c : light.components()) {
      comps.push_back({w * c.weight, c.location});
    }
    return MixtureDistribution(family, std::move(comps));
  };

  if (alpha >= 1) {
    return divergence::hockey_stick(mix(base.q, base.p), base.q, alpha, options)
        .value;
  }
  return divergence::hockey_stick(base.p, mix(base.p, base.q), alpha, options)
      .value;
}

BoundCandidateSet wr_substitution_pair(const BaseMechanismSpec& mech, int N,
                                       int q) {
  if (!mech.continuous()) {
    throw UnsupportedError(
        "with-replacement pairs are defined for continuous mechanisms");
  }
  if (N < 2 || q < 1) {
    throw InvalidArgumentError("need N >= 2 and q >= 1");
  }
  const ComponentFamily family = mech.family();
  const double rate = 1.0 / N;
  BoundCandidateSet set;
  set.pairs.push_back(
      CandidatePair{BinomialLocationMixture(family, q, rate, +1.0),
                    BinomialLocationMixture(family, q, rate, -1.0)});
  set.provenance = "wr-substitution";
  return set;
}

EpsilonDelta balle_group_adp(const BaseMechanismSpec& mech, double rate, int K,
                             double epsilon) {
  RequireRate(rate);
  if (K < 1) throw InvalidArgumentError("group size must be >= 1");
  if (!(epsilon >= 0)) throw InvalidArgumentError("epsilon must be >= 0");
  const double w = OneMinusPow(rate, K);
  EpsilonDelta out;
  out.epsilon = std::log1p(w * std::expm1(epsilon));
  double delta = 0;
  for (int k = 1; k <= K; ++k) {
    delta += numeric::BinomialPmf(k, K, rate) * InnerHockeyStick(mech, k, epsilon);
  }
  out.delta = std::clamp(delta, 0.0, 1.0);
  return out;
}

RenyiMoment agnostic_group_rdp(const BaseMechanismSpec& mech, double rate,
                               int K, int alpha, bool include_factor2) {
  RequireRate(rate);
  RequireIntegerOrder(alpha);
  if (K < 1) throw InvalidArgumentError("group size must be >= 1");
  const double w = OneMinusPow(rate, K);
  if (w == 0) return RenyiMoment{0};
  std::vector<double> terms;
  terms.reserve(K);
  for (int k = 1; k <= K; ++k) {
    const double pmf = numeric::BinomialPmf(k, K, rate);
    if (pmf <= 0) continue;
    const double inner = LogBinomialMixture(
        alpha, w, [&](int l) { return InnerLogMoment(mech, k, l); });
    terms.push_back(std::log(pmf) - std::log(w) + inner);
  }
  double log_value = numeric::LogSumExp(terms);
  if (include_factor2) log_value += std::log(2.0);
  return RenyiMoment{log_value};
}

RenyiMoment zhu_poisson_rdp(const BaseMechanismSpec& mech, double rate,
                            int alpha, bool include_factor2) {
  RequireRate(rate);
  RequireIntegerOrder(alpha);
  double log_value = LogBinomialMixture(
      alpha, rate, [&](int l) { return InnerLogMoment(mech, 1, l); });
  if (include_factor2) log_value += std::log(2.0);
  return RenyiMoment{log_value};
}

RenyiMoment wang_wor_rdp(const BaseMechanismSpec& mech, int N, int q,
                         int alpha) {
  RequireIntegerOrder(alpha);
  if (N < 1 || q < 0 || q > N) throw InvalidArgumentError("need 0 <= q <= N");
  const double w = static_cast<double>(q) / N;
  std::vector<double> terms = {0.0};  // the leading 1
  if (w > 0) {
    for (int l = 2; l <= alpha; ++l) {
      terms.push_back(std::log(2.0) + numeric::LogBinomialCoefficient(alpha, l) +
                      l * std::log(w) + InnerLogMoment(mech, 1, l));
    }
  }
  return RenyiMoment{numeric::LogSumExp(terms)};
}

RenyiMoment rr_wor_tight_rdp(double theta, int N, int q, double alpha) {
  if (!(alpha > 1)) throw InvalidArgumentError("need alpha > 1");
  if (!(theta >= 0) || !(theta <= 1)) {
    throw InvalidArgumentError("theta must lie in [0, 1]");
  }
  if (N < 1 || q < 0 || q > N) throw InvalidArgumentError("need 0 <= q <= N");
  const double w = static_cast<double>(q) / N;
  double best = -kInf;
  for (double tau : {theta, 1.0 - theta}) {
    const double p_success = (1.0 - w) * theta + w * tau;
    const double q_success = (1.0 - w) * theta + w * (1.0 - tau);
    best = std::max(
        best, divergence::bernoulli_log_renyi_moment(p_success, q_success, alpha));
  }
  return RenyiMoment{best};
}

RenyiMoment wor_insertion_removal_rdp(const BaseMechanismSpec& mech, int q_min,
                                      int q, int alpha, int n_max) {
  RequireIntegerOrder(alpha);
  if (q < 0 || q_min < q) {
    throw InvalidArgumentError("need batch size q >= 0 and Q_min >= q");
  }
  if (n_max < 0) n_max = q_min + 10000;
  if (n_max <= q_min) {
    throw InvalidArgumentError("empty dataset-size scan range");
  }
  double best = -kInf;
  for (int n = q_min + 1; n <= n_max; ++n) {
    const double w = static_cast<double>(q) / n;
    const double log_value =
        std::log(2.0) + LogBinomialMixture(alpha, w, [&](int l) {
          return InnerLogMoment(mech, 2, l);
        });
    best = std::max(best, log_value);
  }
  return RenyiMoment{best};
}

RenyiMoment hybrid_wor_substitution_rdp(const BaseMechanismSpec& mech, int N,
                                        int q, int alpha) {
  RequireIntegerOrder(alpha);
  if (N < 1 || q < 0 || q > N) throw InvalidArgumentError("need 0 <= q <= N");
  const double w = static_cast<double>(q) / N;
  std::vector<double> terms = {0.0};
  if (w > 0) {
    for (int l = 2; l <= alpha; ++l) {
      terms.push_back(std::log(2.0) + numeric::LogBinomialCoefficient(alpha, l) +
                      l * std::log(w) + InnerLogMoment(mech, 2, l));
    }
  }
  return RenyiMoment{numeric::LogSumExp(terms)};
}

RenyiMoment node_group_wor_rdp(const BaseMechanismSpec& mech, int N, int K,
                               int q, double alpha) {
  if (!(alpha > 1)) throw InvalidArgumentError("need alpha > 1");
  if (K < 0 || K > N || q < 0 || q > N) {
    throw InvalidArgumentError("hypergeometric parameters out of range");
  }
  if (K == 0) return RenyiMoment{0};
  std::vector<double> terms;
  for (int k = 0; k <= std::min(K, q); ++k) {
    const double pmf = numeric::HypergeometricPmf(k, N, K, q);
    if (pmf <= 0) continue;
    terms.push_back(std::log(pmf) + InnerLogMoment(mech, k, alpha));
  }
  return RenyiMoment{numeric::LogSumExp(terms)};
}

namespace {

// Exact 4-outcome evaluation of the symmetrized product-mixture moment for
// Bernoulli bases.
double EpochBernoulliLogMoment(double theta, double alpha) {
  double best = -kInf;
  for (double tau2 : {theta, 1.0 - theta}) {
    for (double tau1 : {theta, 1.0 - theta}) {
      const double tau1_prime = 1.0 - tau1;
      auto outcome = [](double success, int z) {
        return z == 1 ? success : 1.0 - success;
      };
      double moment = 0;
      for (int z1 : {0, 1}) {
        for (int z2 : {0, 1}) {
          const double p = 0.5 * outcome(tau1, z1) * outcome(tau2, z2) +
                           0.5 * outcome(tau2, z1) * outcome(tau1, z2);
          const double qv =
              0.5 * outcome(tau1_prime, z1) * outcome(tau2, z2) +
              0.5 * outcome(tau2, z1) * outcome(tau1_prime, z2);
          if (p == 0) continue;
          if (qv == 0) return kInf;
          moment += std::pow(p, alpha) * std::pow(qv, 1.0 - alpha);
        }
      }
      best = std::max(best, std::log(moment));
    }
  }
  return best;
}

// Symmetrized product-mixture moment for Gaussian bases with means in
// {0, 1}. In the rotated coordinates u = (z1 + z2) / sqrt(2),
// v = (z1 - z2) / sqrt(2) both product mixtures factorize into a plain
// Gaussian pair along u and a symmetric two-component mixture pair along v,
// so the moment is the product of a closed form and a one-dimensional
// mixture moment.
double EpochGaussianLogMoment(double sigma, double alpha, double tol) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const ComponentFamily family = ComponentFamily::Gaussian(sigma);
  double best = -kInf;
  for (double m2 : {0.0, 1.0}) {
    for (double m1 : {0.0, 1.0}) {
      const double m1_prime = 1.0 - m1;
      // u-part: N((m1 + m2) / sqrt2, sigma) vs N((m1' + m2) / sqrt2, sigma).
      const double u_part = divergence::gaussian_log_renyi_moment(
          (m1 - m1_prime) * inv_sqrt2, sigma, alpha);
      // v-part: symmetric mixtures at +-(m - m2) / sqrt2.
      const double d = (m1 - m2) * inv_sqrt2;
      const double d_prime = (m1_prime - m2) * inv_sqrt2;
      MixtureDistribution v_p(family, {{0.5, d}, {0.5, -d}});
      MixtureDistribution v_q(family, {{0.5, d_prime}, {0.5, -d_prime}});
      divergence::EvalOptions eval;
      eval.method = divergence::Method::kQuadrature;
      eval.quadrature_tol = tol;
      const double v_part =
          divergence::renyi_moment(v_p, v_q, alpha, eval).log_value;
      best = std::max(best, u_part + v_part);
    }
  }
  return best;
}

}  // namespace

RenyiMoment epoch_permute_partition_rdp(const BaseMechanismSpec& mech,
                                        double alpha, bool conditional,
                                        double quadrature_tol) {
  if (!(alpha > 1)) throw InvalidArgumentError("need alpha > 1");
  if (mech.tag == BaseMechanismSpec::Tag::kLaplace) {
    throw UnsupportedError(
        "epoch-level bounds support Gaussian and randomized-response bases");
  }
  if (!conditional) {
    // The unconditional transport bound returns the base guarantee as is.
    return RenyiMoment{InnerLogMoment(mech, 1, alpha)};
  }
  if (mech.tag == BaseMechanismSpec::Tag::kRandomizedResponse) {
    return RenyiMoment{EpochBernoulliLogMoment(mech.theta, alpha)};
  }
  return RenyiMoment{
      EpochGaussianLogMoment(mech.scaled_noise(), alpha, quadrature_tol)};
}

EpsilonDelta posthoc_group_adp(double epsilon, double delta, int K) {
  if (!(epsilon >= 0)) throw InvalidArgumentError("epsilon must be >= 0");
  if (!(delta >= 0) || !(delta <= 1)) {
    throw InvalidArgumentError("delta must lie in [0, 1]");
  }
  if (K < 1) throw InvalidArgumentError("group size must be >= 1");
  double factor = 0;
  for (int k = 0; k < K; ++k) factor += std::exp(k * epsilon);
  return EpsilonDelta{K * epsilon, std::min(1.0, factor * delta)};
}

curves::RdpCurve posthoc_group_rdp(const curves::RdpCurve& curve, int K) {
  if (K < 1 || (K & (K - 1)) != 0) {
    throw InvalidArgumentError("group size must be a power of two");
  }
  curves::RdpCurve current = curve;
  for (int size = K; size > 1; size /= 2) {
    auto lookup = [&](double alpha) -> double {
      for (const auto& pt : current.points) {
        if (std::abs(pt.alpha - alpha) <= 1e-9 * std::max(1.0, alpha)) {
          return pt.rho;
        }
      }
      return -1;
    };
    curves::RdpCurve next;
    for (const auto& pt : current.points) {
      const double doubled = lookup(2.0 * pt.alpha);
      const double shifted = lookup(2.0 * pt.alpha - 1.0);
      if (doubled < 0 || shifted < 0) continue;  // unavailable at this order
      const double alpha = pt.alpha;
      const double rho = (alpha - 0.5) / (alpha - 1.0) * doubled +
                         alpha / (alpha - 1.0) * shifted;
      next.points.push_back({alpha, rho});
    }
    current = std::move(next);
  }
  return current;
}

}  // namespace dpamp::amplification
