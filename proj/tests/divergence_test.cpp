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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dpamp/divergence.hpp"
#include "dpamp/errors.hpp"
#include "dpamp/numeric.hpp"
#include "test_util.hpp"

using namespace dpamp;
using divergence::CandidatePair;
using divergence::Direction;
using divergence::EvalOptions;
using divergence::Kind;
using divergence::Method;
using mixtures::ComponentFamily;
using mixtures::MixtureDistribution;

namespace {

MixtureDistribution Gauss(double mean, double sigma = 1.0) {
  return MixtureDistribution(ComponentFamily::Gaussian(sigma), {{1.0, mean}});
}

MixtureDistribution Bern(double theta) {
  return MixtureDistribution(ComponentFamily::Bernoulli(), {{1.0, theta}});
}

MixtureDistribution GaussGroup(int count, double rate, double sign,
                               double sigma) {
  std::vector<mixtures::MixtureComponent> comps;
  for (int i = 0; i <= count; ++i) {
    comps.push_back({numeric::BinomialPmf(i, count, rate), sign * i});
  }
  return MixtureDistribution(ComponentFamily::Gaussian(sigma), comps);
}

// Independent oracle: hockey stick by adaptive Simpson over the density
// difference.
double HockeyStickOracle(const MixtureDistribution& p,
                         const MixtureDistribution& q, double alpha) {
  auto f = [&](double z) {
    return std::max(mixtures::density(p, z) - alpha * mixtures::density(q, z),
                    0.0);
  };
  const double scale = p.family().scale();
  const double pad = p.family().kind() == mixtures::Family::kGaussian ? 14 : 65;
  const double lo = std::min(p.min_location(), q.min_location()) - pad * scale;
  const double hi = std::max(p.max_location(), q.max_location()) + pad * scale;
  // Split at the means so the Simpson oracle sees smooth pieces.
  double total = 0;
  std::vector<double> knots = {lo};
  for (const auto& c : p.components()) knots.push_back(c.location);
  for (const auto& c : q.components()) knots.push_back(c.location);
  knots.push_back(hi);
  std::sort(knots.begin(), knots.end());
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    if (knots[i + 1] > knots[i]) {
      total += testing::AdaptiveSimpson(f, knots[i], knots[i + 1], 1e-13);
    }
  }
  return total;
}

}  // namespace

TEST_CASE("hockey-stick spec values") {
  CHECK(divergence::hockey_stick(Bern(0.75), Bern(0.25), 1.0).value ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK(divergence::hockey_stick(Bern(0.6), Bern(0.6), 1.0).value ==
        doctest::Approx(0.0).epsilon(1e-15));
  // H_1(N(0,1) || N(1,1)) = 2 Phi(1/2) - 1.
  const double expected = 2.0 * testing::NormalCdf(0.5) - 1.0;
  const auto v = divergence::hockey_stick(Gauss(0), Gauss(1), 1.0,
                                          {.method = Method::kQuadrature});
  CHECK(v.value == doctest::Approx(expected).epsilon(1e-9));
  CHECK(v.value == doctest::Approx(0.38292492254802624).epsilon(1e-9));
}

TEST_CASE("Renyi moment spec values") {
  // Lambda_2(Bern(.75) || Bern(.25)) = 7/3.
  CHECK(divergence::renyi_moment(Bern(0.75), Bern(0.25), 2.0).value ==
        doctest::Approx(7.0 / 3.0).epsilon(1e-13));
  // Lambda_2(N(0,1) || N(1,1)) = e via the closed form; quadrature agrees.
  CHECK(divergence::renyi_moment(Gauss(0), Gauss(1), 2.0).value ==
        doctest::Approx(std::exp(1.0)).epsilon(1e-12));
  CHECK(divergence::renyi_moment(Gauss(0), Gauss(1), 2.0,
                                 {.method = Method::kQuadrature})
            .value == doctest::Approx(std::exp(1.0)).epsilon(1e-9));
  CHECK(divergence::renyi_moment(Gauss(0.3), Gauss(0.3), 4.0).value ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("method preconditions") {
  CHECK_THROWS_AS(divergence::hockey_stick(Gauss(0), Gauss(1), 1.0,
                                           {.method = Method::kExact}),
                  UnsupportedError);
  CHECK_THROWS_AS(divergence::renyi_moment(Bern(0.6), Bern(0.4), 1.0),
                  InvalidArgumentError);
  CHECK_THROWS_AS(
      divergence::hockey_stick(Gauss(0), Gauss(0, 2.0), 1.0),
      UnsupportedError);  // mismatched scales are mismatched families
}

TEST_CASE("divergence identities") {
  const MixtureDistribution p = GaussGroup(2, 0.3, +1.0, 1.5);
  const MixtureDistribution q = GaussGroup(1, 0.3, -1.0, 1.5);
  // H_0 = 1 for any pair.
  CHECK(divergence::hockey_stick(p, q, 0.0).value ==
        doctest::Approx(1.0).epsilon(1e-9));
  // H_alpha(p || p) = 0 for alpha >= 1.
  CHECK(divergence::hockey_stick(p, p, 1.0).value ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK(divergence::hockey_stick(p, p, 2.5).value ==
        doctest::Approx(0.0).epsilon(1e-9));
  // Lambda_alpha(p || p) = 1.
  CHECK(divergence::renyi_moment(p, p, 3.0).value ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("H is nonincreasing and convex in alpha; Lambda nondecreasing") {
  const MixtureDistribution p = GaussGroup(2, 0.25, +1.0, 2.0);
  const MixtureDistribution q = GaussGroup(0, 0.25, -1.0, 2.0);
  std::vector<double> alphas, values;
  for (int i = 0; i <= 24; ++i) {
    alphas.push_back(std::exp(4.0 * i / 24.0));
    values.push_back(divergence::hockey_stick(p, q, alphas.back()).value);
  }
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    CHECK(values[i + 1] <= values[i] + 1e-12);
  }
  // Discrete convexity on the uniform alpha grid via second differences.
  std::vector<double> uniform;
  for (int i = 0; i <= 30; ++i) {
    uniform.push_back(
        divergence::hockey_stick(p, q, 1.0 + 0.2 * i).value);
  }
  for (std::size_t i = 1; i + 1 < uniform.size(); ++i) {
    CHECK(uniform[i + 1] - 2.0 * uniform[i] + uniform[i - 1] >= -1e-9);
  }

  double previous = 0;
  for (double alpha : {1.5, 2.0, 3.0, 5.0, 8.0}) {
    const double lambda = divergence::renyi_moment(p, q, alpha).value;
    CHECK(lambda >= previous - 1e-12);
    previous = lambda;
  }
}

TEST_CASE("joint convexity on random Bernoulli pairs") {
  numeric::SplitMix64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const double f1 = 0.05 + 0.9 * rng.NextDouble();
    const double f2 = 0.05 + 0.9 * rng.NextDouble();
    const double g1 = 0.05 + 0.9 * rng.NextDouble();
    const double g2 = 0.05 + 0.9 * rng.NextDouble();
    for (double w : {0.25, 0.5, 0.75}) {
      const MixtureDistribution mixed_p(ComponentFamily::Bernoulli(),
                                        {{w, f1}, {1.0 - w, f2}});
      const MixtureDistribution mixed_q(ComponentFamily::Bernoulli(),
                                        {{w, g1}, {1.0 - w, g2}});
      for (double alpha : {1.0, 2.0, std::exp(1.0)}) {
        const double lhs =
            divergence::hockey_stick(mixed_p, mixed_q, alpha).value;
        const double rhs =
            w * divergence::hockey_stick(Bern(f1), Bern(g1), alpha).value +
            (1.0 - w) *
                divergence::hockey_stick(Bern(f2), Bern(g2), alpha).value;
        CHECK(lhs <= rhs + 1e-12);
      }
      for (double alpha : {1.5, 2.0, 4.0}) {
        const double lhs =
            divergence::renyi_moment(mixed_p, mixed_q, alpha).value;
        const double rhs =
            w * divergence::renyi_moment(Bern(f1), Bern(g1), alpha).value +
            (1.0 - w) *
                divergence::renyi_moment(Bern(f2), Bern(g2), alpha).value;
        CHECK(lhs <= rhs + 1e-12);
      }
    }
  }
}

TEST_CASE("advanced joint convexity equality for Gaussian pairs") {
  // H_{alpha'}((1-w) q + w p || q) = w H_alpha(p || q), alpha' = 1 + w(alpha-1).
  for (double w : {0.1, 0.5}) {
    for (double alpha : {1.3, 2.0, std::exp(1.0), 6.0}) {
      const double alpha_prime = 1.0 + w * (alpha - 1.0);
      MixtureDistribution mixed(ComponentFamily::Gaussian(1.0),
                                {{1.0 - w, 0.0}, {w, 1.0}});
      const double lhs = divergence::hockey_stick(
                             mixed, Gauss(0), alpha_prime,
                             {.method = Method::kQuadrature})
                             .value;
      const double rhs =
          w * divergence::hockey_stick(Gauss(1), Gauss(0), alpha).value;
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
    }
  }
}

TEST_CASE("loss bisection brackets quadrature") {
  const MixtureDistribution p = GaussGroup(2, 0.2, +1.0, 2.0);
  const MixtureDistribution q = GaussGroup(1, 0.2, -1.0, 2.0);
  for (double eps : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    const double alpha = std::exp(eps);
    const double pess =
        divergence::hockey_stick(p, q, alpha,
                                 {.method = Method::kLossBisection,
                                  .direction = Direction::kPessimistic})
            .value;
    const double opt =
        divergence::hockey_stick(p, q, alpha,
                                 {.method = Method::kLossBisection,
                                  .direction = Direction::kOptimistic})
            .value;
    const double quad = HockeyStickOracle(p, q, alpha);
    CHECK(pess >= opt);
    CHECK(quad <= pess + 1e-9);
    CHECK(quad >= opt - 1e-9);
    CHECK(pess - opt <= 1e-5);
  }
}

TEST_CASE("loss bisection handles Laplace pairs and saturated thresholds") {
  std::vector<mixtures::MixtureComponent> pc, qc;
  for (int i = 0; i <= 2; ++i) {
    pc.push_back({numeric::BinomialPmf(i, 2, 0.2), double(i)});
  }
  qc.push_back({1.0, 0.0});
  const MixtureDistribution p(ComponentFamily::Laplace(1.0), pc);
  const MixtureDistribution q(ComponentFamily::Laplace(1.0), qc);
  for (double eps : {0.0, 0.5, 1.0}) {
    const double alpha = std::exp(eps);
    const double pess =
        divergence::hockey_stick(p, q, alpha,
                                 {.method = Method::kLossBisection})
            .value;
    const double quad = HockeyStickOracle(p, q, alpha);
    CHECK(quad <= pess + 1e-9);
    CHECK(pess - quad <= 1e-5);
  }
  // Beyond the saturated maximal loss the divergence vanishes.
  const double above = std::exp(2.5);  // max loss is 2 at scale 1
  CHECK(divergence::hockey_stick(p, q, above,
                                 {.method = Method::kLossBisection})
            .value <= 1e-12);
}

TEST_CASE("loss bisection rejects non-monotone losses") {
  // p has mass on both sides of q's single mean: the loss is V-shaped.
  MixtureDistribution p(ComponentFamily::Gaussian(1.0),
                        {{0.5, -3.0}, {0.5, 3.0}});
  MixtureDistribution q(ComponentFamily::Gaussian(1.0), {{1.0, 0.0}});
  CHECK_THROWS_AS(divergence::hockey_stick(
                      p, q, 2.0, {.method = Method::kLossBisection}),
                  PreconditionError);
}

TEST_CASE("candidate sets take the pointwise maximum") {
  // Randomized-response group candidates at theta=.75, r=.5, K-=1, K+=0.
  MixtureDistribution p1(ComponentFamily::Bernoulli(),
                         {{0.5, 0.75}, {0.5, 0.75}});
  MixtureDistribution q1(ComponentFamily::Bernoulli(), {{1.0, 0.25}});
  MixtureDistribution p2(ComponentFamily::Bernoulli(),
                         {{0.5, 0.75}, {0.5, 0.25}});
  MixtureDistribution q2(ComponentFamily::Bernoulli(), {{1.0, 0.75}});
  // tau = theta gives Lambda_2(Bern(.75)||Bern(.25)); tau = 1-theta gives
  // Lambda_2(Bern(.5)||Bern(.75)) = 4/3; the (1,0) split of the group bound
  // compares {1, 4/3}.
  std::vector<CandidatePair> rr_candidates = {{p2, q2}};
  CHECK(divergence::divergence_of_candidates(rr_candidates, 2.0,
                                             Kind::kRenyiMoment)
            .value == doctest::Approx(4.0 / 3.0).epsilon(1e-13));

  std::vector<CandidatePair> single = {{p1, q1}};
  CHECK(divergence::divergence_of_candidates(single, 2.0, Kind::kRenyiMoment)
            .value ==
        doctest::Approx(
            divergence::renyi_moment(p1, q1, 2.0).value)
            .epsilon(1e-13));

  std::vector<CandidatePair> duplicated = {{p2, q2}, {p2, q2}};
  CHECK(divergence::divergence_of_candidates(duplicated, 2.0,
                                             Kind::kRenyiMoment)
            .value == doctest::Approx(4.0 / 3.0).epsilon(1e-13));

  CHECK_THROWS_AS(divergence::divergence_of_candidates({}, 2.0,
                                                       Kind::kRenyiMoment),
                  InvalidArgumentError);
}

TEST_CASE("closed forms match quadrature for Laplace moments") {
  MixtureDistribution p(ComponentFamily::Laplace(1.0), {{1.0, 1.0}});
  MixtureDistribution q(ComponentFamily::Laplace(1.0), {{1.0, 0.0}});
  for (double alpha : {1.5, 2.0, 3.0, 6.0}) {
    const double closed =
        std::exp(divergence::laplace_log_renyi_moment(1.0, 1.0, alpha));
    const double quad =
        divergence::renyi_moment(p, q, alpha, {.method = Method::kQuadrature})
            .value;
    CHECK(closed == doctest::Approx(quad).epsilon(1e-8));
  }
  for (double eps : {0.0, 0.3, 0.9, 1.2}) {
    const double closed = divergence::laplace_hockey_stick(1.0, 1.0, eps);
    const double quad = HockeyStickOracle(p, q, std::exp(eps));
    CHECK(closed == doctest::Approx(quad).epsilon(1e-8));
  }
}

TEST_CASE("large orders stay finite in log space") {
  const MixtureDistribution p = GaussGroup(2, 0.1, +1.0, 1.0);
  const MixtureDistribution q = GaussGroup(0, 0.1, -1.0, 1.0);
  const auto v = divergence::renyi_moment(p, q, 256.0,
                                          {.method = Method::kQuadrature});
  CHECK(std::isfinite(v.log_value));
  CHECK(v.log_value > 0);
}

TEST_CASE("quadrature matches the exact binomial expansion of one-sided pairs") {
  // For integer orders, Lambda_alpha((1-w) q + w p || q) expands exactly into
  // sum_l Binom(l | alpha, w) Lambda_l(p || q); this pins the shifted-window
  // quadrature across small and very large orders.
  const double w = 1e-3;
  const double sigma = 1.0;
  MixtureDistribution p(ComponentFamily::Gaussian(sigma),
                        {{1.0 - w, 0.0}, {w, 1.0}});
  MixtureDistribution q(ComponentFamily::Gaussian(sigma), {{1.0, 0.0}});
  for (int alpha : {2, 16, 64, 256, 1000}) {
    std::vector<double> terms;
    for (int l = 0; l <= alpha; ++l) {
      // Entirely in log space: the top-order terms underflow a linear pmf
      // yet dominate the moment at large orders.
      const double log_pmf = numeric::LogBinomialCoefficient(alpha, l) +
                             l * std::log(w) + (alpha - l) * std::log1p(-w);
      terms.push_back(log_pmf +
                      divergence::gaussian_log_renyi_moment(1.0, sigma, l));
    }
    const double expected = numeric::LogSumExp(terms);
    const auto v = divergence::renyi_moment(p, q, alpha,
                                            {.method = Method::kQuadrature});
    CHECK(v.log_value ==
          doctest::Approx(expected).epsilon(std::max(1e-8, 1e-11 * alpha)));
  }
}
