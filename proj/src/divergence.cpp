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
#include "dpamp/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpamp/errors.hpp"
#include "dpamp/numeric.hpp"

namespace dpamp::divergence {

namespace {

using mixtures::Family;
using mixtures::MixtureDistribution;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Window padding in units of the noise scale. Gaussian mass beyond 13 sigma
// is ~6e-39; Laplace needs a much wider margin for the same headroom.
double TailPadding(Family family) {
  return family == Family::kGaussian ? 13.0 : 60.0;
}

void RequireMatchingFamilies(const MixtureDistribution& p,
                             const MixtureDistribution& q) {
  if (p.family() != q.family()) {
    throw UnsupportedError("divergence requires matching families and scales");
  }
}

std::vector<double> ComponentMeans(const MixtureDistribution& p,
                                   const MixtureDistribution& q) {
  std::vector<double> means;
  for (const auto& c : p.components()) means.push_back(c.location);
  for (const auto& c : q.components()) means.push_back(c.location);
  return means;
}

DivergenceValue MakeValue(double value, Method method,
                          Direction direction = Direction::kPoint) {
  DivergenceValue out;
  out.value = value;
  out.log_value = value > 0 ? std::log(value) : -kInf;
  out.method = method;
  out.direction = direction;
  return out;
}

DivergenceValue MakeLogValue(double log_value, Method method) {
  DivergenceValue out;
  out.value = std::exp(log_value);
  out.log_value = log_value;
  out.method = method;
  out.direction = Direction::kPoint;
  return out;
}

DivergenceValue ExactBernoulliHockeyStick(const MixtureDistribution& p,
                                          const MixtureDistribution& q,
                                          double alpha) {
  return MakeValue(bernoulli_hockey_stick(p.bernoulli_success_probability(),
                                          q.bernoulli_success_probability(),
                                          alpha),
                   Method::kExact);
}

DivergenceValue QuadratureHockeyStick(const MixtureDistribution& p,
                                      const MixtureDistribution& q,
                                      double alpha, double tol) {
  // The integrand is bounded by the density of p, so a window holding all of
  // p's mass (up to negligible tails) suffices.
  const double pad = TailPadding(p.family().kind()) * p.family().scale();
  const double lo = std::min(p.min_location(), q.min_location()) - pad;
  const double hi = std::max(p.max_location(), q.max_location()) + pad;
  auto integrand = [&](double z) {
    const double pv = mixtures::density(p, z);
    const double qv = mixtures::density(q, z);
    return std::max(pv - alpha * qv, 0.0);
  };
  const double raw =
      numeric::Integrate(integrand, lo, hi, ComponentMeans(p, q), tol);
  return MakeValue(std::clamp(raw, 0.0, 1.0), Method::kQuadrature);
}

// H_alpha via the loss characterization
//   H_alpha <= Pr[L_{P,Q} > log alpha] - alpha Pr[L_{Q,P} < -log alpha],
// with the threshold z* located by bisection on the monotone loss. Rounding
// the bisection bracket outward gives a pessimistic (>= true) value; inward
// gives an optimistic (<= true) one.
DivergenceValue LossBisectionHockeyStick(const MixtureDistribution& p_in,
                                         const MixtureDistribution& q_in,
                                         double alpha,
                                         const EvalOptions& options) {
  if (p_in.family().kind() == Family::kBernoulli) {
    // The exact two-term sum is both pessimistic and optimistic.
    DivergenceValue v = ExactBernoulliHockeyStick(p_in, q_in, alpha);
    v.direction = options.direction;
    return v;
  }
  if (alpha <= 0) {
    return MakeValue(1.0, Method::kLossBisection, options.direction);
  }
  const double target = std::log(alpha);

  // Sample the loss over the default bracket: classify it as constant,
  // nondecreasing, or nonincreasing, and reject anything else.
  MixtureDistribution p = p_in;
  MixtureDistribution q = q_in;
  auto bracket = mixtures::default_loss_bracket(p, q);
  {
    std::vector<double> samples;
    for (int i = 0; i <= 64; ++i) {
      const double z =
          bracket.first + (bracket.second - bracket.first) * i / 64.0;
      samples.push_back(mixtures::privacy_loss(p, q, z));
    }
    const double span =
        *std::max_element(samples.begin(), samples.end()) -
        *std::min_element(samples.begin(), samples.end());
    if (span <= 1e-12) {
      // Constant loss: p and q coincide, H_alpha(p || p) = max(1 - alpha, 0).
      return MakeValue(std::max(0.0, 1.0 - alpha), Method::kLossBisection,
                       options.direction);
    }
    const double slack = 1e-9 * std::max(1.0, span);
    bool nondecreasing = true;
    bool nonincreasing = true;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
      if (samples[i + 1] < samples[i] - slack) nondecreasing = false;
      if (samples[i + 1] > samples[i] + slack) nonincreasing = false;
    }
    if (!nondecreasing && !nonincreasing) {
      throw PreconditionError(
          "loss-bisection requires a monotone privacy loss");
    }
    if (!nondecreasing) {
      p = p_in.reflected();
      q = q_in.reflected();
      bracket = mixtures::default_loss_bracket(p, q);
    }
  }
  double loss_lo = mixtures::privacy_loss(p, q, bracket.first);
  double loss_hi = mixtures::privacy_loss(p, q, bracket.second);

  // Gaussian losses are unbounded; widen until the target is bracketed.
  // Laplace losses saturate outside the component means, so widening stops
  // changing the endpoint values there; the saturated value is then the
  // attained extremum of the loss.
  bool saturated_high = false;
  bool saturated_low = false;
  double margin = bracket.second - bracket.first;
  for (int i = 0; target > loss_hi; ++i) {
    const double next = bracket.second + margin;
    const double next_loss = mixtures::privacy_loss(p, q, next);
    if (i >= 64 || next_loss <= loss_hi + 1e-13) {
      saturated_high = next_loss <= loss_hi + 1e-13;
      break;
    }
    bracket.second = next;
    loss_hi = next_loss;
    margin *= 2;
  }
  margin = bracket.second - bracket.first;
  for (int i = 0; target < loss_lo; ++i) {
    const double next = bracket.first - margin;
    const double next_loss = mixtures::privacy_loss(p, q, next);
    if (i >= 64 || next_loss >= loss_lo - 1e-13) {
      saturated_low = next_loss >= loss_lo - 1e-13;
      break;
    }
    bracket.first = next;
    loss_lo = next_loss;
    margin *= 2;
  }

  double pessimistic = 0;
  double optimistic = 0;
  if (target > loss_hi) {
    // No point attains the threshold. With a saturated (attained) maximal
    // loss the divergence is exactly zero; otherwise only mass beyond the
    // searched bracket could contribute.
    pessimistic = saturated_high ? 0.0 : 1.0 - mixtures::cdf(p, bracket.second);
    optimistic = 0.0;
  } else if (target < loss_lo) {
    // The whole line exceeds the threshold, up to mass beyond the bracket.
    const double base = std::max(0.0, 1.0 - alpha);
    pessimistic =
        base + (saturated_low ? 0.0 : alpha * mixtures::cdf(q, bracket.first));
    optimistic = base;
  } else {
    auto loss = [&](double z) { return mixtures::privacy_loss(p, q, z); };
    const auto b = numeric::BisectNondecreasing(
        loss, bracket.first, bracket.second, target, options.bisection_tol);
    pessimistic = (1.0 - mixtures::cdf(p, b.lower)) -
                  alpha * (1.0 - mixtures::cdf(q, b.upper));
    optimistic = (1.0 - mixtures::cdf(p, b.upper)) -
                 alpha * (1.0 - mixtures::cdf(q, b.lower));
  }
  pessimistic = std::clamp(pessimistic, 0.0, 1.0);
  optimistic = std::clamp(optimistic, 0.0, 1.0);
  const bool pess = options.direction != Direction::kOptimistic;
  return MakeValue(pess ? pessimistic : optimistic, Method::kLossBisection,
                   pess ? Direction::kPessimistic : Direction::kOptimistic);
}

bool IsSingleComponentPair(const MixtureDistribution& p,
                           const MixtureDistribution& q) {
  return p.family().continuous() && p.components().size() == 1 &&
         q.components().size() == 1;
}

DivergenceValue ClosedFormRenyi(const MixtureDistribution& p,
                                const MixtureDistribution& q, double alpha) {
  const double d = p.components()[0].location - q.components()[0].location;
  const double scale = p.family().scale();
  const double log_value =
      p.family().kind() == Family::kGaussian
          ? gaussian_log_renyi_moment(d, scale, alpha)
          : laplace_log_renyi_moment(d, scale, alpha);
  DivergenceValue v = MakeLogValue(log_value, Method::kClosedForm);
  return v;
}

DivergenceValue ClosedFormHockeyStick(const MixtureDistribution& p,
                                      const MixtureDistribution& q,
                                      double alpha) {
  if (alpha <= 0) return MakeValue(1.0, Method::kClosedForm);
  const double d = p.components()[0].location - q.components()[0].location;
  const double scale = p.family().scale();
  const double eps = std::log(alpha);
  const double v = p.family().kind() == Family::kGaussian
                       ? gaussian_hockey_stick(d, scale, eps)
                       : laplace_hockey_stick(d, scale, eps);
  return MakeValue(v, Method::kClosedForm);
}

// Lambda_alpha by quadrature, computed in log space: the integrand
// exp(alpha log p + (1-alpha) log q) is rescaled by its maximum over the
// peak candidates (component means and their alpha-shifted combinations)
// before integration, so large orders cannot overflow. Integration is
// restricted to padded neighborhoods of the points that actually contribute,
// which keeps the cost independent of how far the order shifts the peaks.
DivergenceValue QuadratureRenyi(const MixtureDistribution& p,
                                const MixtureDistribution& q, double alpha,
                                double tol) {
  std::vector<double> critical = ComponentMeans(p, q);
  for (const auto& cp : p.components()) {
    for (const auto& cq : q.components()) {
      critical.push_back(alpha * cp.location - (alpha - 1.0) * cq.location);
    }
  }
  const double scale = p.family().scale();
  const double pad = TailPadding(p.family().kind()) * scale;
  const double lo =
      *std::min_element(critical.begin(), critical.end()) - pad;
  const double hi =
      *std::max_element(critical.begin(), critical.end()) + pad;

  auto exponent = [&](double z) {
    return alpha * mixtures::log_density(p, z) +
           (1.0 - alpha) * mixtures::log_density(q, z);
  };
  // The exponent is a difference of terms of this magnitude; their
  // cancellation sets the floating-point noise floor of the integrand.
  auto exponent_magnitude = [&](double z) {
    return std::max(std::abs(alpha * mixtures::log_density(p, z)),
                    std::abs((1.0 - alpha) * mixtures::log_density(q, z)));
  };

  // Probe candidates: the critical points plus a grid fine enough that no
  // feature of width `scale` can hide between samples.
  std::vector<double> probes = critical;
  const int grid = std::max(
      256, static_cast<int>(std::min(1e6, 2.0 * (hi - lo) / scale)) + 1);
  for (int i = 0; i <= grid; ++i) {
    probes.push_back(lo + (hi - lo) * i / grid);
  }
  double shift = -kInf;
  for (double z : probes) shift = std::max(shift, exponent(z));

  // Merge padded intervals around every probe within e^-45 of the maximum;
  // deeper valleys are invisible at double precision and excluding them
  // keeps the adaptive subdivision off of them.
  std::vector<double> contributing;
  double magnitude = 1.0;
  for (double z : probes) {
    if (exponent(z) >= shift - 45.0) {
      contributing.push_back(z);
      magnitude = std::max(magnitude, exponent_magnitude(z));
    }
  }
  std::sort(contributing.begin(), contributing.end());
  std::vector<std::pair<double, double>> windows;
  for (double z : contributing) {
    const double w_lo = std::max(lo, z - pad);
    const double w_hi = std::min(hi, z + pad);
    if (!windows.empty() && w_lo <= windows.back().second) {
      windows.back().second = std::max(windows.back().second, w_hi);
    } else {
      windows.push_back({w_lo, w_hi});
    }
  }

  // The cancellation in the exponent leaves the integrand with relative
  // noise of roughly `magnitude` ulps; subdividing below that floor cannot
  // improve the estimate.
  const double noise_floor = magnitude * 1e-15;
  const double effective_tol = std::max(tol, noise_floor);
  auto integrand = [&](double z) { return std::exp(exponent(z) - shift); };
  double scaled = 0;
  for (const auto& [w_lo, w_hi] : windows) {
    scaled += numeric::Integrate(integrand, w_lo, w_hi, critical,
                                 effective_tol, 1e-14);
  }
  return MakeLogValue(shift + std::log(scaled), Method::kQuadrature);
}

}  // namespace

double gaussian_log_renyi_moment(double distance, double sigma, double alpha) {
  return alpha * (alpha - 1.0) * distance * distance / (2.0 * sigma * sigma);
}

double laplace_log_renyi_moment(double distance, double lambda, double alpha) {
  const double t = std::abs(distance) / lambda;
  if (t == 0 || alpha == 0 || alpha == 1) return 0;
  const double terms[2] = {
      std::log(alpha / (2.0 * alpha - 1.0)) + (alpha - 1.0) * t,
      std::log((alpha - 1.0) / (2.0 * alpha - 1.0)) - alpha * t};
  return numeric::LogSumExp(terms);
}

double bernoulli_log_renyi_moment(double p_success, double q_success,
                                  double alpha) {
  double terms[2];
  int count = 0;
  const double outcomes[2][2] = {{p_success, q_success},
                                 {1.0 - p_success, 1.0 - q_success}};
  for (const auto& pq : outcomes) {
    const double pv = pq[0];
    const double qv = pq[1];
    if (pv == 0) continue;  // 0^alpha = 0 for alpha > 0
    if (qv == 0) return kInf;
    terms[count++] = alpha * std::log(pv) + (1.0 - alpha) * std::log(qv);
  }
  return numeric::LogSumExp(std::span<const double>(terms, count));
}

double gaussian_hockey_stick(double distance, double sigma, double epsilon) {
  const double t = std::abs(distance);
  if (t == 0) return std::max(0.0, 1.0 - std::exp(epsilon));
  const double a = t / (2.0 * sigma) - epsilon * sigma / t;
  const double b = -t / (2.0 * sigma) - epsilon * sigma / t;
  const double v = numeric::NormalCdf(a) - std::exp(epsilon) * numeric::NormalCdf(b);
  return std::clamp(v, 0.0, 1.0);
}

double laplace_hockey_stick(double distance, double lambda, double epsilon) {
  const double t = std::abs(distance) / lambda;
  if (epsilon >= t) return 0.0;
  if (epsilon < -t) return 1.0 - std::exp(epsilon);
  return 1.0 - std::exp(0.5 * (epsilon - t));
}

double bernoulli_hockey_stick(double p_success, double q_success,
                              double alpha) {
  const double at_one = std::max(p_success - alpha * q_success, 0.0);
  const double at_zero =
      std::max((1.0 - p_success) - alpha * (1.0 - q_success), 0.0);
  return std::clamp(at_one + at_zero, 0.0, 1.0);
}

DivergenceValue hockey_stick(const MixtureDistribution& p,
                             const MixtureDistribution& q, double alpha,
                             const EvalOptions& options) {
  RequireMatchingFamilies(p, q);
  if (alpha < 0) throw InvalidArgumentError("hockey stick requires alpha >= 0");
  switch (options.method) {
    case Method::kExact:
      if (p.family().continuous()) {
        throw UnsupportedError("exact sums require a discrete family");
      }
      return ExactBernoulliHockeyStick(p, q, alpha);
    case Method::kQuadrature:
      if (!p.family().continuous()) {
        return ExactBernoulliHockeyStick(p, q, alpha);
      }
      return QuadratureHockeyStick(p, q, alpha, options.quadrature_tol);
    case Method::kLossBisection:
      return LossBisectionHockeyStick(p, q, alpha, options);
    case Method::kClosedForm:
      if (!IsSingleComponentPair(p, q)) {
        throw UnsupportedError(
            "closed form requires single-component continuous pairs");
      }
      return ClosedFormHockeyStick(p, q, alpha);
    case Method::kAuto:
      if (!p.family().continuous()) return ExactBernoulliHockeyStick(p, q, alpha);
      if (IsSingleComponentPair(p, q)) return ClosedFormHockeyStick(p, q, alpha);
      return QuadratureHockeyStick(p, q, alpha, options.quadrature_tol);
  }
  throw UnsupportedError("unknown method");
}

DivergenceValue renyi_moment(const MixtureDistribution& p,
                             const MixtureDistribution& q, double alpha,
                             const EvalOptions& options) {
  RequireMatchingFamilies(p, q);
  if (!(alpha > 1)) {
    throw InvalidArgumentError("Renyi moment requires alpha > 1");
  }
  switch (options.method) {
    case Method::kExact:
      if (p.family().continuous()) {
        throw UnsupportedError("exact sums require a discrete family");
      }
      return MakeLogValue(
          bernoulli_log_renyi_moment(p.bernoulli_success_probability(),
                                     q.bernoulli_success_probability(), alpha),
          Method::kExact);
    case Method::kQuadrature:
      if (!p.family().continuous()) {
        return renyi_moment(p, q, alpha,
                            {.method = Method::kExact});
      }
      return QuadratureRenyi(p, q, alpha, options.quadrature_tol);
    case Method::kClosedForm:
      if (!IsSingleComponentPair(p, q)) {
        throw UnsupportedError(
            "closed form requires single-component continuous pairs");
      }
      return ClosedFormRenyi(p, q, alpha);
    case Method::kLossBisection:
      throw UnsupportedError("loss bisection evaluates hockey sticks only");
    case Method::kAuto:
      if (!p.family().continuous()) {
        return renyi_moment(p, q, alpha, {.method = Method::kExact});
      }
      if (IsSingleComponentPair(p, q)) return ClosedFormRenyi(p, q, alpha);
      return QuadratureRenyi(p, q, alpha, options.quadrature_tol);
  }
  throw UnsupportedError("unknown method");
}

DivergenceValue divergence_of_candidates(
    const std::vector<CandidatePair>& candidates, double alpha, Kind kind,
    const EvalOptions& options) {
  if (candidates.empty()) {
    throw InvalidArgumentError("candidate set must be nonempty");
  }
  const auto& family = candidates.front().p.family();
  for (const auto& c : candidates) {
    if (c.p.family() != family || c.q.family() != family) {
      throw UnsupportedError("candidate set must share one family");
    }
  }
  DivergenceValue best;
  bool first = true;
  for (const auto& c : candidates) {
    DivergenceValue v = kind == Kind::kHockeyStick
                            ? hockey_stick(c.p, c.q, alpha, options)
                            : renyi_moment(c.p, c.q, alpha, options);
    if (first || v.log_value > best.log_value) best = v;
    first = false;
  }
  return best;
}

}  // namespace dpamp::divergence
