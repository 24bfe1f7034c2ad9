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
#include "dpamp/accounting.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include <nlohmann/json.hpp>

#include "dpamp/errors.hpp"
#include "dpamp/numeric.hpp"

namespace dpamp::accounting {

namespace {

using divergence::CandidatePair;
using mixtures::MixtureDistribution;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::int64_t CeilIndex(double loss, double step) {
  return static_cast<std::int64_t>(std::ceil(loss / step - 1e-9));
}

std::int64_t FloorIndex(double loss, double step) {
  return static_cast<std::int64_t>(std::floor(loss / step + 1e-9));
}

void AddAtom(PrivacyLossDistribution& pld, std::int64_t index, double mass) {
  if (mass <= 0) return;
  if (pld.masses.empty()) {
    pld.min_index = index;
    pld.masses.push_back(mass);
    return;
  }
  if (index < pld.min_index) {
    pld.masses.insert(pld.masses.begin(), pld.min_index - index, 0.0);
    pld.min_index = index;
  } else if (index > pld.max_index()) {
    pld.masses.resize(index - pld.min_index + 1, 0.0);
  }
  pld.masses[index - pld.min_index] += mass;
}

// Offset t such that a single component's tail mass beyond its location + t
// is at most `prob`; anchored at the extreme component location this bounds
// the whole mixture's tail. Working with near-zero tail targets avoids the
// catastrophic rounding of CDF values near 1.
double TailOffset(const mixtures::ComponentFamily& family, double prob) {
  const double scale = family.scale();
  if (family.kind() == mixtures::Family::kLaplace) {
    return scale * std::log(0.5 / prob);
  }
  auto tail = [&](double t) { return numeric::NormalCdf(-t / scale); };
  double hi = scale;
  while (tail(hi) > prob && hi < 1e6 * scale) hi *= 2;
  auto negated = [&](double t) { return -tail(t); };
  return numeric::BisectNondecreasing(negated, 0.0, hi, -prob,
                                      1e-9 * scale)
      .upper;
}

PrivacyLossDistribution DiscretePldFromPair(const CandidatePair& pair,
                                            const PldOptions& options) {
  PrivacyLossDistribution pld;
  pld.grid_step = options.grid_step;
  pld.pessimistic = options.pessimistic;
  const double p1 = pair.p.bernoulli_success_probability();
  const double q1 = pair.q.bernoulli_success_probability();
  const double outcomes[2][2] = {{p1, q1}, {1.0 - p1, 1.0 - q1}};
  for (const auto& pq : outcomes) {
    const double p_mass = pq[0];
    const double q_mass = pq[1];
    if (p_mass <= 0) continue;
    if (q_mass <= 0) {
      pld.inf_mass += p_mass;
      continue;
    }
    const double loss = std::log(p_mass) - std::log(q_mass);
    const std::int64_t index = options.pessimistic
                                   ? CeilIndex(loss, pld.grid_step)
                                   : FloorIndex(loss, pld.grid_step);
    AddAtom(pld, index, p_mass);
  }
  if (pld.masses.empty()) AddAtom(pld, 0, 0.0);
  return pld;
}

PrivacyLossDistribution ContinuousPldFromPair(const CandidatePair& pair,
                                              const PldOptions& options) {
  MixtureDistribution p = pair.p;
  MixtureDistribution q = pair.q;

  // Orient the pair so the privacy loss is nondecreasing in z.
  auto bracket = mixtures::default_loss_bracket(p, q);
  double loss_at_lo = mixtures::privacy_loss(p, q, bracket.first);
  double loss_at_hi = mixtures::privacy_loss(p, q, bracket.second);
  if (loss_at_hi < loss_at_lo) {
    p = p.reflected();
    q = q.reflected();
    bracket = mixtures::default_loss_bracket(p, q);
  }
  auto loss = [&](double z) { return mixtures::privacy_loss(p, q, z); };
  {
    const double slack = 1e-9;
    double previous = -kInf;
    for (int i = 0; i <= 64; ++i) {
      const double z =
          bracket.first + (bracket.second - bracket.first) * i / 64.0;
      const double l = loss(z);
      if (l < previous - slack) {
        throw PreconditionError("PLD discretization requires a monotone loss");
      }
      previous = std::max(previous, l);
    }
  }

  const double step = options.grid_step;
  const double offset = TailOffset(p.family(), options.tail_mass_cutoff / 2);
  const double z_lo = p.min_location() - offset;
  const double z_hi = p.max_location() + offset;
  const double loss_lo = loss(z_lo);
  const double loss_hi = loss(z_hi);
  if ((loss_hi - loss_lo) / step > 5e7) {
    throw SizeLimitError("privacy loss range too wide for this grid step");
  }

  PrivacyLossDistribution pld;
  pld.grid_step = step;
  pld.pessimistic = options.pessimistic;

  const double lower_tail = mixtures::cdf(p, z_lo);
  const double upper_tail = 1.0 - mixtures::cdf(p, z_hi);

  if (options.pessimistic) {
    // Bucket i holds losses in ((i-1) h, i h], each rounded up to i h.
    const std::int64_t first = CeilIndex(loss_lo, step);
    const std::int64_t last = CeilIndex(loss_hi, step);
    double prev_z = z_lo;
    double prev_cdf = lower_tail;
    for (std::int64_t i = first; i <= last; ++i) {
      double z_boundary = z_hi;
      if (i < last) {
        const double target = static_cast<double>(i) * step;
        if (target >= loss_hi) {
          z_boundary = z_hi;
        } else if (target <= loss(prev_z)) {
          z_boundary = prev_z;
        } else {
          z_boundary = numeric::BisectNondecreasing(loss, prev_z, z_hi, target,
                                                    options.bisection_tol)
                           .midpoint();
        }
      }
      z_boundary = std::max(z_boundary, prev_z);
      const double cdf_here = mixtures::cdf(p, z_boundary);
      AddAtom(pld, i, std::max(0.0, cdf_here - prev_cdf));
      prev_z = z_boundary;
      prev_cdf = cdf_here;
    }
    // Tail losses below loss_lo round up into the first bucket; tail losses
    // above loss_hi are accounted as +infinity.
    AddAtom(pld, first, lower_tail);
    pld.inf_mass += upper_tail;
  } else {
    // Bucket i holds losses in [i h, (i+1) h), each rounded down to i h.
    const std::int64_t first = FloorIndex(loss_lo, step);
    const std::int64_t last = FloorIndex(loss_hi, step);
    double prev_z = z_lo;
    double prev_cdf = lower_tail;
    for (std::int64_t i = first; i <= last; ++i) {
      double z_boundary = z_hi;
      if (i < last) {
        const double target = static_cast<double>(i + 1) * step;
        if (target >= loss_hi) {
          z_boundary = z_hi;
        } else if (target <= loss(prev_z)) {
          z_boundary = prev_z;
        } else {
          z_boundary = numeric::BisectNondecreasing(loss, prev_z, z_hi, target,
                                                    options.bisection_tol)
                           .midpoint();
        }
      }
      z_boundary = std::max(z_boundary, prev_z);
      const double cdf_here = mixtures::cdf(p, z_boundary);
      AddAtom(pld, i, std::max(0.0, cdf_here - prev_cdf));
      prev_z = z_boundary;
      prev_cdf = cdf_here;
    }
    // Tail losses above loss_hi round down into the last bucket; tail losses
    // below loss_lo cannot be bounded from below and are dropped.
    AddAtom(pld, last, upper_tail);
    pld.dropped_mass += lower_tail;
  }
  return pld;
}

void Fft(std::vector<std::complex<double>>& a, bool invert) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = 2.0 * M_PI / static_cast<double>(len) * (invert ? -1 : 1);
    const std::complex<double> root(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= root;
      }
    }
  }
  if (invert) {
    for (auto& x : a) x /= static_cast<double>(n);
  }
}

std::vector<double> ConvolveDirect(const std::vector<double>& a,
                                   const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) {
      out[i + j] += a[i] * b[j];
    }
  }
  return out;
}

std::vector<double> ConvolveFft(const std::vector<double>& a,
                                const std::vector<double>& b,
                                double& negative_overflow) {
  std::size_t n = 1;
  while (n < a.size() + b.size() - 1) n <<= 1;
  std::vector<std::complex<double>> fa(n), fb(n);
  std::copy(a.begin(), a.end(), fa.begin());
  std::copy(b.begin(), b.end(), fb.begin());
  Fft(fa, false);
  Fft(fb, false);
  for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
  Fft(fa, true);
  std::vector<double> out(a.size() + b.size() - 1);
  negative_overflow = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double v = fa[i].real();
    if (v < 0) {
      if (v < -1e-12) {
        throw NumericalError("FFT convolution produced mass below -1e-12");
      }
      negative_overflow += -v;
      v = 0;
    }
    out[i] = v;
  }
  return out;
}

void TruncateTails(PrivacyLossDistribution& pld, double budget) {
  if (budget <= 0 || pld.masses.empty()) return;
  const double per_side = budget / 2;
  std::size_t first = 0;
  std::size_t last = pld.masses.size();
  double removed = 0;
  double acc = 0;
  while (first + 1 < last && acc + pld.masses[first] <= per_side) {
    acc += pld.masses[first];
    ++first;
  }
  removed += acc;
  acc = 0;
  while (last > first + 1 && acc + pld.masses[last - 1] <= per_side) {
    acc += pld.masses[last - 1];
    --last;
  }
  removed += acc;
  if (first == 0 && last == pld.masses.size()) return;
  std::vector<double> kept(pld.masses.begin() + first,
                           pld.masses.begin() + last);
  pld.min_index += static_cast<std::int64_t>(first);
  pld.masses = std::move(kept);
  if (pld.pessimistic) {
    pld.inf_mass += removed;
  } else {
    pld.dropped_mass += removed;
  }
}

}  // namespace

double PrivacyLossDistribution::finite_mass() const {
  double sum = 0;
  for (double m : masses) sum += m;
  return sum;
}

PrivacyLossDistribution pld_from_pair(const CandidatePair& pair,
                                      const PldOptions& options) {
  if (pair.p.family() != pair.q.family()) {
    throw UnsupportedError("PLD requires matching families");
  }
  if (!(options.grid_step > 0)) {
    throw InvalidArgumentError("grid step must be positive");
  }
  if (pair.p.family().continuous()) {
    return ContinuousPldFromPair(pair, options);
  }
  return DiscretePldFromPair(pair, options);
}

PrivacyLossDistribution pld_convolve(const PrivacyLossDistribution& a,
                                     const PrivacyLossDistribution& b,
                                     const ComposeOptions& options) {
  if (std::abs(a.grid_step - b.grid_step) > 1e-15 * a.grid_step) {
    throw InvalidArgumentError("convolution requires matching grid steps");
  }
  if (a.pessimistic != b.pessimistic) {
    throw InvalidArgumentError(
        "mixed pessimistic/optimistic composition is forbidden");
  }
  const std::size_t out_size = a.masses.size() + b.masses.size() - 1;
  if (out_size > options.max_support) {
    throw SizeLimitError("convolution support exceeds the configured maximum");
  }
  PrivacyLossDistribution out;
  out.grid_step = a.grid_step;
  out.pessimistic = a.pessimistic;
  out.min_index = a.min_index + b.min_index;
  double negative_overflow = 0;
  out.masses = options.backend == ConvolutionBackend::kFft
                   ? ConvolveFft(a.masses, b.masses, negative_overflow)
                   : ConvolveDirect(a.masses, b.masses);
  out.inf_mass = a.inf_mass + b.inf_mass - a.inf_mass * b.inf_mass;
  if (out.pessimistic) {
    out.inf_mass += negative_overflow;
  } else {
    out.dropped_mass += negative_overflow;
  }
  out.dropped_mass += a.dropped_mass + b.dropped_mass;
  TruncateTails(out, options.truncation);
  return out;
}

PrivacyLossDistribution pld_compose(const PrivacyLossDistribution& pld,
                                    std::int64_t iterations,
                                    const ComposeOptions& options) {
  if (iterations < 1) throw InvalidArgumentError("iterations must be >= 1");
  PrivacyLossDistribution result;
  result.grid_step = pld.grid_step;
  result.pessimistic = pld.pessimistic;
  result.min_index = 0;
  result.masses = {1.0};
  PrivacyLossDistribution base = pld;
  std::int64_t t = iterations;
  while (t > 0) {
    if (t & 1) result = pld_convolve(result, base, options);
    t >>= 1;
    if (t > 0) base = pld_convolve(base, base, options);
  }
  return result;
}

double pld_delta(const PrivacyLossDistribution& pld, double epsilon) {
  double delta = pld.inf_mass;
  for (std::size_t i = 0; i < pld.masses.size(); ++i) {
    const double loss = pld.loss_at(i);
    if (loss <= epsilon) continue;
    delta += pld.masses[i] * -std::expm1(epsilon - loss);
  }
  return std::clamp(delta, 0.0, 1.0);
}

double pld_epsilon(const PrivacyLossDistribution& pld, double delta_target) {
  if (!(delta_target > 0) || delta_target > 1) {
    throw InvalidArgumentError("delta target must lie in (0, 1]");
  }
  if (pld.masses.empty()) {
    throw InvalidArgumentError("PLD has no finite mass");
  }
  if (pld.inf_mass > delta_target) return kInf;  // unreachable
  // At the top of the grid every finite loss is covered, so delta equals the
  // infinity mass and the target is reachable.
  std::int64_t hi = pld.max_index();
  // Find a lower bound whose delta exceeds the target; if none exists, every
  // epsilon qualifies.
  std::int64_t lo = pld.min_index;
  std::int64_t span = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(pld.masses.size()));
  int guard = 0;
  while (pld_delta(pld, lo * pld.grid_step) <= delta_target) {
    lo -= span;
    span *= 2;
    if (++guard > 64) return -kInf;
  }
  // Invariant: delta(lo) > target >= delta(hi).
  while (lo + 1 < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (pld_delta(pld, mid * pld.grid_step) <= delta_target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi * pld.grid_step;
}

nlohmann::json pld_to_json(const PrivacyLossDistribution& pld) {
  nlohmann::json doc;
  doc["version"] = 1;
  doc["grid_step"] = pld.grid_step;
  doc["min_index"] = pld.min_index;
  doc["masses"] = pld.masses;
  doc["inf_mass"] = pld.inf_mass;
  doc["pessimistic"] = pld.pessimistic;
  doc["dropped_mass"] = pld.dropped_mass;
  return doc;
}

PrivacyLossDistribution pld_from_json(const nlohmann::json& doc) {
  PrivacyLossDistribution pld;
  pld.grid_step = doc.at("grid_step").get<double>();
  pld.min_index = doc.at("min_index").get<std::int64_t>();
  pld.masses = doc.at("masses").get<std::vector<double>>();
  pld.inf_mass = doc.at("inf_mass").get<double>();
  pld.pessimistic = doc.at("pessimistic").get<bool>();
  pld.dropped_mass = doc.value("dropped_mass", 0.0);
  if (!(pld.grid_step > 0)) {
    throw InvalidArgumentError("grid step must be positive");
  }
  return pld;
}

curves::RdpCurve rdp_compose(const curves::RdpCurve& curve,
                             std::int64_t iterations) {
  if (iterations < 1) throw InvalidArgumentError("iterations must be >= 1");
  curves::RdpCurve out = curve;
  for (auto& pt : out.points) pt.rho *= static_cast<double>(iterations);
  return out;
}

double rdp_to_adp(const curves::RdpCurve& curve, double delta_target,
                  RdpToAdpFormula formula) {
  if (curve.points.empty()) {
    throw InvalidArgumentError("RDP curve must be nonempty");
  }
  if (!(delta_target > 0) || !(delta_target < 1)) {
    throw InvalidArgumentError("delta target must lie in (0, 1)");
  }
  double best = kInf;
  for (const auto& pt : curve.points) {
    const double alpha = pt.alpha;
    double eps;
    if (formula == RdpToAdpFormula::kStandard) {
      eps = pt.rho + std::log(1.0 / delta_target) / (alpha - 1.0);
    } else {
      eps = pt.rho + std::log((alpha - 1.0) / alpha) -
            (std::log(delta_target) + std::log(alpha)) / (alpha - 1.0);
    }
    best = std::min(best, eps);
  }
  return std::max(0.0, best);
}

namespace {

// Tight mechanism-specific delta at one epsilon: max over all relation
// splits (and randomized-response candidates) of the mixture hockey stick.
double SpecificDelta(const amplification::BaseMechanismSpec& mech, double rate,
                     int group_size, double epsilon,
                     const ProfileOptions& options) {
  divergence::EvalOptions eval;
  eval.method = divergence::Method::kLossBisection;
  eval.bisection_tol = options.bisection_tol;
  eval.direction = options.direction;
  return amplification::group_bound(mech, rate, group_size,
                                    std::exp(epsilon),
                                    divergence::Kind::kHockeyStick, eval)
      .value;
}

}  // namespace

curves::PrivacyCurve group_profile(
    const amplification::AmplificationSetting& setting, int group_size,
    GroupMethod method, std::span<const double> epsilon_grid,
    const ProfileOptions& options) {
  if (setting.scheme.tag != amplification::SubsamplingScheme::Tag::kPoisson) {
    throw UnsupportedError("group profiles are defined for Poisson subsampling");
  }
  if (group_size < 1) throw InvalidArgumentError("group size must be >= 1");
  if (epsilon_grid.empty()) {
    throw InvalidArgumentError("epsilon grid must be nonempty");
  }
  for (std::size_t i = 0; i + 1 < epsilon_grid.size(); ++i) {
    if (!(epsilon_grid[i] <= epsilon_grid[i + 1])) {
      throw InvalidArgumentError("epsilon grid must be sorted ascending");
    }
  }
  const auto& mech = setting.mechanism;
  const double rate = setting.scheme.rate;

  curves::PrivacyCurve curve;
  curve.metadata["group_size"] = std::to_string(group_size);
  curve.metadata["rate"] = std::to_string(rate);
  switch (mech.tag) {
    case amplification::BaseMechanismSpec::Tag::kGaussian:
      curve.metadata["mechanism"] = "gaussian";
      curve.metadata["noise_scale"] = std::to_string(mech.noise_scale);
      break;
    case amplification::BaseMechanismSpec::Tag::kLaplace:
      curve.metadata["mechanism"] = "laplace";
      curve.metadata["noise_scale"] = std::to_string(mech.noise_scale);
      break;
    case amplification::BaseMechanismSpec::Tag::kRandomizedResponse:
      curve.metadata["mechanism"] = "randomized-response";
      curve.metadata["theta"] = std::to_string(mech.theta);
      break;
  }
  for (const double eps : epsilon_grid) {
    double delta = 0;
    switch (method) {
      case GroupMethod::kSpecific: {
        curve.method = "specific";
        delta = SpecificDelta(mech, rate, group_size, eps, options);
        break;
      }
      case GroupMethod::kAgnostic: {
        curve.method = "agnostic";
        const double w = -std::expm1(group_size * std::log1p(-rate));
        if (w == 0) {
          delta = 0;
          break;
        }
        // Invert the amplified epsilon back to the base-mechanism epsilon.
        const double base_eps = std::log1p(std::expm1(eps) / w);
        delta = amplification::balle_group_adp(mech, rate, group_size, base_eps)
                    .delta;
        break;
      }
      case GroupMethod::kPosthoc: {
        curve.method = "posthoc";
        const double base_eps = eps / group_size;
        const double base_delta =
            SpecificDelta(mech, rate, 1, base_eps, options);
        delta = amplification::posthoc_group_adp(base_eps, base_delta,
                                                 group_size)
                    .delta;
        break;
      }
    }
    curve.points.push_back({eps, delta});
  }
  curves::monotone_repair(curve);
  return curve;
}

}  // namespace dpamp::accounting
