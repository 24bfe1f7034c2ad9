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
#include "dpamp/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dpamp/errors.hpp"

namespace dpamp::numeric {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;
}  // namespace

double LogSumExp(std::span<const double> values) {
  double max_value = -kInf;
  for (double v : values) max_value = std::max(max_value, v);
  if (!std::isfinite(max_value)) return max_value;
  double sum = 0;
  for (double v : values) sum += std::exp(v - max_value);
  return max_value + std::log(sum);
}

double LogBinomialCoefficient(double n, double k) {
  if (k < 0) return -kInf;
  if (k == 0 || k == n) return 0;
  if (k > n) return -kInf;
  return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

double BinomialPmf(int k, int n, double p) {
  if (k < 0 || k > n) return 0;
  if (p <= 0) return k == 0 ? 1 : 0;
  if (p >= 1) return k == n ? 1 : 0;
  const double log_pmf = LogBinomialCoefficient(n, k) + k * std::log(p) +
                         (n - k) * std::log1p(-p);
  return std::exp(log_pmf);
}

double HypergeometricPmf(int k, int population, int marked, int draws) {
  if (marked < 0 || draws < 0 || marked > population || draws > population) {
    throw InvalidArgumentError("hypergeometric parameters out of range");
  }
  if (k < 0 || k > marked || k > draws || draws - k > population - marked) {
    return 0;
  }
  const double log_pmf = LogBinomialCoefficient(marked, k) +
                         LogBinomialCoefficient(population - marked, draws - k) -
                         LogBinomialCoefficient(population, draws);
  return std::exp(log_pmf);
}

double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double NormalLogPdf(double z) {
  return -0.5 * z * z - 0.5 * std::log(2.0 * kPi);
}

double StandardLaplaceCdf(double z) {
  if (z < 0) return 0.5 * std::exp(z);
  return 1.0 - 0.5 * std::exp(-z);
}

double StandardLaplaceLogPdf(double z) {
  return -std::abs(z) - std::log(2.0);
}

double Integrate(const std::function<double(double)>& f, double lower,
                 double upper, std::vector<double> interior_splits,
                 double rel_tol, double abs_tol) {
  if (!(lower < upper)) return 0;
  std::vector<double> knots;
  knots.push_back(lower);
  std::sort(interior_splits.begin(), interior_splits.end());
  for (double s : interior_splits) {
    if (s > lower && s < upper) knots.push_back(s);
  }
  knots.push_back(upper);
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 15>;
  double total = 0;
  double total_error = 0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    double error = 0;
    total += Quadrature::integrate(f, knots[i], knots[i + 1],
                                   /*max_depth=*/20, rel_tol, &error);
    total_error += error;
  }
  const double scale = std::max(std::abs(total), 1e-300);
  if (total_error > 1e6 * rel_tol * scale + abs_tol) {
    throw NumericalError("quadrature failed to converge to requested tolerance");
  }
  return total;
}

Bracket BisectNondecreasing(const std::function<double(double)>& f,
                            double lower, double upper, double target,
                            double tol) {
  if (!(lower < upper)) throw BracketError("empty bisection bracket");
  double f_lower = f(lower);
  double f_upper = f(upper);
  if (f_lower > target || f_upper < target) {
    throw BracketError("endpoints do not bracket the target value");
  }
  // Invariant: f(lower) <= target <= f(upper).
  for (int iter = 0; iter < 200 && (upper - lower) > tol; ++iter) {
    const double mid = 0.5 * (lower + upper);
    if (mid <= lower || mid >= upper) break;  // hit floating point resolution
    if (f(mid) <= target) {
      lower = mid;
    } else {
      upper = mid;
    }
  }
  return Bracket{lower, upper};
}

std::uint64_t SplitMix64::Next() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::NextBelow(std::uint64_t n) {
  return n == 0 ? 0 : Next() % n;
}

double SplitMix64::NextDouble() {
  return static_cast<double>(Next() >> 11) * 0x1.0p-53;
}

}  // namespace dpamp::numeric
