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
#include <functional>
#include <span>
#include <vector>

namespace dpamp::numeric {

// log(sum_i exp(values[i])), stable against overflow. Empty input -> -inf.
double LogSumExp(std::span<const double> values);

// log of the binomial coefficient C(n, k) for real n >= 0, integer 0 <= k.
// Returns -inf for k > n when n is integral.
double LogBinomialCoefficient(double n, double k);

// Binom(k | n, p) for integer 0 <= k <= n, p in [0, 1]. Exact at p in {0, 1}.
double BinomialPmf(int k, int n, double p);

// HyperGeom(k | N, K, q): probability of drawing k marked elements when
// drawing q of N elements without replacement, K of which are marked.
double HypergeometricPmf(int k, int population, int marked, int draws);

// Standard normal CDF / log-density.
double NormalCdf(double z);
double NormalLogPdf(double z);

// Centered Laplace(b) CDF / log-density at z (location 0, scale b = 1 here;
// callers shift and scale).
double StandardLaplaceCdf(double z);
double StandardLaplaceLogPdf(double z);

// Adaptive Gauss-Kronrod integration of f over [lower, upper], splitting the
// domain at the given interior points first (integrands are allowed to have
// kinks there). Throws NumericalError if the accumulated error estimate
// exceeds what rel_tol permits by a wide margin and also exceeds abs_tol;
// nested quadratures pass the absolute scale that actually matters to them.
double Integrate(const std::function<double(double)>& f, double lower,
                 double upper, std::vector<double> interior_splits,
                 double rel_tol, double abs_tol = 1e-250);

struct Bracket {
  double lower = 0;
  double upper = 0;
  double midpoint() const { return 0.5 * (lower + upper); }
  double width() const { return upper - lower; }
};

// Bisection for f(z) = target with f nondecreasing on [lower, upper].
// Endpoints must bracket the target. Returns the final bracket of width
// <= tol (absolute). Flat stretches are permitted.
Bracket BisectNondecreasing(const std::function<double(double)>& f,
                            double lower, double upper, double target,
                            double tol);

// Deterministic, implementation-independent pseudo random helpers used by
// the oracle's randomized checks (std::uniform_int_distribution is not
// portable across standard libraries).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t Next();
  // Uniform integer in [0, n).
  std::uint64_t NextBelow(std::uint64_t n);
  // Uniform double in [0, 1).
  double NextDouble();

 private:
  std::uint64_t state_;
};

}  // namespace dpamp::numeric
