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
//
// Test-only numerical oracles, kept independent of the library's own
// quadrature path (adaptive Simpson here vs Gauss-Kronrod in src/).
#pragma once

#include <cmath>
#include <functional>

namespace dpamp::testing {

inline double SimpsonStep(double a, double b, double fa, double fm,
                          double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double AdaptiveSimpsonRec(const std::function<double(double)>& f,
                                 double a, double b, double fa, double fm,
                                 double fb, double whole, double tol,
                                 int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = SimpsonStep(a, m, fa, flm, fm);
  const double right = SimpsonStep(m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return AdaptiveSimpsonRec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         AdaptiveSimpsonRec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

// Adaptive Simpson quadrature; the independent cross-check for the
// library's Gauss-Kronrod results.
inline double AdaptiveSimpson(const std::function<double(double)>& f, double a,
                              double b, double tol = 1e-12, int depth = 40) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  return AdaptiveSimpsonRec(f, a, b, fa, fm, fb, SimpsonStep(a, b, fa, fm, fb),
                            tol, depth);
}

inline double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double NormalPdf(double z, double mean = 0, double sigma = 1) {
  const double u = (z - mean) / sigma;
  return std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * M_PI));
}

inline double LaplacePdf(double z, double mean = 0, double b = 1) {
  return 0.5 / b * std::exp(-std::abs(z - mean) / b);
}

}  // namespace dpamp::testing
