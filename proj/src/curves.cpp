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
#include "dpamp/curves.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dpamp::curves {

void monotone_repair(RdpCurve& curve) {
  // A bound valid at a larger order bounds every smaller order too.
  double running = std::numeric_limits<double>::infinity();
  for (auto it = curve.points.rbegin(); it != curve.points.rend(); ++it) {
    running = std::min(running, it->rho);
    it->rho = running;
  }
}

void monotone_repair(PrivacyCurve& curve) {
  // A bound valid at a smaller epsilon bounds every larger epsilon too.
  double running = 1.0;
  for (auto& pt : curve.points) {
    pt.delta = std::clamp(pt.delta, 0.0, 1.0);
    running = std::min(running, pt.delta);
    pt.delta = running;
  }
}

}  // namespace dpamp::curves
