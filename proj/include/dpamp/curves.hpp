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

namespace dpamp::curves {

struct RdpPoint {
  double alpha = 0;  // > 1
  double rho = 0;    // >= 0
};

// An RDP curve: rho(alpha) = log(Lambda_alpha) / (alpha - 1) at strictly
// increasing orders.
struct RdpCurve {
  std::vector<RdpPoint> points;
};

struct PrivacyPoint {
  double epsilon = 0;
  double delta = 0;
};

// A delta(epsilon) curve plus provenance metadata.
struct PrivacyCurve {
  std::vector<PrivacyPoint> points;
  std::string method;
  std::map<std::string, std::string> metadata;
};

// Enforces rho nondecreasing in alpha by replacing each point with the
// minimum over itself and all later (larger-alpha) points. A bound valid at
// a larger order is valid at any smaller order, so this only improves the
// curve. Idempotent.
void monotone_repair(RdpCurve& curve);

// Enforces delta nonincreasing in epsilon by replacing each point with the
// minimum over itself and all earlier (smaller-epsilon) points, and clips
// delta to [0, 1]. Idempotent.
void monotone_repair(PrivacyCurve& curve);

}  // namespace dpamp::curves
