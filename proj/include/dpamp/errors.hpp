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

#include <stdexcept>
#include <string>

namespace dpamp {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid constructor/operation arguments (bad weights, degenerate relations,
// empty grids, invalid hypergeometric parameters, ...).
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// Point evaluation outside the distribution's support (e.g. Bernoulli
// density at z not in {0, 1}).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Operation not defined for the given family, mechanism, or divergence order
// (exact sums on continuous families, cdf of Bernoulli, non-integer orders in
// binomial-expansion routes, ...).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Requested value is outside the attainable range (privacy-loss inversion
// targets outside the loss range over the bracket, unreachable delta).
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

// Bisection endpoints do not bracket the target.
class BracketError : public Error {
 public:
  using Error::Error;
};

// A caller-asserted precondition failed (e.g. non-monotone privacy loss on a
// loss-bisection path).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Exhaustive enumeration would exceed the oracle's hard instance size caps,
// or a PLD convolution would exceed its configured maximum support.
class SizeLimitError : public Error {
 public:
  using Error::Error;
};

// Numerical evaluation failed to reach the requested accuracy.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace dpamp
