// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The bfmimo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <sstream>
#include <vector>

#include "bfmimo/core/error.hpp"
#include "bfmimo/core/rng.hpp"

namespace bfmimo {

/// Nonnegative mode powers summing to one.
class PowerAllocation {
 public:
  PowerAllocation() = default;

  explicit PowerAllocation(std::vector<double> lambdas) : lambdas_(std::move(lambdas)) {
    detail::require(!lambdas_.empty(), "power allocation needs at least one mode");
    double sum = 0.0;
    for (double x : lambdas_) {
      detail::require(x >= 0.0 && std::isfinite(x), "mode powers must be finite and >= 0");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      std::ostringstream msg;
      msg << "mode powers must sum to 1 (got " << sum << ")";
      throw ValidationError(msg.str());
    }
  }

  /// Scales nonnegative weights to unit sum.
  static PowerAllocation normalized(std::vector<double> weights) {
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    detail::require(sum > 0.0, "weights must have a positive sum");
    for (double& w : weights) w /= sum;
    return PowerAllocation(std::move(weights));
  }

  static PowerAllocation uniform(std::size_t modes) {
    return normalized(std::vector<double>(modes, 1.0));
  }

  static PowerAllocation single_mode(std::size_t modes, std::size_t active = 0) {
    detail::require(active < modes, "active mode out of range");
    std::vector<double> v(modes, 0.0);
    v[active] = 1.0;
    return PowerAllocation(std::move(v));
  }

  std::size_t size() const { return lambdas_.size(); }
  double operator[](std::size_t k) const { return lambdas_[k]; }
  std::span<const double> values() const { return lambdas_; }

  bool is_ordered() const {
    return std::is_sorted(lambdas_.begin(), lambdas_.end(), std::greater<>());
  }

  friend bool operator==(const PowerAllocation&, const PowerAllocation&) = default;

 private:
  std::vector<double> lambdas_;
};

/// Uniform point on the K-simplex from the spacings of K-1 sorted uniforms.
/// With `ordered`, components are sorted descending, which is uniform on the
/// ordered polytope lambda_1 >= ... >= lambda_K.
inline PowerAllocation sample_simplex(std::size_t modes, const KeyedStream& stream, bool ordered) {
  detail::require(modes >= 1, "simplex dimension must be >= 1");
  std::vector<double> cuts(modes - 1);
  for (std::size_t i = 0; i < cuts.size(); ++i)
    cuts[i] = stream.uniform_pair(static_cast<std::uint32_t>(i / 2))[i % 2];
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> lambdas(modes);
  double previous = 0.0;
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    lambdas[i] = cuts[i] - previous;
    previous = cuts[i];
  }
  lambdas[modes - 1] = 1.0 - previous;
  if (ordered) std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
  return PowerAllocation::normalized(std::move(lambdas));
}

/// Drives the top `active_modes` modes with power proportional to 1/nu_k so
/// every mode radiates the same power; the rest get nothing.
inline PowerAllocation equal_output_allocation(std::span<const double> mode_strengths,
                                               std::size_t active_modes) {
  detail::require(active_modes >= 1 && active_modes <= mode_strengths.size(),
                  "active mode count must lie in [1, K]");
  std::vector<double> w(mode_strengths.size(), 0.0);
  for (std::size_t k = 0; k < active_modes; ++k) {
    detail::require(mode_strengths[k] > 0.0, "mode strengths must be > 0");
    w[k] = 1.0 / mode_strengths[k];
  }
  return PowerAllocation::normalized(std::move(w));
}

/// Lowest nonvanishing power l_k of each mode's density at the origin.
struct LowOutageExponents {
  std::vector<int> orders;
};

/// lambda_k = (1 + l_k) / (K + sum_j l_j), the allocation maximizing
/// prod_k (nu_k lambda_k)^(1 + l_k) and hence minimizing low-outage probability.
inline PowerAllocation low_outage_allocation(const LowOutageExponents& exponents) {
  const auto& l = exponents.orders;
  detail::require(!l.empty(), "need at least one mode");
  double total = static_cast<double>(l.size());
  for (int x : l) {
    detail::require(x >= 0, "low-outage exponents must be >= 0");
    total += x;
  }
  std::vector<double> lambdas;
  for (int x : l) lambdas.push_back((1.0 + x) / total);
  return PowerAllocation(std::move(lambdas));
}

}  // namespace bfmimo
