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

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "bfmimo/core/error.hpp"
#include "bfmimo/outage/allocation.hpp"
#include "bfmimo/outage/capacity.hpp"

namespace bfmimo {

/// Extra transmit power, in dB, needed to equalize the mode outputs:
/// 10 log10(mean(nu) * mean(1 / nu)). Zero iff all strengths are equal.
inline double equalization_penalty_db(std::span<const double> mode_strengths) {
  detail::require(!mode_strengths.empty(), "need at least one mode strength");
  double mean = 0.0, mean_inverse = 0.0;
  for (double nu : mode_strengths) {
    detail::require(nu > 0.0 && std::isfinite(nu), "mode strengths must be finite and > 0");
    mean += nu;
    mean_inverse += 1.0 / nu;
  }
  const double n = static_cast<double>(mode_strengths.size());
  return std::max(0.0, 10.0 * std::log10((mean / n) * (mean_inverse / n)));
}

struct TruncationResult {
  std::size_t best_active = 1;
  std::vector<double> quantiles;  // quantiles[a - 1] for a active modes
  PowerAllocation best;
};

/// Scores the equal-output allocation over the top 1..K modes on shared
/// draws and keeps the truncation with the highest q-quantile.
inline TruncationResult equal_output_truncation(const MimoConfig& config, std::size_t trials,
                                                std::uint64_t seed, unsigned workers = 1) {
  config.validate();
  TruncationResult out;
  double best = -1.0;
  for (std::size_t a = 1; a <= config.modes(); ++a) {
    auto alloc = equal_output_allocation(config.mode_strengths, a);
    const double q =
        capacity_distribution(config, alloc, trials, seed, workers, Purpose::kHeldOutChannel, 0)
            .quantile(config.outage_q);
    out.quantiles.push_back(q);
    if (q > best) {
      best = q;
      out.best_active = a;
      out.best = std::move(alloc);
    }
  }
  return out;
}

/// Leading small-tau term of P(sum_k a_k E_k < tau) for unit-mean exponential
/// E_k and a_k = nu_k lambda_k: tau^K / (K! prod a_k) over the powered modes.
inline double low_outage_cdf_leading_term(std::span<const double> mode_strengths,
                                          const PowerAllocation& alloc, double tau) {
  detail::require(mode_strengths.size() == alloc.size(), "allocation length must equal the mode count");
  detail::require(tau >= 0.0 && std::isfinite(tau), "tau must be finite and >= 0");
  double log_term = 0.0;
  int active = 0;
  for (std::size_t k = 0; k < alloc.size(); ++k) {
    detail::require(mode_strengths[k] > 0.0, "mode strengths must be > 0");
    const double a = mode_strengths[k] * alloc[k];
    if (a <= 0.0) continue;
    ++active;
    log_term -= std::log(a);
  }
  if (tau == 0.0) return 0.0;
  log_term += active * std::log(tau) - std::lgamma(active + 1.0);
  return std::exp(log_term);
}

}  // namespace bfmimo
