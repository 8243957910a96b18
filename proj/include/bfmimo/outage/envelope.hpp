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
#include <cstdint>
#include <limits>
#include <vector>

#include "bfmimo/core/error.hpp"
#include "bfmimo/core/parallel.hpp"
#include "bfmimo/core/rng.hpp"
#include "bfmimo/outage/allocation.hpp"
#include "bfmimo/outage/capacity.hpp"

namespace bfmimo {

struct MisoEnvelopeOptions {
  double gradation = 0.01;
  std::size_t trials = 100000;
  std::uint64_t seed = 1;
  /// Score every draw also with its two columns swapped.
  bool symmetrize = false;
  /// Probability levels j / cdf_levels, j = 1 .. cdf_levels - 1, of the exported family.
  std::size_t cdf_levels = 200;
  unsigned workers = 1;
};

/// Result of scoring every two-mode split on one set of channel draws.
struct MisoEnvelope {
  std::vector<double> splits;             // lambda_1 of each candidate
  std::vector<double> quantiles;          // q-quantile of each candidate
  std::size_t best_index = 0;
  PowerAllocation best;
  double best_quantile = 0.0;
  std::vector<double> levels;             // cumulative probability grid
  std::vector<std::vector<double>> family;  // family[c][j]: candidate c at levels[j]
  std::vector<double> envelope;           // max over candidates at each level
  std::vector<std::size_t> envelope_argmax;
  std::size_t samples_per_candidate = 0;
};

/// Two-mode split search on a uniform grid of lambda_1 with common random
/// numbers. Among equal quantiles the split closest to 50/50 wins.
inline MisoEnvelope miso_grid_envelope(const MimoConfig& config, const MisoEnvelopeOptions& options) {
  config.validate();
  detail::require(config.modes() == 2, "the split envelope needs exactly two modes");
  detail::require(options.gradation > 0.0 && options.gradation <= 1.0, "gradation must lie in (0, 1]");
  detail::require(options.trials >= 1, "trials must be >= 1");
  detail::require(options.cdf_levels >= 2, "cdf_levels must be >= 2");

  const auto steps = static_cast<std::size_t>(std::llround(1.0 / options.gradation));
  detail::require(steps >= 1 && std::abs(steps * options.gradation - 1.0) < 1e-9,
                  "gradation must divide 1 into whole steps");

  const ChannelBatch batch(config.n_receive, 2, options.trials, options.seed, Purpose::kChannel, 0,
                           options.workers);
  const std::size_t per = options.trials * (options.symmetrize ? 2 : 1);
  MisoEnvelope out;
  out.samples_per_candidate = per;
  out.splits.resize(steps + 1);
  out.quantiles.resize(steps + 1);
  out.family.resize(steps + 1);
  for (std::size_t j = 1; j < options.cdf_levels; ++j)
    out.levels.push_back(static_cast<double>(j) / static_cast<double>(options.cdf_levels));

  parallel_for(steps + 1, options.workers, [&](std::size_t c) {
    const double l1 = static_cast<double>(steps - c) / static_cast<double>(steps);
    out.splits[c] = l1;
    const PowerAllocation alloc({l1, 1.0 - l1});
    std::vector<double> samples(per);
    batch.score(config, alloc, std::span<double>(samples).first(options.trials));
    if (options.symmetrize) {
      ComplexMatrix h(config.n_receive, 2);
      for (std::size_t t = 0; t < options.trials; ++t) {
        const auto d = batch.draw(t);
        for (std::size_t i = 0; i < config.n_receive; ++i) {
          h(i, 0) = d(i, 1);
          h(i, 1) = d(i, 0);
        }
        samples[options.trials + t] = logdet_capacity(h, config, alloc);
      }
    }
    std::sort(samples.begin(), samples.end());
    out.quantiles[c] = samples[lower_quantile_index(per, config.outage_q)];
    auto& row = out.family[c];
    row.reserve(out.levels.size());
    for (double p : out.levels) row.push_back(samples[lower_quantile_index(per, p)]);
  });

  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c <= steps; ++c) {
    const double q = out.quantiles[c];
    const bool more_balanced =
        std::abs(out.splits[c] - 0.5) < std::abs(out.splits[out.best_index] - 0.5) - 1e-12;
    if (q > best || (q == best && more_balanced)) {
      best = q;
      out.best_index = c;
    }
  }
  out.best_quantile = best;
  out.best = PowerAllocation({out.splits[out.best_index], 1.0 - out.splits[out.best_index]});

  out.envelope.resize(out.levels.size());
  out.envelope_argmax.resize(out.levels.size());
  for (std::size_t j = 0; j < out.levels.size(); ++j) {
    std::size_t arg = 0;
    for (std::size_t c = 1; c <= steps; ++c)
      if (out.family[c][j] > out.family[arg][j]) arg = c;
    out.envelope[j] = out.family[arg][j];
    out.envelope_argmax[j] = arg;
  }
  return out;
}

struct SearchOptions {
  std::size_t candidates = 1000;
  std::size_t trials = 10000;
  std::size_t rounds = 3;
  double shrink = 0.3;
  std::uint64_t seed = 1;
  std::size_t heldout_trials = 100000;
  /// Seed round 1 with the uniform point and the equal-output allocations over
  /// the top 1..K modes (the first of which is the beamforming vertex).
  bool anchors = true;
  unsigned workers = 1;
};

struct SearchTraceEntry {
  std::size_t round = 0;
  std::size_t candidate = 0;
  std::vector<double> lambdas;
  double quantile = 0.0;
};

struct SearchResult {
  PowerAllocation best;
  double quantile = 0.0;            // re-scored on held-out draws
  double in_sample_quantile = 0.0;  // score in the round that selected it
  std::vector<SearchTraceEntry> trace;
};

namespace detail {

inline std::vector<PowerAllocation> search_anchors(const MimoConfig& config) {
  const std::size_t k = config.modes();
  std::vector<PowerAllocation> out{PowerAllocation::uniform(k)};
  for (std::size_t a = 1; a <= k; ++a) {
    auto alloc = equal_output_allocation(config.mode_strengths, a);
    if (std::find(out.begin(), out.end(), alloc) == out.end()) out.push_back(std::move(alloc));
  }
  return out;
}

}  // namespace detail

/// Monte Carlo search over the ordered power polytope.
///
/// Round r draws fresh channels shared by all of its candidates. Round 1
/// samples the polytope uniformly; later rounds blend the incumbent with
/// fresh polytope points at weight shrink^(r-1). The incumbent is re-scored
/// each round and only replaced by a strictly better candidate. The reported
/// quantile is the best held-out score among the round winners and anchors.
inline SearchResult polytope_envelope_search(const MimoConfig& config, const SearchOptions& options) {
  config.validate();
  detail::require(options.candidates >= 1, "candidates must be >= 1");
  detail::require(options.rounds >= 1, "rounds must be >= 1");
  detail::require(options.trials >= 1 && options.heldout_trials >= 1, "trials must be >= 1");
  detail::require(options.shrink > 0.0 && options.shrink <= 1.0, "shrink must lie in (0, 1]");
  const std::size_t k = config.modes();

  auto heldout = [&](const PowerAllocation& alloc) {
    return capacity_distribution(config, alloc, options.heldout_trials, options.seed, options.workers,
                                 Purpose::kHeldOutChannel, 0)
        .quantile(config.outage_q);
  };

  SearchResult result;
  if (k == 1) {
    result.best = PowerAllocation({1.0});
    result.quantile = heldout(result.best);
    result.in_sample_quantile = result.quantile;
    return result;
  }

  std::vector<PowerAllocation> finalists;
  if (options.anchors) finalists = detail::search_anchors(config);

  PowerAllocation incumbent;
  double incumbent_score = -std::numeric_limits<double>::infinity();
  for (std::size_t round = 1; round <= options.rounds; ++round) {
    std::vector<PowerAllocation> pool;
    if (round == 1) {
      if (options.anchors) pool = detail::search_anchors(config);
    } else {
      pool.push_back(incumbent);
    }
    const double weight = std::pow(options.shrink, static_cast<double>(round - 1));
    for (std::size_t c = 0; c < options.candidates; ++c) {
      const auto fresh = sample_simplex(
          k, KeyedStream(options.seed, Purpose::kSimplexCandidate, static_cast<std::uint32_t>(round), c),
          true);
      if (round == 1) {
        pool.push_back(fresh);
        continue;
      }
      std::vector<double> blend(k);
      for (std::size_t i = 0; i < k; ++i) blend[i] = (1.0 - weight) * incumbent[i] + weight * fresh[i];
      std::sort(blend.begin(), blend.end(), std::greater<>());
      pool.push_back(PowerAllocation::normalized(std::move(blend)));
    }

    const ChannelBatch batch(config.n_receive, k, options.trials, options.seed, Purpose::kChannel,
                             static_cast<std::uint32_t>(round), options.workers);
    std::vector<double> scores(pool.size());
    parallel_for(pool.size(), options.workers, [&](std::size_t c) {
      std::vector<double> samples(options.trials);
      batch.score(config, pool[c], samples);
      scores[c] = lower_quantile_inplace(samples, config.outage_q);
    });

    std::size_t winner = 0;
    for (std::size_t c = 1; c < pool.size(); ++c)
      if (scores[c] > scores[winner]) winner = c;
    incumbent = pool[winner];
    incumbent_score = scores[winner];
    finalists.push_back(incumbent);

    for (std::size_t c = 0; c < pool.size(); ++c) {
      const auto v = pool[c].values();
      result.trace.push_back({round, c, std::vector<double>(v.begin(), v.end()), scores[c]});
    }
  }

  // Deduplicate before the held-out pass; the earliest copy keeps its place.
  std::vector<PowerAllocation> unique;
  for (const auto& f : finalists)
    if (std::find(unique.begin(), unique.end(), f) == unique.end()) unique.push_back(f);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& f : unique) {
    const double score = heldout(f);
    if (score > best) {
      best = score;
      result.best = f;
    }
  }
  result.quantile = best;
  result.in_sample_quantile = incumbent_score;
  if (!(result.best == incumbent)) {
    // The held-out winner was not the final incumbent; report its last in-sample score.
    for (auto it = result.trace.rbegin(); it != result.trace.rend(); ++it)
      if (std::equal(it->lambdas.begin(), it->lambdas.end(), result.best.values().begin())) {
        result.in_sample_quantile = it->quantile;
        break;
      }
  }
  return result;
}

}  // namespace bfmimo
