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
#include <span>
#include <vector>

#include "bfmimo/core/error.hpp"
#include "bfmimo/core/matrix.hpp"
#include "bfmimo/core/parallel.hpp"
#include "bfmimo/core/rng.hpp"
#include "bfmimo/outage/allocation.hpp"

namespace bfmimo {

/// (m, n) link in the transmit eigenbasis: m = mode_strengths.size() driven
/// APODs, n receive antennas with uncorrelated Rayleigh fading.
struct MimoConfig {
  std::size_t n_receive = 4;
  std::vector<double> mode_strengths;  // nu_k, non-increasing
  double snr_rho = 1.0;                // linear
  double outage_q = 0.1;

  std::size_t modes() const { return mode_strengths.size(); }

  void validate() const {
    detail::require(n_receive >= 1, "n_receive must be >= 1");
    detail::require(!mode_strengths.empty(), "need at least one mode strength");
    for (std::size_t k = 0; k < mode_strengths.size(); ++k) {
      detail::require(mode_strengths[k] > 0.0 && std::isfinite(mode_strengths[k]),
                      "mode strengths must be finite and > 0");
      if (k > 0)
        detail::require(mode_strengths[k] <= mode_strengths[k - 1],
                        "mode strengths must be in descending order");
    }
    detail::require(snr_rho > 0.0 && std::isfinite(snr_rho), "snr_rho must be > 0");
    detail::require(outage_q > 0.0 && outage_q < 1.0, "outage_q must lie in (0, 1)");
  }
};

/// Fills H with iid unit-power complex Gaussians. Entry (i, k) uses draw
/// k * rows + i, so the first columns do not depend on the column count.
inline void fill_h_iid(MatrixView<Complex> h, const KeyedStream& stream) {
  for (std::size_t k = 0; k < h.cols(); ++k)
    for (std::size_t i = 0; i < h.rows(); ++i)
      h(i, k) = stream.complex_normal(static_cast<std::uint32_t>(k * h.rows() + i));
}

inline ComplexMatrix sample_h_iid(std::size_t rows, std::size_t cols, const KeyedStream& stream) {
  ComplexMatrix h(rows, cols);
  fill_h_iid(h.view(), stream);
  return h;
}

namespace detail {

// log2 det of a Hermitian positive definite matrix stored row-major in g.
inline double log2_det_hpd(std::vector<Complex>& g, std::size_t n) {
  double log_det = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double diag = g[j * n + j].real();
    for (std::size_t k = 0; k < j; ++k) diag -= std::norm(g[j * n + k]);
    if (!(diag > 0.0)) throw NumericFailure("LogDet matrix is not positive definite", diag);
    const double ljj = std::sqrt(diag);
    g[j * n + j] = ljj;
    log_det += std::log2(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      Complex s = g[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= g[i * n + k] * std::conj(g[j * n + k]);
      g[i * n + j] = s / ljj;
    }
  }
  return log_det;
}

}  // namespace detail

/// log2 det(I + rho H diag(nu_k lambda_k) H^H) in bits per symbol.
///
/// Modes with zero power are dropped before the determinant, so a degenerate
/// allocation reproduces the smaller system bit for bit. The determinant is
/// taken on the smaller of the n x n and active x active Gram forms.
inline double logdet_capacity(MatrixView<const Complex> h, const MimoConfig& config,
                              const PowerAllocation& alloc) {
  const std::size_t n = config.n_receive;
  const std::size_t modes = config.modes();
  detail::require(h.rows() == n && h.cols() == modes, "H must be n_receive x modes");
  detail::require(alloc.size() == modes, "allocation length must equal the mode count");

  detail::require(modes <= 64, "at most 64 modes are supported");
  std::size_t active[64];
  double power[64];
  std::size_t count = 0;
  for (std::size_t k = 0; k < modes; ++k) {
    const double d = (config.snr_rho * config.mode_strengths[k]) * alloc[k];
    if (d > 0.0) {
      active[count] = k;
      power[count] = d;
      ++count;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < modes; ++k)
      if (!std::isfinite(h(i, k).real()) || !std::isfinite(h(i, k).imag()))
        throw ValidationError("channel matrix has non-finite entries");
  if (count == 0) return 0.0;

  if (count == 1) {
    double energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) energy += std::norm(h(i, active[0]));
    return std::log2(1.0 + power[0] * energy);
  }

  thread_local std::vector<Complex> g;
  if (count <= n) {
    // I + D^1/2 H_a^H H_a D^1/2
    g.assign(count * count, 0.0);
    for (std::size_t a = 0; a < count; ++a) {
      for (std::size_t b = a; b < count; ++b) {
        Complex s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += std::conj(h(i, active[a])) * h(i, active[b]);
        s *= std::sqrt(power[a] * power[b]);
        if (a == b) s += 1.0;
        g[a * count + b] = s;
        g[b * count + a] = std::conj(s);
      }
    }
    return std::max(0.0, detail::log2_det_hpd(g, count));
  }
  // I + H_a D H_a^H
  g.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      Complex s = i == j ? 1.0 : 0.0;
      for (std::size_t a = 0; a < count; ++a)
        s += power[a] * h(i, active[a]) * std::conj(h(j, active[a]));
      g[i * n + j] = s;
      g[j * n + i] = std::conj(s);
    }
  }
  return std::max(0.0, detail::log2_det_hpd(g, n));
}

inline double logdet_capacity(const ComplexMatrix& h, const MimoConfig& config,
                              const PowerAllocation& alloc) {
  return logdet_capacity(h.view(), config, alloc);
}

/// Index (0-based) of the lower empirical q-quantile: 1-based rank ceil(q N).
inline std::size_t lower_quantile_index(std::size_t count, double q) {
  detail::require(count > 0, "quantile of an empty sample");
  detail::require(q > 0.0 && q < 1.0, "quantile level must lie in (0, 1)");
  const double rank = std::ceil(q * static_cast<double>(count) * (1.0 - 1e-12));
  return static_cast<std::size_t>(std::clamp(rank, 1.0, static_cast<double>(count))) - 1;
}

/// Lower empirical quantile; reorders `scratch` in place.
inline double lower_quantile_inplace(std::span<double> scratch, double q) {
  const std::size_t idx = lower_quantile_index(scratch.size(), q);
  std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(idx), scratch.end());
  return scratch[idx];
}

inline double lower_quantile(std::span<const double> samples, double q) {
  std::vector<double> scratch(samples.begin(), samples.end());
  return lower_quantile_inplace(scratch, q);
}

/// Nonparametric standard error of the q-quantile from the order statistics
/// one binomial standard deviation either side of rank ceil(qN).
inline double quantile_standard_error(std::span<const double> samples, double q) {
  std::vector<double> scratch(samples.begin(), samples.end());
  const double n = static_cast<double>(scratch.size());
  const double spread = std::sqrt(n * q * (1.0 - q));
  const double idx = static_cast<double>(lower_quantile_index(scratch.size(), q));
  const auto lo = static_cast<std::size_t>(std::clamp(std::floor(idx - spread), 0.0, n - 1));
  const auto hi = static_cast<std::size_t>(std::clamp(std::ceil(idx + spread), 0.0, n - 1));
  const auto at = [&](std::size_t i) {
    std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(i), scratch.end());
    return scratch[i];
  };
  const double upper = at(hi);
  return 0.5 * (upper - at(lo));
}

/// Capacity samples in trial order.
struct CapacityDistribution {
  std::vector<double> samples;
  std::uint64_t seed = 0;
  std::size_t trial_count = 0;

  double quantile(double q) const { return lower_quantile(samples, q); }
  double standard_error(double q) const { return quantile_standard_error(samples, q); }
};

/// Trials independent H draws scored by logdet_capacity. Trial t always uses
/// the stream (seed, purpose, stream, t), independent of the worker count.
inline CapacityDistribution capacity_distribution(const MimoConfig& config,
                                                  const PowerAllocation& alloc, std::size_t trials,
                                                  std::uint64_t seed, unsigned workers = 1,
                                                  Purpose purpose = Purpose::kChannel,
                                                  std::uint32_t stream = 0) {
  config.validate();
  detail::require(trials >= 1, "trials must be >= 1");
  detail::require(alloc.size() == config.modes(), "allocation length must equal the mode count");
  CapacityDistribution out{std::vector<double>(trials), seed, trials};
  const std::size_t n = config.n_receive, m = config.modes();
  const std::size_t blocks = std::min<std::size_t>(std::max(1u, workers) * 8, trials);
  parallel_for(blocks, workers, [&](std::size_t b) {
    ComplexMatrix h(n, m);
    const std::size_t begin = trials * b / blocks, end = trials * (b + 1) / blocks;
    for (std::size_t t = begin; t < end; ++t) {
      fill_h_iid(h.view(), KeyedStream(seed, purpose, stream, t));
      out.samples[t] = logdet_capacity(h.view(), config, alloc);
    }
  });
  return out;
}

/// q-quantile and its standard error for each of several allocations.
struct TailQuantiles {
  std::vector<double> quantile;
  std::vector<double> standard_error;
};

/// Scores every allocation on the same `trials` draws in one pass, keeping
/// only the lower tail each quantile needs. Results equal those of
/// capacity_distribution(...).quantile / .standard_error bit for bit.
inline TailQuantiles tail_quantiles(const MimoConfig& config, std::span<const PowerAllocation> allocs,
                                    std::size_t trials, std::uint64_t seed, double q, unsigned workers = 1,
                                    Purpose purpose = Purpose::kChannel, std::uint32_t stream = 0) {
  config.validate();
  detail::require(trials >= 1, "trials must be >= 1");
  for (const auto& a : allocs)
    detail::require(a.size() == config.modes(), "allocation length must equal the mode count");
  const double n = static_cast<double>(trials);
  const double spread = std::sqrt(n * q * (1.0 - q));
  const double idx = static_cast<double>(lower_quantile_index(trials, q));
  const auto lo = static_cast<std::size_t>(std::clamp(std::floor(idx - spread), 0.0, n - 1));
  const auto hi = static_cast<std::size_t>(std::clamp(std::ceil(idx + spread), 0.0, n - 1));
  const std::size_t keep = hi + 1;

  const std::size_t blocks = std::min<std::size_t>(std::max(1u, workers), trials);
  // tails[b][a]: max-heap of the smallest `keep` samples of allocation a in block b.
  std::vector<std::vector<std::vector<double>>> tails(blocks, std::vector<std::vector<double>>(allocs.size()));
  parallel_for(blocks, workers, [&](std::size_t b) {
    ComplexMatrix h(config.n_receive, config.modes());
    auto& heaps = tails[b];
    for (auto& heap : heaps) heap.reserve(keep + 1);
    const std::size_t begin = trials * b / blocks, end = trials * (b + 1) / blocks;
    for (std::size_t t = begin; t < end; ++t) {
      fill_h_iid(h.view(), KeyedStream(seed, purpose, stream, t));
      for (std::size_t a = 0; a < allocs.size(); ++a) {
        auto& heap = heaps[a];
        if (heap.size() == keep) {
          const double c = logdet_capacity(h.view(), config, allocs[a]);
          if (c >= heap.front()) continue;
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = c;
        } else {
          heap.push_back(logdet_capacity(h.view(), config, allocs[a]));
        }
        std::push_heap(heap.begin(), heap.end());
      }
    }
  });

  TailQuantiles out;
  for (std::size_t a = 0; a < allocs.size(); ++a) {
    std::vector<double> merged;
    for (auto& block : tails) merged.insert(merged.end(), block[a].begin(), block[a].end());
    std::sort(merged.begin(), merged.end());
    out.quantile.push_back(merged[static_cast<std::size_t>(idx)]);
    out.standard_error.push_back(0.5 * (merged[hi] - merged[lo]));
  }
  return out;
}

/// Pre-drawn channel matrices shared by every candidate scored against them.
class ChannelBatch {
 public:
  ChannelBatch(std::size_t n_receive, std::size_t modes, std::size_t trials, std::uint64_t seed,
               Purpose purpose, std::uint32_t stream, unsigned workers = 1)
      : n_(n_receive), m_(modes), trials_(trials), data_(n_receive * modes * trials) {
    detail::require(trials >= 1, "trials must be >= 1");
    parallel_for(trials, workers, [&](std::size_t t) {
      fill_h_iid(MatrixView<Complex>(data_.data() + t * n_ * m_, n_, m_),
                 KeyedStream(seed, purpose, stream, t));
    });
  }

  std::size_t trials() const { return trials_; }
  MatrixView<const Complex> draw(std::size_t t) const {
    return {data_.data() + t * n_ * m_, n_, m_};
  }

  /// Capacity of every draw under one allocation, written into `out`.
  void score(const MimoConfig& config, const PowerAllocation& alloc, std::span<double> out) const {
    detail::require(out.size() == trials_, "output span must hold one sample per trial");
    for (std::size_t t = 0; t < trials_; ++t) out[t] = logdet_capacity(draw(t), config, alloc);
  }

 private:
  std::size_t n_, m_, trials_;
  std::vector<Complex> data_;
};

}  // namespace bfmimo
