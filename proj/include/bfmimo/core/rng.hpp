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

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

#include "bfmimo/core/units.hpp"

namespace bfmimo {

/// What a random stream is used for. Part of the key, so streams for
/// different purposes never overlap even under the same master seed.
enum class Purpose : std::uint64_t {
  kChannel = 1,
  kSimplexCandidate = 2,
  kKarhunenLoeveField = 3,
  kHeldOutChannel = 4,
  kTest = 99,
};

/// Philox4x32-10 block function (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Counter-based random stream addressed by (seed, purpose, stream, trial).
///
/// Every variate is a pure function of its address and the draw index, so
/// results do not depend on evaluation order or on how work is split across
/// threads. Candidates that share `stream` and `trial` see identical draws.
class KeyedStream {
 public:
  KeyedStream(std::uint64_t seed, Purpose purpose, std::uint32_t stream, std::uint64_t trial)
      : stream_(stream), trial_(trial) {
    const std::uint64_t k = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(purpose)));
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  }

  /// Raw 128-bit block number `index` of this stream.
  std::array<std::uint32_t, 4> block(std::uint32_t index) const {
    return philox4x32_10({index, static_cast<std::uint32_t>(trial_),
                          static_cast<std::uint32_t>(trial_ >> 32), stream_},
                         key_);
  }

  /// Two independent uniforms on the open interval (0, 1) from block `index`.
  std::array<double, 2> uniform_pair(std::uint32_t index) const {
    const auto b = block(index);
    return {to_open_unit(b[0], b[1]), to_open_unit(b[2], b[3])};
  }

  double uniform(std::uint32_t index) const { return uniform_pair(index)[0]; }

  /// Circularly-symmetric complex Gaussian with E|z|^2 = 1 (Box-Muller).
  std::complex<double> complex_normal(std::uint32_t index) const {
    const auto [u1, u2] = uniform_pair(index);
    const double radius = std::sqrt(-std::log(u1));
    const double angle = 2.0 * kPi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

 private:
  static double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  std::array<std::uint32_t, 2> key_{};
  std::uint32_t stream_;
  std::uint64_t trial_;
};

}  // namespace bfmimo
