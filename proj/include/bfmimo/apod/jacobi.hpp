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
#include <sstream>
#include <vector>

#include "bfmimo/core/error.hpp"
#include "bfmimo/core/matrix.hpp"

namespace bfmimo {

struct JacobiOptions {
  double off_diagonal_threshold = 1e-12;  // relative to the Frobenius norm
  int max_sweeps = 100;
};

/// Eigenpairs of a real symmetric matrix. Values are descending; column k of
/// `vectors` belongs to values[k] and has its largest-magnitude component
/// positive.
struct SymmetricEigen {
  std::vector<double> values;
  RealMatrix vectors;
  int sweeps = 0;
};

namespace detail {

// First index whose magnitude is within a relative 1e-9 of the maximum, so
// mirror-image components of symmetric modes resolve to the same choice.
template <typename Range, typename Abs>
std::size_t dominant_index(const Range& v, Abs abs_fn) {
  double peak = 0.0;
  for (const auto& x : v) peak = std::max(peak, abs_fn(x));
  for (std::size_t i = 0; i < v.size(); ++i)
    if (abs_fn(v[i]) >= peak * (1.0 - 1e-9)) return i;
  return 0;
}

}  // namespace detail

/// Cyclic Jacobi eigensolver for real symmetric matrices.
inline SymmetricEigen jacobi_eigen(const RealMatrix& input, const JacobiOptions& options = {}) {
  const std::size_t n = input.rows();
  detail::require(n == input.cols(), "jacobi_eigen needs a square matrix");

  RealMatrix a = input;
  // Eigenvectors are accumulated as rows of vt so rotations touch contiguous memory.
  RealMatrix vt = RealMatrix::identity(n);

  double frobenius = 0.0;
  for (double x : a.data()) frobenius += x * x;
  frobenius = std::sqrt(frobenius);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
    return std::sqrt(2.0 * s);
  };

  int sweep = 0;
  double off = off_norm();
  while (off > options.off_diagonal_threshold * frobenius) {
    if (sweep == options.max_sweeps) {
      std::ostringstream msg;
      msg << "Jacobi eigensolver did not converge in " << options.max_sweeps
          << " sweeps (relative off-diagonal norm " << off / frobenius << ")";
      throw NumericFailure(msg.str(), off / frobenius);
    }
    ++sweep;
    // Early sweeps skip rotations that are small relative to the average.
    const double skip_below = sweep < 4 ? 0.2 * off / static_cast<double>(n * n) : 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0 || std::abs(apq) < skip_below) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        auto rp = a.row(p);
        auto rq = a.row(q);
        for (std::size_t k = 0; k < n; ++k) {
          const double x = rp[k];
          const double y = rq[k];
          rp[k] = c * x - s * y;
          rq[k] = s * x + c * y;
        }
        for (std::size_t k = 0; k < n; ++k) {
          a(k, p) = rp[k];
          a(k, q) = rq[k];
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;

        auto vp = vt.row(p);
        auto vq = vt.row(q);
        for (std::size_t k = 0; k < n; ++k) {
          const double x = vp[k];
          const double y = vq[k];
          vp[k] = c * x - s * y;
          vq[k] = s * x + c * y;
        }
      }
    }
    off = off_norm();
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  SymmetricEigen out;
  out.sweeps = sweep;
  out.values.resize(n);
  out.vectors = RealMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto src = vt.row(order[k]);
    out.values[k] = a(order[k], order[k]);
    const std::size_t lead = detail::dominant_index(src, [](double x) { return std::abs(x); });
    const double sign = src[lead] < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = sign * src[i];
  }
  return out;
}

}  // namespace bfmimo
