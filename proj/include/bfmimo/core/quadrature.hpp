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
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "bfmimo/core/error.hpp"

namespace bfmimo {

struct QuadratureOptions {
  double relative_tolerance = 1e-6;
  double absolute_tolerance = 0.0;
  int max_levels = 20;  // bisection depth limit for any subinterval
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int intervals = 0;
  bool converged = false;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  int level;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <typename F>
Segment gauss_kronrod15(F& f, double a, double b, int level) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss), level};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration of f over [a, b].
///
/// The subinterval with the largest error estimate is bisected until the
/// summed estimate meets max(abs_tol, rel_tol * |I|). A subinterval already
/// at `max_levels` is never split again; if the tolerance cannot be met the
/// result is returned with converged == false.
template <typename F>
QuadratureResult integrate_adaptive(F&& f, double a, double b,
                                    const QuadratureOptions& options = {}) {
  std::priority_queue<detail::Segment> heap;
  std::vector<detail::Segment> frozen;
  heap.push(detail::gauss_kronrod15(f, a, b, 0));

  auto totals = [&] {
    double value = 0.0, error = 0.0;
    auto copy = heap;
    while (!copy.empty()) {
      value += copy.top().value;
      error += copy.top().error;
      copy.pop();
    }
    for (const auto& s : frozen) {
      value += s.value;
      error += s.error;
    }
    return std::pair{value, error};
  };

  double value = heap.top().value;
  double error = heap.top().error;
  while (true) {
    const double tolerance =
        std::max(options.absolute_tolerance, options.relative_tolerance * std::abs(value));
    if (error <= tolerance || heap.empty()) break;
    detail::Segment worst = heap.top();
    heap.pop();
    if (worst.level >= options.max_levels) {
      frozen.push_back(worst);
      continue;
    }
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = detail::gauss_kronrod15(f, worst.a, mid, worst.level + 1);
    auto right = detail::gauss_kronrod15(f, mid, worst.b, worst.level + 1);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum from scratch to drop the drift of the running updates.
  auto [v, e] = totals();
  QuadratureResult result;
  result.value = v;
  result.error_estimate = e;
  result.intervals = static_cast<int>(heap.size() + frozen.size());
  result.converged =
      e <= std::max(options.absolute_tolerance, options.relative_tolerance * std::abs(v)) ||
      e == 0.0;
  return result;
}

/// Same as integrate_adaptive but throws NumericFailure on non-convergence.
template <typename F>
double integrate_or_throw(F&& f, double a, double b, const QuadratureOptions& options = {}) {
  auto result = integrate_adaptive(std::forward<F>(f), a, b, options);
  if (!result.converged) {
    std::ostringstream msg;
    msg << "adaptive quadrature did not reach relative tolerance "
        << options.relative_tolerance << " within " << options.max_levels
        << " refinement levels (error estimate " << result.error_estimate << ")";
    throw NumericFailure(msg.str(), result.error_estimate);
  }
  return result.value;
}

}  // namespace bfmimo
