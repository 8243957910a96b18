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
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include "bfmimo/core/error.hpp"
#include "bfmimo/core/units.hpp"
#include "bfmimo/propagation.hpp"

namespace bfmimo {

enum class LengthUnit { kMeters, kDecorrelations };

/// Ties a decorrelation-unit layout to a physical carrier so that the
/// half-wavelength spacing rule can be enforced.
struct CarrierBinding {
  double carrier_hz;
  double alpha;  // kernel decay rate, 1/m
};

/// K equispaced antennas on an aperture of length L, cell-centered:
/// y_j = -L/2 + (j + 1/2) L/K, so the spacing is L/K.
class ArrayLayout {
 public:
  static ArrayLayout in_meters(std::size_t antennas, double aperture_m,
                               std::optional<double> carrier_hz = std::nullopt) {
    ArrayLayout layout(antennas, aperture_m, LengthUnit::kMeters);
    if (carrier_hz) layout.check_half_wavelength(layout.spacing(), *carrier_hz);
    return layout;
  }

  static ArrayLayout in_decorrelations(std::size_t antennas, double aperture,
                                       std::optional<CarrierBinding> binding = std::nullopt) {
    ArrayLayout layout(antennas, aperture, LengthUnit::kDecorrelations);
    if (binding) layout.check_half_wavelength(layout.spacing() / binding->alpha, binding->carrier_hz);
    return layout;
  }

  /// Largest K whose cell-centered spacing L/K is at least lambda/2.
  static std::size_t max_half_wavelength_count(double aperture_m, double carrier_hz) {
    const double half_lambda = 0.5 * wavelength(carrier_hz);
    return static_cast<std::size_t>(std::floor(aperture_m / half_lambda * (1.0 + 1e-12)));
  }

  std::size_t size() const { return antennas_; }
  double aperture() const { return aperture_; }
  double spacing() const { return aperture_ / static_cast<double>(antennas_); }
  LengthUnit unit() const { return unit_; }

  /// Positions in the layout's own unit, strictly increasing and symmetric about 0.
  std::vector<double> positions() const {
    std::vector<double> y(antennas_);
    const double dy = spacing();
    for (std::size_t j = 0; j < antennas_; ++j)
      y[j] = -0.5 * aperture_ + (static_cast<double>(j) + 0.5) * dy;
    return y;
  }

  /// Positions converted to meters through the kernel's decorrelation distance.
  std::vector<double> positions_m(const CorrelationKernel& kernel) const {
    auto y = positions();
    if (unit_ == LengthUnit::kDecorrelations)
      for (double& v : y) v /= kernel.alpha;
    return y;
  }

  double spacing_m(const CorrelationKernel& kernel) const {
    return unit_ == LengthUnit::kDecorrelations ? spacing() / kernel.alpha : spacing();
  }

  double aperture_decorrelations(const CorrelationKernel& kernel) const {
    return unit_ == LengthUnit::kDecorrelations ? aperture_ : aperture_ * kernel.alpha;
  }

 private:
  ArrayLayout(std::size_t antennas, double aperture, LengthUnit unit)
      : antennas_(antennas), aperture_(aperture), unit_(unit) {
    detail::require(antennas >= 1, "antenna_count must be >= 1");
    detail::require(aperture > 0.0 && std::isfinite(aperture), "aperture_length must be > 0");
  }

  void check_half_wavelength(double spacing_m, double carrier_hz) const {
    if (antennas_ < 2) return;
    const double half_lambda = 0.5 * wavelength(carrier_hz);
    if (spacing_m < half_lambda * (1.0 - 1e-12)) {
      std::ostringstream msg;
      msg << "antenna spacing " << spacing_m << " m is below lambda/2 = " << half_lambda
          << " m for " << antennas_ << " antennas";
      throw ValidationError(msg.str());
    }
  }

  std::size_t antennas_;
  double aperture_;
  LengthUnit unit_;
};

}  // namespace bfmimo
