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
#include <optional>
#include <string>
#include <vector>

#include "bfmimo/apod/spectrum.hpp"
#include "bfmimo/core/parallel.hpp"

namespace bfmimo {

enum class SweepKind {
  kFixedApertureVaryK,             // antennas packed into a fixed aperture
  kOneAntennaPerDecorrelation,     // K antennas over K decorrelations
  kHalfLambdaPackingVaryAperture,  // fixed antenna density, growing aperture
  kFixedKVaryAperture,             // fixed K spread over a growing aperture
  kFixedPhysicalApertureVarySpread,
};

struct SweepParams {
  /// Antenna counts, apertures in decorrelations, or spreads in radians,
  /// depending on the sweep kind.
  std::vector<double> abscissa;
  double aperture_decorrelations = 1.0;   // kFixedApertureVaryK
  std::size_t fixed_antennas = 18;        // kFixedKVaryAperture, kFixedPhysicalApertureVarySpread
  std::optional<double> antennas_per_decorrelation;  // kHalfLambdaPackingVaryAperture
  /// Physical binding for the lambda/2 rule. Decorrelation-unit sweeps use
  /// carrier + spread to convert; the spread sweep needs the carrier.
  std::optional<double> carrier_hz;
  std::optional<double> spread_rad;
  bool keep_eigenvectors = false;
  unsigned workers = 1;

  static SweepParams defaults_for(SweepKind kind);
};

struct SpectrumRow {
  double abscissa = 0.0;
  std::size_t antennas = 0;
  double aperture_decorrelations = 0.0;
  bool capped = false;  // antenna count reduced to respect lambda/2 spacing
  std::vector<double> eigenvalues;
  ComplexMatrix eigenvectors;  // filled only with keep_eigenvectors
};

struct SpectrumTable {
  SweepKind kind;
  std::string abscissa_label;
  std::vector<SpectrumRow> rows;
};

namespace detail {

inline std::vector<double> integer_range(int first, int last) {
  std::vector<double> v;
  for (int i = first; i <= last; ++i) v.push_back(i);
  return v;
}

}  // namespace detail

inline SweepParams SweepParams::defaults_for(SweepKind kind) {
  SweepParams p;
  switch (kind) {
    case SweepKind::kFixedApertureVaryK:
      p.abscissa = detail::integer_range(1, 18);
      p.carrier_hz = 2.0e9;
      p.spread_rad = deg_to_rad(2.0);
      break;
    case SweepKind::kOneAntennaPerDecorrelation:
      p.abscissa = detail::integer_range(1, 30);
      break;
    case SweepKind::kHalfLambdaPackingVaryAperture:
      p.abscissa = detail::integer_range(1, 30);
      p.carrier_hz = 2.0e9;
      p.spread_rad = deg_to_rad(2.0);
      break;
    case SweepKind::kFixedKVaryAperture:
      p.abscissa = detail::integer_range(1, 30);
      break;
    case SweepKind::kFixedPhysicalApertureVarySpread:
      for (double deg : {0.25, 0.5, 1.0, 2.0, 4.0, 6.0, 8.0}) p.abscissa.push_back(deg_to_rad(deg));
      p.carrier_hz = 2.0e9;
      break;
  }
  return p;
}

inline std::string abscissa_label(SweepKind kind) {
  switch (kind) {
    case SweepKind::kFixedApertureVaryK:
    case SweepKind::kOneAntennaPerDecorrelation:
      return "antennas";
    case SweepKind::kHalfLambdaPackingVaryAperture:
    case SweepKind::kFixedKVaryAperture:
      return "aperture_decorrelations";
    case SweepKind::kFixedPhysicalApertureVarySpread:
      return "spread_rad";
  }
  return "";
}

/// Largest antenna count a decorrelation-unit aperture can hold at lambda/2
/// spacing under the given carrier and spread.
inline std::size_t max_antennas_in_decorrelations(double aperture_decorrelations, double carrier_hz,
                                                  double spread_rad) {
  const auto kernel = kernel_from_spread(AngularSpreadSpec::from_full_width(spread_rad), carrier_hz);
  return ArrayLayout::max_half_wavelength_count(aperture_decorrelations / kernel.alpha, carrier_hz);
}

/// Full descending APOD spectrum at every abscissa point of a sweep.
inline SpectrumTable spectrum_sweep(SweepKind kind, const SweepParams& params) {
  SpectrumTable table{kind, abscissa_label(kind), std::vector<SpectrumRow>(params.abscissa.size())};
  const bool bound = params.carrier_hz && params.spread_rad;

  parallel_for(params.abscissa.size(), params.workers, [&](std::size_t i) {
    const double x = params.abscissa[i];
    SpectrumRow row;
    row.abscissa = x;
    CorrelationKernel kernel{1.0, 0.0, 1.0};  // decorrelation units
    std::size_t antennas = 0;
    double aperture = 0.0;

    switch (kind) {
      case SweepKind::kFixedApertureVaryK:
        detail::require(x >= 1.0, "antenna count must be >= 1");
        antennas = static_cast<std::size_t>(std::llround(x));
        aperture = params.aperture_decorrelations;
        break;
      case SweepKind::kOneAntennaPerDecorrelation:
        detail::require(x >= 1.0, "antenna count must be >= 1");
        antennas = static_cast<std::size_t>(std::llround(x));
        aperture = static_cast<double>(antennas);
        break;
      case SweepKind::kHalfLambdaPackingVaryAperture: {
        double density = 0.0;
        if (params.antennas_per_decorrelation) {
          density = *params.antennas_per_decorrelation;
        } else {
          detail::require(bound, "half-lambda packing needs a density or a carrier and spread");
          density = static_cast<double>(max_antennas_in_decorrelations(1.0, *params.carrier_hz, *params.spread_rad));
        }
        aperture = x;
        antennas = static_cast<std::size_t>(std::floor(density * x + 1e-9));
        detail::require(antennas >= 1, "aperture too small for a single antenna");
        break;
      }
      case SweepKind::kFixedKVaryAperture:
        antennas = params.fixed_antennas;
        aperture = x;
        break;
      case SweepKind::kFixedPhysicalApertureVarySpread: {
        detail::require(params.carrier_hz.has_value(), "spread sweep needs a carrier frequency");
        const double carrier = *params.carrier_hz;
        kernel = kernel_from_spread(AngularSpreadSpec::from_full_width(x), carrier);
        const double aperture_m = static_cast<double>(params.fixed_antennas) * 0.5 * wavelength(carrier);
        const auto layout = ArrayLayout::in_meters(params.fixed_antennas, aperture_m, carrier);
        row.antennas = params.fixed_antennas;
        row.aperture_decorrelations = layout.aperture_decorrelations(kernel);
        auto spectrum = eigendecompose(kernel, layout);
        row.eigenvalues = std::move(spectrum.eigenvalues);
        if (params.keep_eigenvectors) row.eigenvectors = std::move(spectrum.eigenvectors);
        table.rows[i] = std::move(row);
        return;
      }
    }

    if (bound && antennas > 1) {
      const std::size_t limit = max_antennas_in_decorrelations(aperture, *params.carrier_hz, *params.spread_rad);
      if (antennas > limit) {
        antennas = std::max<std::size_t>(limit, 1);
        row.capped = true;
      }
    }
    const auto layout = ArrayLayout::in_decorrelations(antennas, aperture);
    row.antennas = antennas;
    row.aperture_decorrelations = aperture;
    auto spectrum = eigendecompose(kernel, layout);
    row.eigenvalues = std::move(spectrum.eigenvalues);
    if (params.keep_eigenvectors) row.eigenvectors = std::move(spectrum.eigenvectors);
    table.rows[i] = std::move(row);
  });
  return table;
}

}  // namespace bfmimo
