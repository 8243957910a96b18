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

// Base-array field correlation for a user in clutter: the piazza-intensity
// correlation integral, its path-gain closed form, the large-piazza K0 and
// exponential limits, and the Lorentzian power angular spectrum.

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "bfmimo/core/error.hpp"
#include "bfmimo/core/quadrature.hpp"
#include "bfmimo/core/units.hpp"

namespace bfmimo {

/// Physical link geometry. Wavelength and wavenumber are derived from the
/// carrier on demand and never stored.
struct LinkGeometry {
  double carrier_frequency_hz = 2.0e9;
  double range_m = 1000.0;          // horizontal range R0
  double base_height_m = 3.0;       // base antenna height above clutter top
  double clutter_height_m = 11.5;   // z_c
  double mobile_height_m = 1.5;     // z_0
  double piazza_radius_m = 50.0;    // A
  double transmit_power_w = 1.0;    // P_t

  double wavelength() const { return bfmimo::wavelength(carrier_frequency_hz); }
  double wavenumber() const { return bfmimo::wavenumber(carrier_frequency_hz); }
  double clutter_depth() const { return clutter_height_m - mobile_height_m; }

  /// Correlation decay rate k (z_c - z_0) / R0 of the large-piazza limit.
  double decay_rate() const { return wavenumber() * clutter_depth() / range_m; }

  void validate() const {
    detail::require(carrier_frequency_hz > 0.0, "carrier_frequency must be > 0");
    detail::require(range_m > 0.0, "range_R0 must be > 0");
    detail::require(piazza_radius_m > 0.0, "piazza_radius_A must be > 0");
    detail::require(clutter_height_m > mobile_height_m,
                    "clutter_height_zc must exceed mobile_height_z0");
    detail::require(transmit_power_w > 0.0, "transmit_power_Pt must be > 0");
    detail::require(std::isfinite(base_height_m), "base_height_z must be finite");
  }
};

/// Exponential correlation R(y) = P_r exp(i ky0 y) exp(-alpha |y|).
struct CorrelationKernel {
  double alpha = 1.0;           // 1/m
  double steering_ky0 = 0.0;    // 1/m, zero at broadside
  double total_power = 1.0;     // R(0)

  double decorrelation_distance() const { return 1.0 / alpha; }

  std::complex<double> operator()(double separation) const {
    return total_power * std::exp(-alpha * std::abs(separation)) *
           std::polar(1.0, steering_ky0 * separation);
  }

  void validate() const {
    detail::require(alpha > 0.0 && std::isfinite(alpha), "kernel alpha must be > 0");
    detail::require(std::isfinite(steering_ky0), "kernel steering_ky0 must be finite");
    detail::require(total_power > 0.0, "kernel total power must be > 0");
  }
};

/// Angular spread given by its 3 dB full width (radians).
class AngularSpreadSpec {
 public:
  static AngularSpreadSpec from_full_width(double phi_3db_rad) {
    AngularSpreadSpec s;
    s.phi_3db_ = phi_3db_rad;
    s.validate();
    return s;
  }

  /// From the rms width sigma of the exponential spectrum exp(-sqrt(2)|phi|/sigma),
  /// whose 3 dB full width is sqrt(2) * sigma * ln 2.
  static AngularSpreadSpec from_rms(double sigma_rad) {
    AngularSpreadSpec s;
    s.phi_3db_ = std::sqrt(2.0) * sigma_rad * std::log(2.0);
    s.rms_sigma_ = sigma_rad;
    s.validate();
    return s;
  }

  double full_width() const { return phi_3db_; }

  /// rms width of the exponential spectrum with the same 3 dB full width.
  double rms_sigma() const {
    return rms_sigma_ > 0.0 ? rms_sigma_ : phi_3db_ / (std::sqrt(2.0) * std::log(2.0));
  }

 private:
  void validate() const {
    detail::require(phi_3db_ > 0.0 && phi_3db_ < kPi, "phi_3dB must lie in (0, pi)");
  }
  double phi_3db_ = 0.0;
  double rms_sigma_ = 0.0;
};

/// Received power P_r at zero separation (path gain times P_t):
/// (z^2/R0^4) (pi P_t / (4 k^2)) ln(1 + A^2/(z_c - z_0)^2).
inline double path_gain(const LinkGeometry& geom) {
  geom.validate();
  const double k = geom.wavenumber();
  const double r0 = geom.range_m;
  const double h = geom.clutter_depth();
  const double a = geom.piazza_radius_m;
  return geom.base_height_m * geom.base_height_m / (r0 * r0 * r0 * r0) *
         (kPi * geom.transmit_power_w / (4.0 * k * k)) * std::log1p(a * a / (h * h));
}

/// Amplitude (z^2/R0^4)(pi P_t/(2 k^2)) multiplying the K0 and exponential
/// large-piazza limits.
inline double asymptotic_amplitude(const LinkGeometry& geom) {
  geom.validate();
  const double k = geom.wavenumber();
  const double r0 = geom.range_m;
  return geom.base_height_m * geom.base_height_m / (r0 * r0 * r0 * r0) *
         (kPi * geom.transmit_power_w / (2.0 * k * k));
}

/// Correlation between base antennas separated by `separation_m` along a
/// collinear aperture, evaluated by adaptive quadrature of the piazza
/// integral. At zero separation this equals path_gain(geom).
inline std::complex<double> correlation_numeric(const LinkGeometry& geom, double separation_m,
                                                double azimuth_rad = 0.0,
                                                const QuadratureOptions& options = {}) {
  geom.validate();
  detail::require(separation_m >= 0.0, "separation must be >= 0");
  const double k = geom.wavenumber();
  const double h2 = geom.clutter_depth() * geom.clutter_depth();
  const double spatial_rate = k * separation_m / geom.range_m;
  auto integrand = [&](double r) {
    return r * std::cyl_bessel_j(0.0, spatial_rate * r) / (h2 + r * r);
  };
  const double integral = integrate_or_throw(integrand, 0.0, geom.piazza_radius_m, options);
  const double steering = k * std::sin(azimuth_rad) * separation_m;
  return asymptotic_amplitude(geom) * integral * std::polar(1.0, steering);
}

enum class AsymptoticForm { kBesselK0, kExponential };

/// Large-piazza limit of correlation_numeric: amplitude * K0(alpha rd) or
/// amplitude * exp(-alpha rd), with the steering phase applied.
inline std::complex<double> correlation_asymptotic(const LinkGeometry& geom, double separation_m,
                                                   AsymptoticForm form,
                                                   double azimuth_rad = 0.0) {
  geom.validate();
  detail::require(separation_m >= 0.0, "separation must be >= 0");
  const double x = geom.decay_rate() * separation_m;
  double shape = 0.0;
  if (form == AsymptoticForm::kBesselK0) {
    if (separation_m == 0.0)
      throw DomainError("K0 asymptote diverges at zero separation; use path_gain instead");
    shape = std::cyl_bessel_k(0.0, x);
  } else {
    shape = std::exp(-x);
  }
  const double steering = geom.wavenumber() * std::sin(azimuth_rad) * separation_m;
  return asymptotic_amplitude(geom) * shape * std::polar(1.0, steering);
}

/// Exponential kernel implied by the physical geometry (R(0) = path gain).
inline CorrelationKernel kernel_from_geometry(const LinkGeometry& geom, double azimuth_rad = 0.0) {
  CorrelationKernel kernel{geom.decay_rate(), geom.wavenumber() * std::sin(azimuth_rad),
                           path_gain(geom)};
  kernel.validate();
  return kernel;
}

/// Normalized kernel (R(0) = 1) for a given angular spread:
/// alpha = (pi / lambda) phi_3dB, ky0 = k sin(phi_0).
inline CorrelationKernel kernel_from_spread(const AngularSpreadSpec& spread, double carrier_hz,
                                            double azimuth_rad = 0.0) {
  detail::require(carrier_hz > 0.0, "carrier frequency must be > 0");
  CorrelationKernel kernel{kPi / wavelength(carrier_hz) * spread.full_width(),
                           wavenumber(carrier_hz) * std::sin(azimuth_rad), 1.0};
  kernel.validate();
  return kernel;
}

/// Lorentzian spectrum P_r 2 alpha / (alpha^2 + (ky - ky0)^2).
inline double power_angular_spectrum(const CorrelationKernel& kernel, double ky) {
  const double d = ky - kernel.steering_ky0;
  return kernel.total_power * 2.0 * kernel.alpha / (kernel.alpha * kernel.alpha + d * d);
}

struct PasComparison {
  std::vector<double> phi_rad;
  std::vector<double> exponential_db;  // exp(-sqrt(2)|phi|/sigma), 0 dB peak
  std::vector<double> lorentz_db;      // a^2 / (a^2 + k^2 sin^2 phi), 0 dB peak
};

/// Exponential and Cauchy-Lorentz angular spectra with the same 3 dB width.
inline PasComparison pas_exponential_vs_lorentz(const AngularSpreadSpec& spread,
                                                std::span<const double> phi_grid) {
  PasComparison out;
  const double sigma = spread.rms_sigma();
  const double s_half = std::sin(0.5 * spread.full_width());
  for (double phi : phi_grid) {
    detail::require(phi > -kPi / 2 && phi < kPi / 2, "phi grid must lie in (-pi/2, pi/2)");
    const double s = std::sin(phi);
    out.phi_rad.push_back(phi);
    out.exponential_db.push_back(linear_to_db(std::exp(-std::sqrt(2.0) * std::abs(phi) / sigma)));
    out.lorentz_db.push_back(linear_to_db(s_half * s_half / (s_half * s_half + s * s)));
  }
  return out;
}

}  // namespace bfmimo
