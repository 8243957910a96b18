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
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "bfmimo/apod/jacobi.hpp"
#include "bfmimo/apod/layout.hpp"
#include "bfmimo/core/error.hpp"
#include "bfmimo/core/matrix.hpp"
#include "bfmimo/core/rng.hpp"
#include "bfmimo/propagation.hpp"

namespace bfmimo {

/// Hermitian matrix R_ij = exp(i ky0 (y_i - y_j)) exp(-alpha |y_i - y_j|) with
/// unit diagonal (the kernel is normalized to R(0) = 1 here).
inline ComplexMatrix sample_kernel_matrix(const CorrelationKernel& kernel, const ArrayLayout& layout) {
  kernel.validate();
  const auto y = layout.positions_m(kernel);
  const std::size_t n = y.size();
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = y[i] - y[j];
      const Complex v = std::exp(-kernel.alpha * std::abs(d)) * std::polar(1.0, kernel.steering_ky0 * d);
      m(i, j) = v;
      m(j, i) = std::conj(v);
    }
  }
  return m;
}

/// Real symmetric broadside part exp(-alpha |y_i - y_j|).
inline RealMatrix sample_broadside_matrix(const CorrelationKernel& kernel, const ArrayLayout& layout) {
  kernel.validate();
  const auto y = layout.positions_m(kernel);
  const std::size_t n = y.size();
  RealMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::exp(-kernel.alpha * std::abs(y[i] - y[j]));
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return m;
}

/// Eigenpairs of a Hermitian matrix; descending values, column k of `vectors`
/// normalized with its largest-magnitude component positive real.
struct HermitianEigen {
  std::vector<double> values;
  ComplexMatrix vectors;
};

namespace detail {

inline void fix_phase(ComplexMatrix& vectors) {
  const std::size_t n = vectors.rows();
  for (std::size_t k = 0; k < vectors.cols(); ++k) {
    auto col = vectors.column(k);
    const std::size_t lead = dominant_index(col, [](const Complex& z) { return std::abs(z); });
    const Complex phase = std::abs(col[lead]) > 0.0 ? std::conj(col[lead]) / std::abs(col[lead]) : 1.0;
    for (std::size_t i = 0; i < n; ++i) vectors(i, k) = col[i] * phase;
  }
}

}  // namespace detail

/// General Hermitian eigendecomposition. Real input goes straight to Jacobi;
/// complex input is embedded as the real symmetric [[Re, -Im], [Im, Re]],
/// whose spectrum is the Hermitian one with every eigenvalue doubled.
inline HermitianEigen eigendecompose(const ComplexMatrix& m, const JacobiOptions& options = {}) {
  const std::size_t n = m.rows();
  detail::require(n == m.cols() && n > 0, "eigendecompose needs a non-empty square matrix");
  double scale = 0.0, asym = 0.0, imag = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      scale = std::max(scale, std::abs(m(i, j)));
      asym = std::max(asym, std::abs(m(i, j) - std::conj(m(j, i))));
      imag = std::max(imag, std::abs(m(i, j).imag()));
    }
  detail::require(asym <= 1e-12 * std::max(scale, 1.0), "eigendecompose needs a Hermitian matrix");

  HermitianEigen out;
  out.values.resize(n);
  out.vectors = ComplexMatrix(n, n);
  if (imag == 0.0) {
    RealMatrix re(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) re(i, j) = m(i, j).real();
    auto eig = jacobi_eigen(re, options);
    out.values = eig.values;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) out.vectors(i, k) = eig.vectors(i, k);
    return out;
  }

  RealMatrix big(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      big(i, j) = m(i, j).real();
      big(n + i, n + j) = m(i, j).real();
      big(i, n + j) = -m(i, j).imag();
      big(n + i, j) = m(i, j).imag();
    }
  auto eig = jacobi_eigen(big, options);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = 0.5 * (eig.values[2 * k] + eig.values[2 * k + 1]);
    for (std::size_t i = 0; i < n; ++i)
      out.vectors(i, k) = Complex(eig.vectors(i, 2 * k), eig.vectors(n + i, 2 * k));
  }
  detail::fix_phase(out.vectors);
  return out;
}

/// Descending APOD strengths with matched unit-norm eigenvectors of the
/// sampled kernel on a layout.
struct ApodSpectrum {
  std::vector<double> eigenvalues;
  ComplexMatrix eigenvectors;  // column k matches eigenvalues[k]
  ArrayLayout layout;
  CorrelationKernel kernel;

  std::size_t size() const { return eigenvalues.size(); }
  std::vector<Complex> mode(std::size_t k) const { return eigenvectors.column(k); }
};

/// APOD spectrum of `kernel` sampled on `layout`. The off-broadside matrix is
/// D M D^H with D = diag(exp(i ky0 y_j)) and M the real broadside matrix, so
/// only a real Jacobi solve is needed; eigenvectors get the phase ramp.
inline ApodSpectrum eigendecompose(const CorrelationKernel& kernel, const ArrayLayout& layout,
                                   const JacobiOptions& options = {}) {
  auto eig = jacobi_eigen(sample_broadside_matrix(kernel, layout), options);
  const auto y = layout.positions_m(kernel);
  const std::size_t n = y.size();
  ApodSpectrum out{eig.values, ComplexMatrix(n, n), layout, kernel};
  for (std::size_t i = 0; i < n; ++i) {
    const Complex ramp = std::polar(1.0, kernel.steering_ky0 * y[i]);
    for (std::size_t k = 0; k < n; ++k) out.eigenvectors(i, k) = ramp * eig.vectors(i, k);
  }
  if (kernel.steering_ky0 != 0.0) detail::fix_phase(out.eigenvectors);
  return out;
}

/// Saturation level (2/alpha)/dy of the top eigenvalue for a long array with spacing dy.
inline double saturation_gain_limit(const CorrelationKernel& kernel, double spacing_m) {
  detail::require(spacing_m > 0.0, "spacing must be > 0");
  return 2.0 / kernel.alpha / spacing_m;
}

/// nu_k |sum_j phi_k(y_j) exp(-i ky y_j)|^2 over a grid of spatial frequencies (1/m).
inline std::vector<double> mode_beam_pattern(const ApodSpectrum& spectrum, std::size_t mode,
                                             std::span<const double> ky_grid) {
  detail::require(mode < spectrum.size(), "mode index out of range");
  const auto y = spectrum.layout.positions_m(spectrum.kernel);
  std::vector<double> out;
  out.reserve(ky_grid.size());
  for (double ky : ky_grid) {
    Complex acc = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j)
      acc += spectrum.eigenvectors(j, mode) * std::polar(1.0, -ky * y[j]);
    out.push_back(spectrum.eigenvalues[mode] * std::norm(acc));
  }
  return out;
}

/// One realization of the Karhunen-Loeve field G = sum_k sqrt(nu_k) z_k phi_k.
struct KLField {
  std::vector<Complex> samples;
  std::uint64_t seed = 0;
  std::uint64_t realization = 0;
};

inline KLField synthesize_field(const ApodSpectrum& spectrum, std::uint64_t seed,
                                std::uint64_t realization = 0) {
  const std::size_t n = spectrum.size();
  KeyedStream stream(seed, Purpose::kKarhunenLoeveField, 0, realization);
  KLField field{std::vector<Complex>(n), seed, realization};
  for (std::size_t k = 0; k < n; ++k) {
    const Complex weight = std::sqrt(spectrum.eigenvalues[k]) * stream.complex_normal(static_cast<std::uint32_t>(k));
    for (std::size_t j = 0; j < n; ++j) field.samples[j] += weight * spectrum.eigenvectors(j, k);
  }
  return field;
}

/// Strict sign alternations along the aperture of a real (broadside) mode.
/// Components below 1e-10 of the peak are treated as zero and skipped.
inline int sign_change_count(const ApodSpectrum& spectrum, std::size_t mode) {
  detail::require(mode < spectrum.size(), "mode index out of range");
  const auto v = spectrum.mode(mode);
  double peak = 0.0;
  for (const auto& z : v) {
    detail::require(std::abs(z.imag()) <= 1e-10, "sign_change_count needs a broadside (real) spectrum");
    peak = std::max(peak, std::abs(z.real()));
  }
  int changes = 0;
  int previous = 0;
  for (const auto& z : v) {
    if (std::abs(z.real()) <= 1e-10 * peak) continue;
    const int sign = z.real() > 0.0 ? 1 : -1;
    if (previous != 0 && sign != previous) ++changes;
    previous = sign;
  }
  return changes;
}

/// Spatial frequency (1/m) of the sinusoid a cos(k y) + b sin(k y) that best
/// fits a broadside mode in the least-squares sense.
inline double fit_mode_frequency(const ApodSpectrum& spectrum, std::size_t mode) {
  detail::require(mode < spectrum.size(), "mode index out of range");
  const auto y = spectrum.layout.positions_m(spectrum.kernel);
  const auto v = spectrum.mode(mode);
  const std::size_t n = y.size();

  auto captured = [&](double k) {
    double cc = 0, ss = 0, cs = 0, cv = 0, sv = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double c = std::cos(k * y[j]), s = std::sin(k * y[j]), x = v[j].real();
      cc += c * c; ss += s * s; cs += c * s; cv += c * x; sv += s * x;
    }
    const double det = cc * ss - cs * cs;
    if (det <= 1e-12 * cc * std::max(ss, 1e-300)) return cc > 0 ? cv * cv / cc : 0.0;
    return (ss * cv * cv - 2.0 * cs * cv * sv + cc * sv * sv) / det;
  };

  const double dy = spectrum.layout.spacing_m(spectrum.kernel);
  const double k_max = kPi / dy;
  const std::size_t steps = 8 * n + 64;
  double best_k = 0.0, best = -1.0;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double k = k_max * static_cast<double>(i) / static_cast<double>(steps);
    const double c = captured(k);
    if (c > best) { best = c; best_k = k; }
  }
  // Golden-section refinement within one grid cell either side.
  double lo = std::max(0.0, best_k - k_max / steps), hi = std::min(k_max, best_k + k_max / steps);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = captured(x1), f2 = captured(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 > f2) { hi = x2; x2 = x1; f2 = f1; x1 = hi - g * (hi - lo); f1 = captured(x1); }
    else { lo = x1; x1 = x2; f1 = f2; x2 = lo + g * (hi - lo); f2 = captured(x2); }
  }
  return 0.5 * (lo + hi);
}

}  // namespace bfmimo
