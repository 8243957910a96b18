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
#include <numbers>

namespace bfmimo {

inline constexpr double kSpeedOfLight = 2.998e8;  // m/s
inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg_to_rad(double degrees) { return degrees * kPi / 180.0; }
inline constexpr double rad_to_deg(double radians) { return radians * 180.0 / kPi; }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

inline double wavelength(double carrier_hz) { return kSpeedOfLight / carrier_hz; }
inline double wavenumber(double carrier_hz) { return 2.0 * kPi / wavelength(carrier_hz); }

}  // namespace bfmimo
