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

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "bfmimo/apod/layout.hpp"
#include "bfmimo/core/error.hpp"
#include "bfmimo/core/units.hpp"
#include "bfmimo/propagation.hpp"

namespace bfmimo {

/// Monte Carlo budget of one search.
struct McBudget {
  std::size_t candidates = 300;
  std::size_t trials = 3000;
  std::size_t rounds = 3;
  double shrink = 0.3;
  std::uint64_t seed = 1;
  std::size_t heldout_trials = 100000;
};

struct SnrPoint {
  double db = 0.0;   // as written in the config, kept for labelling
  double rho = 1.0;  // linear
};

/// Parsed run configuration. Angles are radians, SNR is linear and the
/// carrier is in hertz; the user-facing JSON is kept verbatim in `raw`.
struct ScenarioConfig {
  nlohmann::json raw = nlohmann::json::object();
  std::set<std::string> explicit_keys;

  LinkGeometry geometry;
  std::optional<double> spread_rad;
  double azimuth_rad = 0.0;
  std::optional<double> aperture;
  LengthUnit aperture_unit = LengthUnit::kDecorrelations;
  std::optional<std::size_t> antennas;  // empty: max_half_lambda
  std::size_t mimo_m = 4;
  std::size_t mimo_n = 4;
  double snr_rho = 1.0;
  double outage_q = 0.1;
  McBudget mc;
  unsigned workers = 1;

  std::optional<int> figure;
  std::vector<double> sweep;
  bool export_eigenvectors = false;
  std::vector<double> spreads_rad;
  std::vector<double> apertures;
  std::string packing = "half_lambda";
  std::vector<SnrPoint> snr_points;
  std::string preset;
  std::string truncation = "fixed";
  double gradation = 0.01;
  bool symmetrize = false;
  std::size_t cdf_levels = 200;
  std::vector<double> mode_strengths;
  std::vector<double> separations_m;
  std::vector<double> pas_phi_rad;

  bool has(const std::string& key) const { return explicit_keys.count(key) > 0; }
  double carrier_hz() const { return geometry.carrier_frequency_hz; }
};

namespace detail {

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "carrier_ghz", "range_m", "base_height_m", "clutter_height_m", "mobile_height_m",
      "piazza_radius_m", "transmit_power_w", "spread_deg", "azimuth_deg", "aperture",
      "aperture_unit", "antennas", "mimo_m", "mimo_n", "snr_db", "outage_q", "candidates",
      "trials", "rounds", "shrink", "seed", "heldout_trials", "workers", "figure", "sweep",
      "spreads_deg", "apertures", "packing", "snr_db_list", "preset", "truncation", "gradation",
      "symmetrize", "cdf_levels", "eigenvectors", "mode_strengths", "separations_m", "pas_phi_deg"};
  return keys;
}

template <typename T>
T get_as(const nlohmann::json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("config key '" + key + "' has the wrong type");
  }
}

inline std::size_t get_count(const nlohmann::json& j, const std::string& key, std::size_t min_value) {
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < static_cast<std::int64_t>(min_value))
    throw ValidationError("config key '" + key + "' must be an integer >= " + std::to_string(min_value));
  return v.get<std::size_t>();
}

inline std::vector<double> get_list(const nlohmann::json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.empty()) throw ValidationError("config key '" + key + "' must be a non-empty list");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ValidationError("config key '" + key + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline std::string get_choice(const nlohmann::json& j, const std::string& key,
                              std::initializer_list<const char*> choices) {
  const auto value = get_as<std::string>(j, key);
  std::string allowed;
  for (const char* c : choices) {
    if (value == c) return value;
    allowed += allowed.empty() ? c : std::string(", ") + c;
  }
  throw ValidationError("config key '" + key + "' must be one of: " + allowed);
}

}  // namespace detail

/// Validates a flat JSON object and converts it to internal units.
inline ScenarioConfig parse_config(const nlohmann::json& raw) {
  using detail::get_as;
  if (!raw.is_object()) throw ValidationError("config must be a JSON object");
  std::string unknown;
  for (const auto& [key, value] : raw.items()) {
    const auto& keys = detail::config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) unknown += (unknown.empty() ? "" : ", ") + key;
  }
  if (!unknown.empty()) throw ValidationError("unknown config keys: " + unknown);

  ScenarioConfig c;
  c.raw = raw;
  for (const auto& [key, value] : raw.items()) c.explicit_keys.insert(key);
  c.workers = std::max(1u, std::thread::hardware_concurrency());

  auto& g = c.geometry;
  if (c.has("carrier_ghz")) g.carrier_frequency_hz = get_as<double>(raw, "carrier_ghz") * 1e9;
  if (c.has("range_m")) g.range_m = get_as<double>(raw, "range_m");
  if (c.has("base_height_m")) g.base_height_m = get_as<double>(raw, "base_height_m");
  if (c.has("clutter_height_m")) g.clutter_height_m = get_as<double>(raw, "clutter_height_m");
  if (c.has("mobile_height_m")) g.mobile_height_m = get_as<double>(raw, "mobile_height_m");
  if (c.has("piazza_radius_m")) g.piazza_radius_m = get_as<double>(raw, "piazza_radius_m");
  if (c.has("transmit_power_w")) g.transmit_power_w = get_as<double>(raw, "transmit_power_w");
  g.validate();

  if (c.has("spread_deg")) {
    const double deg = get_as<double>(raw, "spread_deg");
    detail::require(deg > 0.0 && deg < 180.0, "spread_deg must lie in (0, 180)");
    c.spread_rad = deg_to_rad(deg);
  }
  if (c.has("azimuth_deg")) {
    const double deg = get_as<double>(raw, "azimuth_deg");
    detail::require(deg > -90.0 && deg < 90.0, "azimuth_deg must lie in (-90, 90)");
    c.azimuth_rad = deg_to_rad(deg);
  }
  if (c.has("aperture")) {
    c.aperture = get_as<double>(raw, "aperture");
    detail::require(*c.aperture > 0.0, "aperture must be > 0");
  }
  if (c.has("aperture_unit"))
    c.aperture_unit = detail::get_choice(raw, "aperture_unit", {"decorrelations", "meters"}) == "meters"
                          ? LengthUnit::kMeters
                          : LengthUnit::kDecorrelations;
  if (c.has("antennas")) {
    const auto& v = raw.at("antennas");
    if (v.is_string()) {
      detail::require(v.get<std::string>() == "max_half_lambda",
                      "antennas must be a count or \"max_half_lambda\"");
    } else {
      c.antennas = detail::get_count(raw, "antennas", 1);
    }
  }
  if (c.has("mimo_m")) c.mimo_m = detail::get_count(raw, "mimo_m", 1);
  if (c.has("mimo_n")) c.mimo_n = detail::get_count(raw, "mimo_n", 1);
  detail::require(c.mimo_m <= 64, "mimo_m must be <= 64");
  if (c.has("snr_db")) c.snr_rho = db_to_linear(get_as<double>(raw, "snr_db"));
  if (c.has("outage_q")) c.outage_q = get_as<double>(raw, "outage_q");
  detail::require(c.outage_q > 0.0 && c.outage_q < 1.0, "outage_q must lie in (0, 1)");

  if (c.has("candidates")) c.mc.candidates = detail::get_count(raw, "candidates", 1);
  if (c.has("trials")) c.mc.trials = detail::get_count(raw, "trials", 1);
  if (c.has("rounds")) c.mc.rounds = detail::get_count(raw, "rounds", 1);
  if (c.has("heldout_trials")) c.mc.heldout_trials = detail::get_count(raw, "heldout_trials", 1);
  if (c.has("seed")) c.mc.seed = get_as<std::uint64_t>(raw, "seed");
  if (c.has("shrink")) c.mc.shrink = get_as<double>(raw, "shrink");
  detail::require(c.mc.shrink > 0.0 && c.mc.shrink <= 1.0, "shrink must lie in (0, 1]");
  if (c.has("workers")) c.workers = static_cast<unsigned>(detail::get_count(raw, "workers", 1));

  if (c.has("figure")) {
    c.figure = static_cast<int>(detail::get_count(raw, "figure", 1));
    detail::require(*c.figure >= 4 && *c.figure <= 9 && *c.figure != 8,
                    "figure must be one of 4, 5, 6, 7, 9");
  }
  if (c.has("sweep")) {
    c.sweep = detail::get_list(raw, "sweep");
    if (c.figure == 9)
      for (double& x : c.sweep) x = deg_to_rad(x);
  }
  if (c.has("spreads_deg"))
    for (double d : detail::get_list(raw, "spreads_deg")) {
      detail::require(d > 0.0 && d < 180.0, "spreads_deg entries must lie in (0, 180)");
      c.spreads_rad.push_back(deg_to_rad(d));
    }
  if (c.has("apertures"))
    for (double a : c.apertures = detail::get_list(raw, "apertures"))
      detail::require(a > 0.0, "apertures must be > 0");
  if (c.has("packing")) c.packing = detail::get_choice(raw, "packing", {"half_lambda", "per_8deg_density"});
  if (c.has("snr_db_list"))
    for (double db : detail::get_list(raw, "snr_db_list")) c.snr_points.push_back({db, db_to_linear(db)});
  if (c.has("preset")) c.preset = detail::get_choice(raw, "preset", {"fig12", "fig13", "fig15"});
  if (c.has("truncation")) c.truncation = detail::get_choice(raw, "truncation", {"fixed", "optimized"});
  if (c.has("gradation")) c.gradation = get_as<double>(raw, "gradation");
  detail::require(c.gradation > 0.0 && c.gradation <= 1.0, "gradation must lie in (0, 1]");
  if (c.has("symmetrize")) c.symmetrize = get_as<bool>(raw, "symmetrize");
  if (c.has("eigenvectors")) c.export_eigenvectors = get_as<bool>(raw, "eigenvectors");
  if (c.has("cdf_levels")) c.cdf_levels = detail::get_count(raw, "cdf_levels", 2);
  if (c.has("mode_strengths")) {
    c.mode_strengths = detail::get_list(raw, "mode_strengths");
    for (std::size_t k = 0; k < c.mode_strengths.size(); ++k) {
      detail::require(c.mode_strengths[k] > 0.0, "mode_strengths must be > 0");
      if (k) detail::require(c.mode_strengths[k] <= c.mode_strengths[k - 1], "mode_strengths must be descending");
    }
  }
  if (c.has("separations_m"))
    for (double s : c.separations_m = detail::get_list(raw, "separations_m"))
      detail::require(s >= 0.0, "separations_m must be >= 0");
  if (c.has("pas_phi_deg"))
    for (double d : detail::get_list(raw, "pas_phi_deg")) {
      detail::require(d > -90.0 && d < 90.0, "pas_phi_deg entries must lie in (-90, 90)");
      c.pas_phi_rad.push_back(deg_to_rad(d));
    }
  return c;
}

/// Parses one override value: JSON if it parses, otherwise a plain string.
inline nlohmann::json parse_override_value(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    return text;
  }
}

/// Loads a config file (or starts empty) and applies key overrides on top.
inline ScenarioConfig load_config(const std::string& path, const nlohmann::json& overrides) {
  nlohmann::json raw = nlohmann::json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    try {
      raw = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError("config file " + path + " is not valid JSON: " + e.what());
    }
    if (!raw.is_object()) throw ValidationError("config file must hold a JSON object");
  }
  for (const auto& [key, value] : overrides.items()) raw[key] = value;
  return parse_config(raw);
}

}  // namespace bfmimo
