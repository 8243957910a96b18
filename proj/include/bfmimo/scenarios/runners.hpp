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
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bfmimo/apod/spectrum.hpp"
#include "bfmimo/apod/sweep.hpp"
#include "bfmimo/outage/envelope.hpp"
#include "bfmimo/outage/equalization.hpp"
#include "bfmimo/propagation.hpp"
#include "bfmimo/scenarios/config.hpp"
#include "bfmimo/scenarios/table.hpp"

namespace bfmimo {

/// One output file held in memory until the caller writes it.
struct Artifact {
  std::string name;
  std::string content;
};

struct RunResult {
  std::vector<Artifact> artifacts;
  std::string summary;  // short human-readable digest for stdout
};

namespace detail {

inline Artifact csv_artifact(std::string name, const CsvTable& table) {
  std::ostringstream os;
  table.write(os);
  return {std::move(name), os.str()};
}

inline Artifact json_artifact(std::string name, const nlohmann::json& j) {
  return {std::move(name), j.dump(2) + "\n"};
}

inline double gain_pct(double mimo, double bf) { return 100.0 * (mimo / bf - 1.0); }

inline std::vector<std::string> budget_header() {
  return {"candidates", "trials", "rounds", "heldout_trials"};
}

inline std::vector<CsvTable::Cell> budget_cells(const McBudget& b) {
  return {cell(b.candidates), cell(b.trials), cell(b.rounds), cell(b.heldout_trials)};
}

inline nlohmann::json budget_json(const McBudget& b) {
  return {{"candidates", b.candidates}, {"trials", b.trials},   {"rounds", b.rounds},
          {"shrink", b.shrink},         {"seed", b.seed},       {"heldout_trials", b.heldout_trials}};
}

inline std::vector<double> top_modes(const std::vector<double>& eigenvalues, std::size_t m) {
  std::vector<double> out(eigenvalues.begin(),
                          eigenvalues.begin() + static_cast<std::ptrdiff_t>(std::min(m, eigenvalues.size())));
  for (double& nu : out) detail::require(nu > 0.0, "mode strength is not positive; reduce mimo_m");
  return out;
}

inline void sort_descending(std::vector<double>& v) { std::sort(v.begin(), v.end(), std::greater<>()); }

struct PointResult {
  double mimo = 0.0;
  double bf = 0.0;
  double equal_output = 0.0;
  std::size_t equal_output_active = 0;
  PowerAllocation allocation;
};

/// Held-out quantile of a fixed allocation; same draws as the search's held-out pass.
inline double heldout_quantile(const MimoConfig& config, const PowerAllocation& alloc, const McBudget& b,
                               unsigned workers) {
  return capacity_distribution(config, alloc, b.heldout_trials, b.seed, workers, Purpose::kHeldOutChannel, 0)
      .quantile(config.outage_q);
}

/// Optimized (m, n) MIMO, (1, n) beamforming and the equal-output bound for one spectrum.
inline PointResult evaluate_point(const std::vector<double>& eigenvalues, std::size_t m, std::size_t n,
                                  double rho, double q, const McBudget& b, unsigned workers,
                                  bool optimize_truncation = false) {
  PointResult r;
  const MimoConfig mimo{n, top_modes(eigenvalues, m), rho, q};
  SearchOptions opt;
  opt.candidates = b.candidates;
  opt.trials = b.trials;
  opt.rounds = b.rounds;
  opt.shrink = b.shrink;
  opt.seed = b.seed;
  opt.heldout_trials = b.heldout_trials;
  opt.workers = workers;
  const auto search = polytope_envelope_search(mimo, opt);
  r.mimo = search.quantile;
  r.allocation = search.best;

  const MimoConfig bf{n, top_modes(eigenvalues, 1), rho, q};
  r.bf = heldout_quantile(bf, PowerAllocation({1.0}), b, workers);

  if (optimize_truncation) {
    const auto t = equal_output_truncation(mimo, b.heldout_trials, b.seed, workers);
    r.equal_output = t.quantiles[t.best_active - 1];
    r.equal_output_active = t.best_active;
  } else {
    r.equal_output_active = mimo.modes();
    r.equal_output =
        heldout_quantile(mimo, equal_output_allocation(mimo.mode_strengths, mimo.modes()), b, workers);
  }
  return r;
}

inline std::string system_label(std::size_t m, std::size_t n) {
  return "(" + std::to_string(m) + "," + std::to_string(n) + ")";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// APOD spectra

inline SweepKind sweep_kind_for_figure(int figure) {
  switch (figure) {
    case 4: return SweepKind::kFixedApertureVaryK;
    case 5: return SweepKind::kOneAntennaPerDecorrelation;
    case 6: return SweepKind::kHalfLambdaPackingVaryAperture;
    case 7: return SweepKind::kFixedKVaryAperture;
    case 9: return SweepKind::kFixedPhysicalApertureVarySpread;
    default: throw ValidationError("spectrum figure must be one of 4, 5, 6, 7, 9");
  }
}

/// Keys a spectrum figure reads. Other layout keys set explicitly are a mismatch.
inline std::vector<std::string> spectrum_keys_for_figure(int figure) {
  switch (figure) {
    case 4: return {"sweep", "aperture", "aperture_unit", "carrier_ghz", "spread_deg"};
    case 5: return {"sweep"};
    case 6: return {"sweep", "carrier_ghz", "spread_deg"};
    case 7: return {"sweep", "antennas"};
    case 9: return {"sweep", "antennas", "carrier_ghz"};
    default: return {};
  }
}

inline SpectrumTable spectrum_for_figure(const ScenarioConfig& cfg) {
  detail::require(cfg.figure.has_value(), "spectrum needs a figure (4, 5, 6, 7 or 9)");
  const int figure = *cfg.figure;
  const auto kind = sweep_kind_for_figure(figure);

  const std::vector<std::string> layout_keys = {"sweep", "aperture", "aperture_unit", "antennas",
                                                "carrier_ghz", "spread_deg"};
  const auto allowed = spectrum_keys_for_figure(figure);
  std::string conflicts;
  for (const auto& key : layout_keys)
    if (cfg.has(key) && std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      conflicts += (conflicts.empty() ? "" : ", ") + key;
  if (!conflicts.empty())
    throw ValidationError("figure " + std::to_string(figure) + " does not use config keys: " + conflicts);

  auto params = SweepParams::defaults_for(kind);
  params.workers = cfg.workers;
  params.keep_eigenvectors = cfg.export_eigenvectors;
  if (!cfg.sweep.empty()) params.abscissa = cfg.sweep;
  if (cfg.has("carrier_ghz")) params.carrier_hz = cfg.carrier_hz();
  if (cfg.spread_rad) params.spread_rad = *cfg.spread_rad;
  if (cfg.antennas) params.fixed_antennas = *cfg.antennas;
  if (cfg.aperture) {
    detail::require(cfg.aperture_unit == LengthUnit::kDecorrelations,
                    "figure 4 aperture is given in decorrelations");
    params.aperture_decorrelations = *cfg.aperture;
  }
  return spectrum_sweep(kind, params);
}

inline CsvTable spectrum_csv(const SpectrumTable& table) {
  std::size_t width = 0;
  for (const auto& row : table.rows) width = std::max(width, row.eigenvalues.size());
  std::vector<std::string> header = {"abscissa_label", "abscissa_value"};
  for (std::size_t k = 1; k <= width; ++k) header.push_back("eig_" + std::to_string(k));
  for (const char* extra : {"antennas", "aperture_decorrelations", "capped"}) header.push_back(extra);
  CsvTable csv(header);
  for (const auto& row : table.rows) {
    std::vector<CsvTable::Cell> cells = {cell(table.abscissa_label), cell(row.abscissa)};
    for (std::size_t k = 0; k < width; ++k)
      cells.push_back(k < row.eigenvalues.size() ? cell(row.eigenvalues[k]) : CsvTable::Cell{});
    cells.push_back(cell(row.antennas));
    cells.push_back(cell(row.aperture_decorrelations));
    cells.push_back(cell(std::string(row.capped ? "true" : "false")));
    csv.add_row(std::move(cells));
  }
  return csv;
}

/// Long-format eigenvectors: one line per (sweep point, antenna, mode).
inline CsvTable eigenvector_csv(const SpectrumTable& table) {
  CsvTable csv({"abscissa_value", "antenna", "mode", "real", "imag"});
  for (const auto& row : table.rows)
    for (std::size_t j = 0; j < row.eigenvectors.rows(); ++j)
      for (std::size_t k = 0; k < row.eigenvectors.cols(); ++k)
        csv.add_row({cell(row.abscissa), cell(j), cell(k), cell(row.eigenvectors(j, k).real()),
                     cell(row.eigenvectors(j, k).imag())});
  return csv;
}

inline RunResult run_fig_spectrum(const ScenarioConfig& cfg) {
  const auto table = spectrum_for_figure(cfg);
  RunResult out;
  const std::string stem = "fig" + std::to_string(*cfg.figure);
  out.artifacts.push_back(detail::csv_artifact(stem + "_spectrum.csv", spectrum_csv(table)));
  if (cfg.export_eigenvectors)
    out.artifacts.push_back(detail::csv_artifact(stem + "_eigenvectors.csv", eigenvector_csv(table)));
  std::ostringstream s;
  s << "figure " << *cfg.figure << ": " << table.rows.size() << " rows";
  if (!table.rows.empty()) {
    const auto& last = table.rows.back();
    s << "; last row " << table.abscissa_label << "=" << format_number(last.abscissa)
      << " top eigenvalue " << format_number(last.eigenvalues.front());
  }
  out.summary = s.str();
  return out;
}

// ---------------------------------------------------------------------------
// Two-mode envelope

inline std::vector<double> default_miso_strengths() {
  const auto spectrum =
      eigendecompose(CorrelationKernel{1.0, 0.0, 1.0}, ArrayLayout::in_decorrelations(18, 6.0));
  return {spectrum.eigenvalues[0], spectrum.eigenvalues[1]};
}

inline RunResult run_fig8(const ScenarioConfig& cfg) {
  auto strengths = cfg.mode_strengths.empty() ? default_miso_strengths() : cfg.mode_strengths;
  detail::require(strengths.size() == 2, "the envelope run needs exactly two mode strengths");
  const MimoConfig config{cfg.has("mimo_n") ? cfg.mimo_n : 1, strengths, cfg.snr_rho, cfg.outage_q};

  MisoEnvelopeOptions opt;
  opt.gradation = cfg.gradation;
  opt.trials = cfg.has("trials") ? cfg.mc.trials : 100000;
  opt.seed = cfg.mc.seed;
  opt.symmetrize = cfg.symmetrize;
  opt.cdf_levels = cfg.cdf_levels;
  opt.workers = cfg.workers;
  const auto env = miso_grid_envelope(config, opt);

  std::vector<std::string> header = {"cumulative_probability"};
  for (double split : env.splits) header.push_back("capacity_bits_lambda1_" + format_number(split));
  CsvTable family(header);
  CsvTable envelope({"cumulative_probability", "envelope_capacity_bits", "argmax_lambda1"});
  for (std::size_t j = 0; j < env.levels.size(); ++j) {
    std::vector<CsvTable::Cell> row = {cell(env.levels[j])};
    for (const auto& candidate : env.family) row.push_back(cell(candidate[j]));
    family.add_row(std::move(row));
    envelope.add_row({cell(env.levels[j]), cell(env.envelope[j]), cell(env.splits[env.envelope_argmax[j]])});
  }

  nlohmann::json summary = {
      {"mode_strengths", strengths},
      {"n_receive", config.n_receive},
      {"snr_linear", config.snr_rho},
      {"outage_q", config.outage_q},
      {"trials", opt.trials},
      {"seed", opt.seed},
      {"gradation", opt.gradation},
      {"symmetrize", opt.symmetrize},
      {"best_lambda1", env.splits[env.best_index]},
      {"best_quantile_bits", env.best_quantile},
      {"strongest_only_bits", env.quantiles.front()},
      {"weakest_only_bits", env.quantiles.back()},
  };
  nlohmann::json splits = nlohmann::json::array();
  for (std::size_t c = 0; c < env.splits.size(); ++c)
    splits.push_back({{"lambda1", env.splits[c]}, {"quantile_bits", env.quantiles[c]}});
  summary["splits"] = splits;

  RunResult out;
  out.artifacts.push_back(detail::csv_artifact("fig8_cdf_family.csv", family));
  out.artifacts.push_back(detail::csv_artifact("fig8_envelope.csv", envelope));
  out.artifacts.push_back(detail::json_artifact("fig8_summary.json", summary));
  std::ostringstream s;
  s << "envelope optimum lambda1=" << format_number(env.splits[env.best_index])
    << " quantile=" << format_number(env.best_quantile)
    << " bits; strongest only " << format_number(env.quantiles.front()) << " bits";
  out.summary = s.str();
  return out;
}

// ---------------------------------------------------------------------------
// Capacity sweeps

inline RunResult run_capacity_vs_spread(const ScenarioConfig& cfg) {
  SweepParams params = SweepParams::defaults_for(SweepKind::kFixedPhysicalApertureVarySpread);
  if (!cfg.spreads_rad.empty()) params.abscissa = cfg.spreads_rad;
  if (cfg.antennas) params.fixed_antennas = *cfg.antennas;
  params.carrier_hz = cfg.carrier_hz();
  params.workers = cfg.workers;
  const auto spectra = spectrum_sweep(SweepKind::kFixedPhysicalApertureVarySpread, params);

  auto header = std::vector<std::string>{"spread_rad", "antennas", "aperture_decorrelations", "mimo_bits",
                                         "bf_bits", "gain_pct"};
  for (auto& h : detail::budget_header()) header.push_back(h);
  CsvTable csv(header);
  std::ostringstream s;
  for (const auto& row : spectra.rows) {
    const auto p = detail::evaluate_point(row.eigenvalues, cfg.mimo_m, cfg.mimo_n, cfg.snr_rho, cfg.outage_q,
                                          cfg.mc, cfg.workers);
    std::vector<CsvTable::Cell> cells = {cell(row.abscissa), cell(row.antennas),
                                         cell(row.aperture_decorrelations), cell(p.mimo), cell(p.bf),
                                         cell(detail::gain_pct(p.mimo, p.bf))};
    for (auto& c : detail::budget_cells(cfg.mc)) cells.push_back(c);
    csv.add_row(std::move(cells));
    s << "spread " << format_number(rad_to_deg(row.abscissa)) << " deg: gain "
      << format_number(std::round(10.0 * detail::gain_pct(p.mimo, p.bf)) / 10.0) << "%\n";
  }
  RunResult out;
  out.artifacts.push_back(detail::csv_artifact("capacity_vs_spread.csv", csv));
  out.summary = s.str();
  return out;
}

inline std::vector<double> default_apertures(const std::string& packing) {
  std::vector<double> a;
  if (packing == "per_8deg_density") {
    a.push_back(8.0 / 9.0);
    for (int i = 1; i <= 12; ++i) a.push_back(i);
  } else {
    for (int i = 1; i <= 30; ++i) a.push_back(i);
  }
  return a;
}

inline RunResult run_capacity_vs_decorrelations(const ScenarioConfig& cfg) {
  const bool fig14 = cfg.packing == "per_8deg_density";
  detail::require(!(fig14 && cfg.has("spread_deg")), "per_8deg_density packing fixes the spread at 8 degrees");
  const double spread = fig14 ? deg_to_rad(8.0) : cfg.spread_rad.value_or(deg_to_rad(2.0));
  const auto apertures = cfg.apertures.empty() ? default_apertures(cfg.packing) : cfg.apertures;
  const bool optimized = cfg.truncation == "optimized";

  auto header = std::vector<std::string>{"aperture_decorrelations", "antennas",   "mimo_bits", "bf_bits",
                                         "equal_output_bits",       "equal_output_active", "gain_pct"};
  for (auto& h : detail::budget_header()) header.push_back(h);
  CsvTable csv(header);
  std::ostringstream s;
  for (double x : apertures) {
    const std::size_t antennas = max_antennas_in_decorrelations(x, cfg.carrier_hz(), spread);
    detail::require(antennas >= 1, "aperture holds no antenna at half-wavelength spacing");
    const auto spectrum = eigendecompose(CorrelationKernel{1.0, 0.0, 1.0},
                                         ArrayLayout::in_decorrelations(antennas, x));
    const auto p = detail::evaluate_point(spectrum.eigenvalues, cfg.mimo_m, cfg.mimo_n, cfg.snr_rho,
                                          cfg.outage_q, cfg.mc, cfg.workers, optimized);
    std::vector<CsvTable::Cell> cells = {cell(x), cell(antennas), cell(p.mimo), cell(p.bf),
                                         cell(p.equal_output), cell(p.equal_output_active),
                                         cell(detail::gain_pct(p.mimo, p.bf))};
    for (auto& c : detail::budget_cells(cfg.mc)) cells.push_back(c);
    csv.add_row(std::move(cells));
    s << "aperture " << format_number(x) << " (K=" << antennas << "): gain "
      << format_number(std::round(10.0 * detail::gain_pct(p.mimo, p.bf)) / 10.0) << "%\n";
  }
  RunResult out;
  out.artifacts.push_back(detail::csv_artifact("capacity_vs_decorrelations.csv", csv));
  out.summary = s.str();
  return out;
}

struct SnrLayout {
  std::string label;
  double carrier_hz = 2.0e9;
  double spread_rad = 0.0;
  double aperture_decorrelations = 1.0;
  std::size_t antennas = 0;
};

struct SnrPlan {
  std::vector<SnrLayout> layouts;
  std::vector<std::size_t> systems;  // transmit mode counts m, each against (1, n) beamforming
};

inline SnrPlan snr_plan(const ScenarioConfig& cfg) {
  auto bound = [](std::string label, double ghz, double spread_deg, double decorrelations) {
    const double spread = deg_to_rad(spread_deg);
    return SnrLayout{std::move(label), ghz * 1e9, spread, decorrelations,
                     max_antennas_in_decorrelations(decorrelations, ghz * 1e9, spread)};
  };
  SnrPlan plan;
  if (cfg.preset == "fig12") {
    plan.layouts = {bound("2deg_1dec", 2.0, 2.0, 1.0)};
    plan.systems = {4, 2};
  } else if (cfg.preset == "fig13") {
    plan.layouts = {bound("6deg_3dec", 2.0, 6.0, 3.0), bound("6deg_7.5dec_5ghz", 5.0, 6.0, 7.5)};
    plan.systems = {4};
  } else if (cfg.preset == "fig15") {
    plan.layouts = {bound("8deg_2dec", 2.0, 8.0, 2.0), bound("8deg_4dec", 2.0, 8.0, 4.0),
                    bound("8deg_8dec", 2.0, 8.0, 8.0)};
    plan.systems = {4};
  } else {
    SnrLayout l;
    l.carrier_hz = cfg.carrier_hz();
    l.spread_rad = cfg.spread_rad.value_or(deg_to_rad(2.0));
    detail::require(cfg.aperture_unit == LengthUnit::kDecorrelations,
                    "capacity-vs-snr aperture is given in decorrelations");
    l.aperture_decorrelations = cfg.aperture.value_or(1.0);
    l.antennas = cfg.antennas.value_or(
        max_antennas_in_decorrelations(l.aperture_decorrelations, l.carrier_hz, l.spread_rad));
    l.label = "custom";
    plan.layouts = {l};
    plan.systems = {cfg.mimo_m};
  }
  return plan;
}

inline RunResult run_capacity_vs_snr(const ScenarioConfig& cfg) {
  const auto plan = snr_plan(cfg);
  std::vector<SnrPoint> snrs = cfg.snr_points;
  if (snrs.empty())
    for (int db = -6; db <= 21; db += 3) snrs.push_back({static_cast<double>(db), db_to_linear(db)});

  auto header = std::vector<std::string>{"snr_db",   "snr_linear",    "layout",  "aperture_decorrelations",
                                         "antennas", "system",        "quantile_bits", "gain_pct_vs_bf"};
  for (auto& h : detail::budget_header()) header.push_back(h);
  CsvTable csv(header);
  auto add = [&](const SnrPoint& snr, const std::string& layout, double aperture, std::size_t antennas,
                 const std::string& system, double bits, CsvTable::Cell gain) {
    std::vector<CsvTable::Cell> cells = {cell(snr.db),  cell(snr.rho), cell(layout), cell(aperture),
                                         cell(antennas), cell(system), cell(bits),   gain};
    for (auto& c : detail::budget_cells(cfg.mc)) cells.push_back(c);
    csv.add_row(std::move(cells));
  };

  std::ostringstream s;
  const std::size_t n = cfg.mimo_n;
  for (const auto& layout : plan.layouts) {
    const auto spectrum = eigendecompose(CorrelationKernel{1.0, 0.0, 1.0},
                                         ArrayLayout::in_decorrelations(layout.antennas,
                                                                        layout.aperture_decorrelations));
    for (const auto& snr : snrs) {
      const MimoConfig bf{n, detail::top_modes(spectrum.eigenvalues, 1), snr.rho, cfg.outage_q};
      const double bf_bits = detail::heldout_quantile(bf, PowerAllocation({1.0}), cfg.mc, cfg.workers);
      for (std::size_t m : plan.systems) {
        const auto p = detail::evaluate_point(spectrum.eigenvalues, m, n, snr.rho, cfg.outage_q, cfg.mc,
                                              cfg.workers);
        add(snr, layout.label, layout.aperture_decorrelations, layout.antennas, detail::system_label(m, n),
            p.mimo, cell(detail::gain_pct(p.mimo, p.bf)));
        s << layout.label << " " << format_number(snr.db) << " dB " << detail::system_label(m, n) << ": "
          << format_number(std::round(100.0 * p.mimo) / 100.0) << " bits, gain "
          << format_number(std::round(10.0 * detail::gain_pct(p.mimo, p.bf)) / 10.0) << "%\n";
      }
      add(snr, layout.label, layout.aperture_decorrelations, layout.antennas, "bf" + detail::system_label(1, n),
          bf_bits, {});
    }
  }
  // Omnidirectional single antenna: one unit-strength mode.
  for (const auto& snr : snrs) {
    const MimoConfig omni{n, {1.0}, snr.rho, cfg.outage_q};
    add(snr, "omni", 0.0, 1, "omni" + detail::system_label(1, n),
        detail::heldout_quantile(omni, PowerAllocation({1.0}), cfg.mc, cfg.workers), {});
  }
  RunResult out;
  out.artifacts.push_back(detail::csv_artifact("capacity_vs_snr.csv", csv));
  out.summary = s.str();
  return out;
}

// ---------------------------------------------------------------------------
// Headline numbers

inline RunResult run_headline(const ScenarioConfig& cfg) {
  McBudget budget = cfg.mc;
  if (!cfg.has("candidates")) budget.candidates = 1000;
  if (!cfg.has("trials")) budget.trials = 10000;
  const double spread = cfg.spread_rad.value_or(deg_to_rad(8.0));
  const auto kernel = kernel_from_spread(AngularSpreadSpec::from_full_width(spread), cfg.carrier_hz());

  nlohmann::json points = nlohmann::json::array();
  std::ostringstream s;
  const std::vector<double> apertures = cfg.apertures.empty() ? std::vector<double>{2.0, 4.0, 8.0} : cfg.apertures;
  for (double x : apertures) {
    const std::size_t antennas = max_antennas_in_decorrelations(x, cfg.carrier_hz(), spread);
    const auto spectrum = eigendecompose(CorrelationKernel{1.0, 0.0, 1.0},
                                         ArrayLayout::in_decorrelations(antennas, x));
    const auto p = detail::evaluate_point(spectrum.eigenvalues, cfg.mimo_m, cfg.mimo_n, cfg.snr_rho,
                                          cfg.outage_q, budget, cfg.workers);
    const auto alloc = p.allocation.values();
    points.push_back({{"aperture_decorrelations", x},
                      {"aperture_m", x / kernel.alpha},
                      {"antennas", antennas},
                      {"mode_strengths", detail::top_modes(spectrum.eigenvalues, cfg.mimo_m)},
                      {"mimo_bits", p.mimo},
                      {"bf_bits", p.bf},
                      {"gain_pct", detail::gain_pct(p.mimo, p.bf)},
                      {"mimo_allocation", std::vector<double>(alloc.begin(), alloc.end())}});
    s << format_number(x) << " decorrelations (K=" << antennas << "): "
      << detail::system_label(cfg.mimo_m, cfg.mimo_n) << " " << format_number(std::round(100 * p.mimo) / 100)
      << " bits, " << detail::system_label(1, cfg.mimo_n) << " " << format_number(std::round(100 * p.bf) / 100)
      << " bits, gain " << format_number(std::round(10.0 * detail::gain_pct(p.mimo, p.bf)) / 10.0) << "%\n";
  }
  nlohmann::json j = {{"spread_rad", spread},
                      {"carrier_hz", cfg.carrier_hz()},
                      {"snr_linear", cfg.snr_rho},
                      {"outage_q", cfg.outage_q},
                      {"mimo_m", cfg.mimo_m},
                      {"mimo_n", cfg.mimo_n},
                      {"budget", detail::budget_json(budget)},
                      {"points", points}};
  RunResult out;
  out.artifacts.push_back(detail::json_artifact("headline.json", j));
  out.summary = s.str();
  return out;
}

// ---------------------------------------------------------------------------
// Propagation curves

inline RunResult run_propagation(const ScenarioConfig& cfg) {
  std::vector<double> separations = cfg.separations_m;
  if (separations.empty())
    for (int i = 0; i <= 100; ++i) separations.push_back(0.1 * i);
  CsvTable fig1({"separation_m", "numeric_abs", "numeric_db", "bessel_k0_abs", "exponential_abs"});
  for (double rd : separations) {
    const double numeric = std::abs(correlation_numeric(cfg.geometry, rd, cfg.azimuth_rad));
    const double expo = std::abs(correlation_asymptotic(cfg.geometry, rd, AsymptoticForm::kExponential));
    CsvTable::Cell k0;
    if (rd > 0.0) k0 = std::abs(correlation_asymptotic(cfg.geometry, rd, AsymptoticForm::kBesselK0));
    fig1.add_row({cell(rd), cell(numeric), cell(linear_to_db(numeric)), k0, cell(expo)});
  }

  std::vector<double> phi = cfg.pas_phi_rad;
  if (phi.empty())
    for (int i = -60; i <= 60; ++i) phi.push_back(deg_to_rad(0.5 * i));
  const auto spread = AngularSpreadSpec::from_full_width(cfg.spread_rad.value_or(deg_to_rad(8.0)));
  const auto pas = pas_exponential_vs_lorentz(spread, phi);
  CsvTable fig2({"phi_rad", "exponential_db", "lorentz_db"});
  for (std::size_t i = 0; i < pas.phi_rad.size(); ++i)
    fig2.add_row({cell(pas.phi_rad[i]), cell(pas.exponential_db[i]), cell(pas.lorentz_db[i])});

  RunResult out;
  out.artifacts.push_back(detail::csv_artifact("fig1_correlation.csv", fig1));
  out.artifacts.push_back(detail::csv_artifact("fig2_pas.csv", fig2));
  out.summary = "path gain " + format_number(std::round(100 * linear_to_db(path_gain(cfg.geometry))) / 100) + " dB";
  return out;
}

}  // namespace bfmimo
