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

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bfmimo/scenarios/manifest.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitNumeric = 2;

struct CommonFlags {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> candidates;
  std::optional<std::size_t> rounds;
  std::optional<std::size_t> heldout;
  std::optional<double> outage;
  std::optional<double> snr_db;
  std::optional<unsigned> workers;
  std::vector<std::string> sets;

  nlohmann::json overrides() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0)
        throw bfmimo::ValidationError("--set expects key=value, got '" + s + "'");
      j[s.substr(0, eq)] = bfmimo::parse_override_value(s.substr(eq + 1));
    }
    if (seed) j["seed"] = *seed;
    if (trials) j["trials"] = *trials;
    if (candidates) j["candidates"] = *candidates;
    if (rounds) j["rounds"] = *rounds;
    if (heldout) j["heldout_trials"] = *heldout;
    if (outage) j["outage_q"] = *outage;
    if (snr_db) j["snr_db"] = *snr_db;
    return j;
  }
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("-c,--config", f.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("-o,--out", f.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--trials", f.trials, "channel draws per candidate");
  cmd->add_option("--candidates", f.candidates, "allocations sampled per search round");
  cmd->add_option("--rounds", f.rounds, "search rounds");
  cmd->add_option("--heldout", f.heldout, "held-out draws for the final score");
  cmd->add_option("--outage", f.outage, "outage probability q");
  cmd->add_option("--snr-db", f.snr_db, "SNR in dB");
  cmd->add_option("--workers", f.workers, "worker threads (does not change results)");
  cmd->add_option("--set", f.sets, "override any config key: key=value (value parsed as JSON)");
}

int run(const std::string& command, const CommonFlags& flags, nlohmann::json extra) {
  auto overrides = flags.overrides();
  for (const auto& [k, v] : extra.items()) overrides[k] = v;
  auto cfg = bfmimo::load_config(flags.config_path, overrides);
  if (flags.workers) cfg.workers = std::max(1u, *flags.workers);
  std::string summary;
  const auto manifest = bfmimo::run_and_record(command, cfg, flags.out_dir, &summary);
  std::cout << summary;
  if (!summary.empty() && summary.back() != '\n') std::cout << '\n';
  std::cout << "manifest: " << manifest.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Beamforming versus MIMO outage capacity experiments"};
  app.set_version_flag("--version", bfmimo::kVersion);
  app.require_subcommand(1);

  CommonFlags flags;
  std::optional<int> figure;
  std::string manifest_path;
  unsigned verify_workers = 0;

  auto* spectrum = app.add_subcommand("spectrum", "APOD eigenvalue sweeps (figures 4, 5, 6, 7, 9)");
  spectrum->add_option("--figure", figure, "figure number")->check(CLI::IsMember({4, 5, 6, 7, 9}));
  const std::vector<std::pair<std::string, std::string>> plain = {
      {"envelope", "two-mode split envelope (figure 8)"},
      {"capacity-vs-spread", "MIMO and beamforming quantiles against angular spread"},
      {"capacity-vs-decorr", "MIMO and beamforming quantiles against aperture length"},
      {"capacity-vs-snr", "quantiles against SNR (presets fig12, fig13, fig15)"},
      {"headline", "(4,4) and (1,4) capacities at 2, 4 and 8 decorrelations, full budget"},
      {"propagation", "correlation against separation and angular spectra (figures 1, 2)"}};
  std::vector<CLI::App*> commands = {spectrum};
  for (const auto& [name, help] : plain) commands.push_back(app.add_subcommand(name, help));
  for (auto* cmd : commands) add_common(cmd, flags);

  auto* verify = app.add_subcommand("verify", "re-run a manifest and compare output checksums");
  verify->add_option("manifest", manifest_path, "manifest JSON")->required()->check(CLI::ExistingFile);
  verify->add_option("--workers", verify_workers, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (verify->parsed()) {
      const auto report = bfmimo::verify_manifest(manifest_path, verify_workers);
      if (report.ok) {
        std::cout << "verified: all outputs reproduce\n";
        return 0;
      }
      for (const auto& path : report.mismatches) std::cerr << "checksum mismatch: " << path << '\n';
      return kExitValidation;
    }
    for (auto* cmd : commands) {
      if (!cmd->parsed()) continue;
      nlohmann::json extra = nlohmann::json::object();
      if (cmd == spectrum && figure) extra["figure"] = *figure;
      return run(cmd->get_name(), flags, extra);
    }
  } catch (const bfmimo::NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << " (error estimate " << e.error_estimate() << ")\n";
    return kExitNumeric;
  } catch (const bfmimo::ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}
