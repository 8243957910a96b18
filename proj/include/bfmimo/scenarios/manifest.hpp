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

#include <openssl/evp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "bfmimo/core/error.hpp"
#include "bfmimo/scenarios/config.hpp"
#include "bfmimo/scenarios/runners.hpp"
#include "bfmimo/version.hpp"

namespace bfmimo {

/// Lowercase hex SHA-256 of a byte string.
inline std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1)
    throw Error("SHA-256 computation failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < length; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

using Runner = std::function<RunResult(const ScenarioConfig&)>;

/// Subcommand name to runner.
inline Runner runner_for(const std::string& command) {
  if (command == "spectrum") return run_fig_spectrum;
  if (command == "envelope") return run_fig8;
  if (command == "capacity-vs-spread") return run_capacity_vs_spread;
  if (command == "capacity-vs-decorr") return run_capacity_vs_decorrelations;
  if (command == "capacity-vs-snr") return run_capacity_vs_snr;
  if (command == "headline") return run_headline;
  if (command == "propagation") return run_propagation;
  throw ValidationError("unknown command: " + command);
}

inline std::string manifest_name(const std::string& command) { return command + ".manifest.json"; }

inline nlohmann::json make_manifest(const std::string& command, const ScenarioConfig& cfg,
                                    const RunResult& result, double seconds) {
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& a : result.artifacts) outputs.push_back({{"path", a.name}, {"sha256", sha256_hex(a.content)}});
  return {{"tool", "bfmimo"},
          {"version", kVersion},
          {"command", command},
          {"config", cfg.raw},
          {"seed", cfg.mc.seed},
          {"outputs", outputs},
          {"wall_clock_seconds", seconds}};
}

/// Runs a command, writes its outputs and the sibling manifest into `dir`.
/// Returns the manifest path.
inline std::filesystem::path run_and_record(const std::string& command, const ScenarioConfig& cfg,
                                            const std::filesystem::path& dir, std::string* summary = nullptr) {
  const auto start = std::chrono::steady_clock::now();
  const auto result = runner_for(command)(cfg);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::filesystem::create_directories(dir);
  for (const auto& a : result.artifacts) {
    std::ofstream out(dir / a.name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / a.name).string());
    out << a.content;
  }
  const auto manifest_path = dir / manifest_name(command);
  std::ofstream out(manifest_path, std::ios::binary);
  if (!out) throw Error("cannot write " + manifest_path.string());
  out << make_manifest(command, cfg, result, seconds).dump(2) << "\n";
  if (summary) *summary = result.summary;
  return manifest_path;
}

struct VerifyReport {
  bool ok = true;
  std::vector<std::string> mismatches;  // output paths whose checksum differs
};

/// Re-runs the manifest's command from its config snapshot in memory and
/// compares the checksums of every recorded output.
inline VerifyReport verify_manifest(const std::filesystem::path& manifest_path, unsigned workers = 0) {
  std::ifstream in(manifest_path);
  if (!in) throw ValidationError("cannot open manifest: " + manifest_path.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("manifest is not valid JSON: ") + e.what());
  }
  for (const char* key : {"command", "config", "outputs"})
    if (!manifest.contains(key)) throw ValidationError(std::string("manifest lacks '") + key + "'");
  auto cfg = parse_config(manifest.at("config"));
  if (workers > 0) cfg.workers = workers;
  const auto result = runner_for(manifest.at("command").get<std::string>())(cfg);

  VerifyReport report;
  for (const auto& entry : manifest.at("outputs")) {
    const auto path = entry.at("path").get<std::string>();
    const auto expected = entry.at("sha256").get<std::string>();
    const auto it = std::find_if(result.artifacts.begin(), result.artifacts.end(),
                                 [&](const Artifact& a) { return a.name == path; });
    if (it == result.artifacts.end() || sha256_hex(it->content) != expected) {
      report.ok = false;
      report.mismatches.push_back(path);
    }
  }
  return report;
}

}  // namespace bfmimo
