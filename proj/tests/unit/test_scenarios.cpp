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

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "catch_amalgamated.hpp"

#include "bfmimo/scenarios/config.hpp"
#include "bfmimo/scenarios/manifest.hpp"
#include "bfmimo/scenarios/runners.hpp"
#include "bfmimo/scenarios/table.hpp"

using namespace bfmimo;
using Catch::Approx;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("bfmimo_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Reduced Monte Carlo budget; single worker keeps the suite predictable on small hosts.
json small(json j) {
  j["candidates"] = 150;
  j["trials"] = 2000;
  j["heldout_trials"] = 20000;
  j["workers"] = 1;
  return j;
}

// Parses RFC 4180 text into one header -> field map per row.
std::vector<std::map<std::string, std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> lines(1);
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      lines.back().push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      lines.back().push_back(std::move(field));
      field.clear();
      lines.emplace_back();
      ++i;  // '\n'
    } else {
      field += c;
    }
  }
  lines.pop_back();
  std::vector<std::map<std::string, std::string>> rows;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    std::map<std::string, std::string> row;
    for (std::size_t c = 0; c < lines[0].size(); ++c) row[lines[0][c]] = lines[r].at(c);
    rows.push_back(row);
  }
  return rows;
}

const std::string& artifact(const RunResult& r, const std::string& name) {
  for (const auto& a : r.artifacts)
    if (a.name == name) return a.content;
  throw Error("missing artifact " + name);
}

int run_cli(const std::string& args) {
  const char* cli = std::getenv("BFMIMO_CLI");
  if (!cli) return -1;
  const int status = std::system((std::string(cli) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing and units") {
  const auto c = parse_config(json{{"spread_deg", 4.0}, {"carrier_ghz", 5.0}, {"snr_db", 10.0},
                                   {"aperture", 1.5}, {"aperture_unit", "meters"}, {"seed", 7}});
  CHECK(*c.spread_rad == Approx(4.0 * kPi / 180.0));
  CHECK(c.carrier_hz() == 5.0e9);
  CHECK(c.snr_rho == Approx(10.0));
  CHECK(c.aperture_unit == LengthUnit::kMeters);
  CHECK(c.mc.seed == 7);
  CHECK(c.has("seed"));
  CHECK_FALSE(c.has("trials"));
  CHECK(c.mimo_m == 4);
  CHECK(c.outage_q == 0.1);

  const auto fig9 = parse_config(json{{"figure", 9}, {"sweep", {2.0, 4.0}}});
  CHECK(fig9.sweep[1] == Approx(deg_to_rad(4.0)));
  const auto fig7 = parse_config(json{{"figure", 7}, {"sweep", {2.0, 4.0}}});
  CHECK(fig7.sweep[1] == 4.0);
}

TEST_CASE("config validation") {
  try {
    parse_config(json{{"spred_deg", 4.0}, {"trails", 3}, {"seed", 1}});
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    CHECK(what.find("spred_deg") != std::string::npos);
    CHECK(what.find("trails") != std::string::npos);
    CHECK(what.find("seed") == std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(json::array()), ValidationError);
  CHECK_THROWS_AS(parse_config(json{{"outage_q", 1.5}}), ValidationError);
  CHECK_THROWS_AS(parse_config(json{{"figure", 8}}), ValidationError);
  CHECK_THROWS_AS(parse_config(json{{"packing", "dense"}}), ValidationError);
  CHECK_THROWS_AS(parse_config(json{{"trials", 0}}), ValidationError);
  CHECK_THROWS_AS(parse_config(json{{"mode_strengths", {1.0, 2.0}}}), ValidationError);
  CHECK_THROWS_AS(parse_config(json{{"antennas", "many"}}), ValidationError);
  CHECK_THROWS_AS(parse_config(json{{"spread_deg", "wide"}}), ValidationError);
}

TEST_CASE("config files and overrides") {
  const auto dir = scratch("config");
  {
    std::ofstream(dir / "a.json") << R"({"spread_deg": 6, "seed": 3})";
    std::ofstream(dir / "bad.json") << "{ not json";
  }
  const auto c = load_config((dir / "a.json").string(), json{{"seed", 9}, {"preset", "fig13"}});
  CHECK(*c.spread_rad == Approx(deg_to_rad(6.0)));
  CHECK(c.mc.seed == 9);
  CHECK(c.preset == "fig13");
  CHECK(c.raw.at("seed") == 9);
  CHECK_THROWS_AS(load_config((dir / "bad.json").string(), json::object()), ValidationError);
  CHECK_THROWS_AS(load_config((dir / "missing.json").string(), json::object()), ValidationError);

  CHECK(parse_override_value("3") == 3);
  CHECK(parse_override_value("[1,2]") == json({1, 2}));
  CHECK(parse_override_value("fig12") == "fig12");
  CHECK(parse_override_value("true") == true);
}

TEST_CASE("CSV writing") {
  CsvTable t({"a", "b,c", "d"});
  t.add_row({cell(0.1), cell(std::string("say \"hi\"")), cell(std::size_t{3})});
  t.add_row({cell(1e-20)});
  std::ostringstream os;
  t.write(os);
  CHECK(os.str() == "a,\"b,c\",d\r\n0.1,\"say \"\"hi\"\"\",3\r\n1e-20,,\r\n");
  CHECK_THROWS_AS(t.add_row({cell(1.0), cell(2.0), cell(3.0), cell(4.0)}), ValidationError);
  CHECK(format_number(2.0) == "2");
  CHECK(std::stod(format_number(kPi)) == kPi);
}

TEST_CASE("spectrum runner") {
  SECTION("figure 4 defaults") {
    const auto r = run_fig_spectrum(parse_config(json{{"figure", 4}}));
    const auto rows = read_csv(artifact(r, "fig4_spectrum.csv"));
    REQUIRE(rows.size() == 18);
    CHECK(std::stod(rows.back().at("eig_1")) == Approx(13.31281701).epsilon(1e-8));
    CHECK(rows.front().at("eig_2").empty());
    CHECK(rows.back().at("capped") == "false");
  }
  SECTION("eigenvector export") {
    const auto r = run_fig_spectrum(parse_config(json{{"figure", 5}, {"sweep", {3}}, {"eigenvectors", true}}));
    CHECK(read_csv(artifact(r, "fig5_eigenvectors.csv")).size() == 9);
  }
  SECTION("keys a figure does not read are rejected by name") {
    try {
      run_fig_spectrum(parse_config(json{{"figure", 5}, {"spread_deg", 3.0}, {"antennas", 4}}));
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      const std::string what = e.what();
      CHECK(what.find("spread_deg") != std::string::npos);
      CHECK(what.find("antennas") != std::string::npos);
    }
    CHECK_THROWS_AS(run_fig_spectrum(parse_config(json::object())), ValidationError);
  }
}

TEST_CASE("envelope runner") {
  SECTION("unit gradation is the better of the two beams") {
    const auto r = run_fig8(parse_config(json{{"gradation", 1.0}, {"trials", 20000}, {"workers", 1}}));
    const auto s = json::parse(artifact(r, "fig8_summary.json"));
    CHECK(s.at("splits").size() == 2);
    CHECK(s.at("best_quantile_bits") == std::max(s.at("strongest_only_bits").get<double>(),
                                                s.at("weakest_only_bits").get<double>()));
    const auto env = read_csv(artifact(r, "fig8_envelope.csv"));
    const auto fam = read_csv(artifact(r, "fig8_cdf_family.csv"));
    REQUIRE(env.size() == fam.size());
    for (std::size_t j = 0; j < env.size(); ++j) {
      double best = 0.0;
      for (const auto& [k, v] : fam[j])
        if (k != "cumulative_probability") best = std::max(best, std::stod(v));
      CHECK(std::stod(env[j].at("envelope_capacity_bits")) == best);
    }
  }
  SECTION("reduced default run") {
    const auto r = run_fig8(parse_config(json{{"trials", 20000}, {"gradation", 0.05}, {"workers", 1}}));
    const auto s = json::parse(artifact(r, "fig8_summary.json"));
    CHECK(s.at("best_quantile_bits").get<double>() == Approx(1.12).margin(0.05));
    CHECK(s.at("strongest_only_bits").get<double>() == Approx(0.634).margin(0.03));
  }
}

TEST_CASE("capacity versus spread") {
  const auto r = run_capacity_vs_spread(parse_config(small(json{{"spreads_deg", {8.0, 6.0, 0.25}}})));
  const auto rows = read_csv(artifact(r, "capacity_vs_spread.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(std::stod(rows[0].at("gain_pct")) == Approx(51.0).margin(5.0));
  CHECK(std::stod(rows[1].at("gain_pct")) == Approx(44.0).margin(5.0));
  CHECK(std::stod(rows[2].at("gain_pct")) >= 0.0);
  CHECK(std::stod(rows[2].at("gain_pct")) < 5.0);
  CHECK(rows[0].at("trials") == "2000");
}

TEST_CASE("capacity versus aperture") {
  SECTION("half-wavelength packing") {
    const auto cfg = parse_config(small(json{{"apertures", {1.0, 6.0}}, {"truncation", "optimized"}}));
    const auto rows = read_csv(artifact(run_capacity_vs_decorrelations(cfg), "capacity_vs_decorrelations.csv"));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].at("antennas") == "18");
    CHECK(std::stod(rows[0].at("gain_pct")) == Approx(21.0).margin(4.0));
    for (const auto& row : rows) {
      CHECK(std::stod(row.at("equal_output_bits")) <= std::stod(row.at("mimo_bits")) + 1e-12);
      CHECK(std::stod(row.at("bf_bits")) <= std::stod(row.at("mimo_bits")) + 1e-12);
    }
    CHECK(std::stod(rows[1].at("gain_pct")) > std::stod(rows[0].at("gain_pct")));
  }
  SECTION("8 degree density starts below one decorrelation") {
    const auto cfg = parse_config(small(json{{"packing", "per_8deg_density"}, {"apertures", {8.0 / 9.0}}}));
    const auto rows = read_csv(artifact(run_capacity_vs_decorrelations(cfg), "capacity_vs_decorrelations.csv"));
    CHECK(std::stod(rows[0].at("aperture_decorrelations")) == Approx(8.0 / 9.0));
    CHECK(rows[0].at("antennas") == "4");
    CHECK(default_apertures("per_8deg_density").front() == Approx(8.0 / 9.0));
    CHECK_THROWS_AS(run_capacity_vs_decorrelations(
                        parse_config(json{{"packing", "per_8deg_density"}, {"spread_deg", 2.0}})),
                    ValidationError);
  }
}

TEST_CASE("capacity versus SNR") {
  SECTION("two-degree single decorrelation at 18 dB") {
    const auto cfg = parse_config(small(json{{"preset", "fig12"}, {"snr_db_list", {18.0}}}));
    const auto rows = read_csv(artifact(run_capacity_vs_snr(cfg), "capacity_vs_snr.csv"));
    std::map<std::string, double> gain;
    for (const auto& row : rows)
      if (!row.at("gain_pct_vs_bf").empty()) gain[row.at("system")] = std::stod(row.at("gain_pct_vs_bf"));
    CHECK(gain.at("(4,4)") == Approx(100.0).margin(8.0));
    CHECK(gain.at("(2,4)") == Approx(60.0).margin(8.0));
  }
  SECTION("eight-degree layouts at 0 dB and the high-SNR slope") {
    const auto cfg = parse_config(small(json{{"preset", "fig15"}, {"snr_db_list", {0.0, 18.0, 21.0}}}));
    const auto rows = read_csv(artifact(run_capacity_vs_snr(cfg), "capacity_vs_snr.csv"));
    std::map<std::pair<std::string, std::string>, std::map<std::string, std::string>> at;
    for (const auto& row : rows) at[{row.at("layout"), row.at("snr_db")}][row.at("system")] = row.at("quantile_bits");
    std::map<std::string, double> zero_gain;
    for (const auto& row : rows)
      if (row.at("snr_db") == "0" && row.at("system") == "(4,4)") zero_gain[row.at("layout")] = std::stod(row.at("gain_pct_vs_bf"));
    CHECK(zero_gain.at("8deg_2dec") == Approx(21.0).margin(6.0));
    CHECK(zero_gain.at("8deg_4dec") == Approx(51.0).margin(6.0));
    CHECK(zero_gain.at("8deg_8dec") == Approx(82.0).margin(6.0));
    const double slope = std::stod(at[{"8deg_8dec", "21"}]["(4,4)"]) - std::stod(at[{"8deg_8dec", "18"}]["(4,4)"]);
    CHECK(slope == Approx(4.0).margin(0.5));
    // Omni baseline is a single unit-strength mode.
    CHECK(std::stod(at[{"omni", "0"}]["omni(1,4)"]) < std::stod(at[{"8deg_2dec", "0"}]["bf(1,4)"]));
  }
}

TEST_CASE("headline runner") {
  const auto r = run_headline(parse_config(small(json{{"apertures", {4.0}}})));
  const auto j = json::parse(artifact(r, "headline.json"));
  const auto& p = j.at("points").at(0);
  // 18 elements at half-wavelength spacing span the four decorrelations.
  CHECK(p.at("antennas") == 18);
  CHECK(p.at("aperture_m").get<double>() == Approx(4.0 / 2.92612).epsilon(1e-3));
  CHECK(p.at("mimo_bits").get<double>() == Approx(5.7).margin(0.25));
  CHECK(p.at("bf_bits").get<double>() == Approx(3.8).margin(0.25));
  CHECK(j.at("budget").at("candidates") == 150);
}

TEST_CASE("propagation runner") {
  const auto r = run_propagation(parse_config(json{{"separations_m", {0.0, 1.0, 2.0}}}));
  const auto rows = read_csv(artifact(r, "fig1_correlation.csv"));
  REQUIRE(rows.size() == 3);
  const double r0 = std::stod(rows[0].at("numeric_abs"));
  CHECK(r0 == Approx(1.3108103690652862e-14).epsilon(1e-9));
  CHECK(std::stod(rows[0].at("numeric_db")) == Approx(10.0 * std::log10(r0)));
  CHECK(rows[0].at("bessel_k0_abs").empty());
  CHECK(std::stod(rows[1].at("numeric_abs")) / r0 == Approx(0.7465579830588046).epsilon(1e-6));
  CHECK(read_csv(artifact(r, "fig2_pas.csv")).size() == 121);
}

TEST_CASE("reproducible outputs and manifests") {
  const auto cfg = parse_config(small(json{{"apertures", {2.0}}, {"seed", 5}}));
  const auto a = run_headline(cfg);
  auto threaded = cfg;
  threaded.workers = 3;
  const auto b = run_headline(threaded);
  CHECK(a.artifacts.front().content == b.artifacts.front().content);
  auto other = parse_config(small(json{{"apertures", {2.0}}, {"seed", 6}}));
  CHECK(run_headline(other).artifacts.front().content != a.artifacts.front().content);

  const auto dir = scratch("manifest");
  const auto path = run_and_record("headline", cfg, dir);
  const auto m = json::parse(std::ifstream(path));
  CHECK(m.at("command") == "headline");
  CHECK(m.at("seed") == 5);
  CHECK(m.at("outputs").at(0).at("sha256") == sha256_hex(a.artifacts.front().content));
  CHECK(verify_manifest(path, 2).ok);

  std::ofstream(dir / "headline.json", std::ios::app) << " ";  // outputs on disk are not re-read
  CHECK(verify_manifest(path).ok);
  auto tampered = m;
  tampered["outputs"][0]["sha256"] = std::string(64, '0');
  std::ofstream(dir / "tampered.json") << tampered.dump();
  const auto report = verify_manifest(dir / "tampered.json");
  CHECK_FALSE(report.ok);
  CHECK(report.mismatches == std::vector<std::string>{"headline.json"});
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("command line") {
  if (!std::getenv("BFMIMO_CLI")) SKIP("BFMIMO_CLI not set");
  const auto dir = scratch("cli");
  const std::string out = " -o " + dir.string();
  CHECK(run_cli("spectrum --figure 5" + out) == 0);
  CHECK(fs::exists(dir / "fig5_spectrum.csv"));
  CHECK(fs::exists(dir / "spectrum.manifest.json"));
  CHECK(run_cli("verify " + (dir / "spectrum.manifest.json").string()) == 0);
  CHECK(run_cli("spectrum --figure 5 --set bogus_key=1" + out) == 1);
  CHECK(run_cli("spectrum --figure 8" + out) == 1);
  CHECK(run_cli("no-such-command") == 1);
  CHECK(run_cli("propagation --set range_m=-5" + out) == 1);

  auto m = json::parse(std::ifstream(dir / "spectrum.manifest.json"));
  m["outputs"][0]["sha256"] = std::string(64, 'f');
  std::ofstream(dir / "bad.manifest.json") << m.dump();
  CHECK(run_cli("verify " + (dir / "bad.manifest.json").string()) == 1);
}
