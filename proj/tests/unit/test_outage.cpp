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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "catch_amalgamated.hpp"

#include "bfmimo/outage/allocation.hpp"
#include "bfmimo/outage/capacity.hpp"
#include "bfmimo/outage/envelope.hpp"
#include "bfmimo/outage/equalization.hpp"

using namespace bfmimo;
using Catch::Approx;

namespace {

// log2 det(I + H D H^H) by plain Gaussian elimination with partial pivoting.
double logdet_oracle(const ComplexMatrix& h, const std::vector<double>& d) {
  const std::size_t n = h.rows();
  std::vector<std::vector<Complex>> a(n, std::vector<Complex>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      a[i][j] = i == j ? 1.0 : 0.0;
      for (std::size_t k = 0; k < d.size(); ++k) a[i][j] += d[k] * h(i, k) * std::conj(h(j, k));
    }
  double log_det = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    std::swap(a[p], a[c]);
    log_det += std::log2(std::abs(a[c][c]));
    for (std::size_t r = c + 1; r < n; ++r) {
      const Complex f = a[r][c] / a[c][c];
      for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
    }
  }
  return log_det;
}

// q-quantile of log2(1 + a1 E1 + a2 E2) for unit exponentials, a1 != a2.
double two_mode_quantile(double a1, double a2, double q) {
  auto cdf = [&](double t) { return 1.0 - (a1 * std::exp(-t / a1) - a2 * std::exp(-t / a2)) / (a1 - a2); };
  double lo = 0.0, hi = 100.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < q ? lo : hi) = mid;
  }
  return std::log2(1.0 + 0.5 * (lo + hi));
}

const std::vector<double> kMiso = {5.2402421, 3.65582532};

}  // namespace

TEST_CASE("iid channel draws") {
  const std::size_t n = 100000;
  double mean_re = 0.0, power = 0.0, cross = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const auto h = sample_h_iid(2, 2, KeyedStream(5, Purpose::kTest, 0, t));
    mean_re += h(0, 0).real();
    power += std::norm(h(1, 0));
    cross += (h(0, 1) * std::conj(h(1, 1))).real();
  }
  const double dn = static_cast<double>(n);
  CHECK(std::abs(mean_re / dn) < 4.0 / std::sqrt(2.0 * dn));
  CHECK(std::abs(power / dn - 1.0) < 4.0 / std::sqrt(dn));
  CHECK(std::abs(cross / dn) < 4.0 / std::sqrt(2.0 * dn));

  // Leading columns do not depend on how many columns are drawn.
  const KeyedStream s(9, Purpose::kTest, 1, 0);
  const auto narrow = sample_h_iid(3, 2, s), wide = sample_h_iid(3, 5, s);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 2; ++k) CHECK(narrow(i, k) == wide(i, k));
}

TEST_CASE("log-det capacity against a direct determinant") {
  for (std::size_t n : {1u, 2u, 4u}) {
    for (std::size_t m : {1u, 3u, 6u}) {
      std::vector<double> nu(m);
      for (std::size_t k = 0; k < m; ++k) nu[k] = 3.0 / (1.0 + k);
      const MimoConfig config{n, nu, 1.7, 0.1};
      for (std::uint64_t t = 0; t < 20; ++t) {
        const auto h = sample_h_iid(n, m, KeyedStream(2, Purpose::kTest, 2, t));
        const auto alloc = sample_simplex(m, KeyedStream(2, Purpose::kTest, 3, t), false);
        std::vector<double> d(m);
        for (std::size_t k = 0; k < m; ++k) d[k] = 1.7 * nu[k] * alloc[k];
        CHECK(logdet_capacity(h, config, alloc) == Approx(logdet_oracle(h, d)).epsilon(1e-12).margin(1e-14));
      }
    }
  }
}

TEST_CASE("log-det capacity special cases") {
  const auto h = sample_h_iid(1, 2, KeyedStream(3, Purpose::kTest, 4, 0));
  const MimoConfig miso{1, {2.0, 1.0}, 0.5, 0.1};
  const PowerAllocation split({0.25, 0.75});
  CHECK(logdet_capacity(h, miso, split) ==
        Approx(std::log2(1.0 + 0.5 * (2.0 * 0.25 * std::norm(h(0, 0)) + 0.75 * std::norm(h(0, 1))))));

  // Unpowered modes drop out exactly.
  const auto h4 = sample_h_iid(4, 3, KeyedStream(3, Purpose::kTest, 4, 1));
  const MimoConfig three{4, {3.0, 2.0, 1.0}, 1.0, 0.1};
  const MimoConfig one{4, {3.0}, 1.0, 0.1};
  ComplexMatrix first(4, 1);
  for (std::size_t i = 0; i < 4; ++i) first(i, 0) = h4(i, 0);
  CHECK(logdet_capacity(h4, three, PowerAllocation::single_mode(3, 0)) ==
        logdet_capacity(first, one, PowerAllocation({1.0})));

  double previous = 0.0;
  for (double rho : {1e-10, 1e-3, 0.1, 1.0, 10.0, 1e3}) {
    MimoConfig c = three;
    c.snr_rho = rho;
    const double v = logdet_capacity(h4, c, PowerAllocation::uniform(3));
    CHECK(v >= previous);
    if (rho == 1e-10) CHECK(v < 1e-8);
    previous = v;
  }

  ComplexMatrix bad = h4;
  bad(1, 1) = Complex(std::nan(""), 0.0);
  CHECK_THROWS_AS(logdet_capacity(bad, three, PowerAllocation::uniform(3)), ValidationError);
  CHECK_THROWS_AS(logdet_capacity(h4, one, PowerAllocation::uniform(1)), ValidationError);
}

TEST_CASE("config and allocation validation") {
  CHECK_THROWS_AS((MimoConfig{1, {1.0, 2.0}, 1.0, 0.1}.validate()), ValidationError);
  CHECK_THROWS_AS((MimoConfig{1, {1.0}, 1.0, 1.0}.validate()), ValidationError);
  CHECK_THROWS_AS((MimoConfig{0, {1.0}, 1.0, 0.1}.validate()), ValidationError);
  CHECK_THROWS_AS(PowerAllocation({0.5, 0.6}), ValidationError);
  CHECK_THROWS_AS(PowerAllocation({1.5, -0.5}), ValidationError);
  CHECK_NOTHROW(PowerAllocation({0.5, 0.5}));
}

TEST_CASE("empirical quantiles") {
  std::vector<double> x(10);
  std::iota(x.begin(), x.end(), 1.0);
  std::reverse(x.begin(), x.end());
  CHECK(lower_quantile(x, 0.1) == 1.0);
  CHECK(lower_quantile(x, 0.5) == 5.0);
  CHECK(lower_quantile(x, 0.11) == 2.0);
  CHECK(lower_quantile_index(1000, 0.1) == 99);
  CHECK(lower_quantile_index(1, 0.5) == 0);
}

TEST_CASE("single-mode quantiles have a closed form") {
  for (std::size_t k = 0; k < 2; ++k) {
    const double exact = std::log2(1.0 + kMiso[k] * -std::log(0.9));
    const MimoConfig config{1, kMiso, 1.0, 0.1};
    const auto dist = capacity_distribution(config, PowerAllocation::single_mode(2, k), 100000, 11);
    CHECK(std::abs(dist.quantile(0.1) - exact) < 4.0 * dist.standard_error(0.1));
  }
  CHECK(std::log2(1.0 + kMiso[0] * -std::log(0.9)) == Approx(0.634).margin(0.001));
  CHECK(std::log2(1.0 + kMiso[1] * -std::log(0.9)) == Approx(0.470).margin(0.001));
}

TEST_CASE("two-mode split against the hypoexponential quantile") {
  const MimoConfig config{1, kMiso, 1.0, 0.1};
  const double exact = two_mode_quantile(0.5 * kMiso[0], 0.5 * kMiso[1], 0.1);
  CHECK(exact == Approx(1.11).margin(0.02));
  const auto dist = capacity_distribution(config, PowerAllocation::uniform(2), 100000, 12);
  CHECK(std::abs(dist.quantile(0.1) - exact) < 4.0 * dist.standard_error(0.1));
}

TEST_CASE("shared-draw scoring is deterministic") {
  const MimoConfig config{3, {4.0, 2.0, 0.5}, 2.0, 0.1};
  const auto alloc = PowerAllocation({0.5, 0.3, 0.2});
  const auto serial = capacity_distribution(config, alloc, 5000, 21, 1);
  const auto threaded = capacity_distribution(config, alloc, 5000, 21, 3);
  CHECK(serial.samples == threaded.samples);

  std::vector<PowerAllocation> allocs = {alloc, PowerAllocation::uniform(3), PowerAllocation::single_mode(3)};
  const auto tails = tail_quantiles(config, allocs, 5000, 21, 0.1, 2);
  for (std::size_t a = 0; a < allocs.size(); ++a) {
    const auto d = capacity_distribution(config, allocs[a], 5000, 21, 1);
    CHECK(tails.quantile[a] == d.quantile(0.1));
    CHECK(tails.standard_error[a] == d.standard_error(0.1));
  }

  const ChannelBatch batch(3, 3, 5000, 21, Purpose::kChannel, 0, 2);
  std::vector<double> scored(5000);
  batch.score(config, alloc, scored);
  CHECK(scored == serial.samples);
}

TEST_CASE("simplex sampling") {
  CHECK(sample_simplex(1, KeyedStream(1, Purpose::kTest, 0, 0), false)[0] == 1.0);
  const std::size_t n = 40000;
  std::vector<double> mean(3, 0.0);
  std::size_t below = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const auto a = sample_simplex(3, KeyedStream(1, Purpose::kTest, 1, t), false);
    CHECK(std::accumulate(a.values().begin(), a.values().end(), 0.0) == Approx(1.0));
    for (std::size_t k = 0; k < 3; ++k) mean[k] += a[k];
    below += a[0] < 0.3 ? 1 : 0;
    CHECK(sample_simplex(3, KeyedStream(1, Purpose::kTest, 1, t), true).is_ordered());
  }
  const double dn = static_cast<double>(n);
  for (double m : mean) CHECK(std::abs(m / dn - 1.0 / 3.0) < 0.005);
  // The first coordinate of a flat Dirichlet(1,1,1) is Beta(1,2).
  const double p = 1.0 - 0.7 * 0.7;
  CHECK(std::abs(below / dn - p) < 4.0 * std::sqrt(p * (1.0 - p) / dn));
}

TEST_CASE("closed-form allocations") {
  const auto eq = equal_output_allocation(std::vector<double>{4.0, 2.0, 1.0}, 2);
  CHECK(eq[0] == Approx(1.0 / 3.0));
  CHECK(eq[1] == Approx(2.0 / 3.0));
  CHECK(eq[2] == 0.0);
  CHECK(equal_output_allocation(std::vector<double>{4.0, 2.0, 1.0}, 1) == PowerAllocation::single_mode(3, 0));
  CHECK_THROWS_AS(equal_output_allocation(std::vector<double>{1.0}, 2), ValidationError);

  CHECK(equalization_penalty_db(std::vector<double>{2.0, 2.0, 2.0}) == 0.0);
  CHECK(equalization_penalty_db(std::vector<double>{4.0, 1.0}) == Approx(10.0 * std::log10(1.5625)));

  const auto lo = low_outage_allocation({{1, 0}});
  CHECK(lo[0] == Approx(2.0 / 3.0));
  CHECK(lo[1] == Approx(1.0 / 3.0));
  CHECK(low_outage_allocation({{0, 0, 0, 0}}) == PowerAllocation::uniform(4));
  CHECK_THROWS_AS(low_outage_allocation({{-1}}), ValidationError);
}

TEST_CASE("low-outage leading term") {
  CHECK(low_outage_cdf_leading_term(std::vector<double>{2.0}, PowerAllocation::uniform(1), 0.01) == Approx(0.005));
  const std::vector<double> nu = {3.0, 2.0, 1.0};
  const double uniform = low_outage_cdf_leading_term(nu, PowerAllocation::uniform(3), 0.01);
  CHECK(uniform == Approx(1e-6 / (6.0 * 6.0 / 27.0)));
  for (std::uint64_t t = 0; t < 200; ++t) {
    const auto a = sample_simplex(3, KeyedStream(8, Purpose::kTest, 5, t), false);
    CHECK(low_outage_cdf_leading_term(nu, a, 0.01) >= uniform * (1.0 - 1e-12));
  }
  // Fewer powered modes decay more slowly.
  CHECK(low_outage_cdf_leading_term(nu, PowerAllocation::single_mode(3), 0.01) > uniform);
}

TEST_CASE("uniform allocation wins deep in the tail") {
  const MimoConfig config{1, {2.0, 1.5, 1.0}, 1.0, 1e-3};
  std::vector<PowerAllocation> allocs = {PowerAllocation::uniform(3)};
  for (std::uint64_t a = 0; a < 20; ++a) allocs.push_back(sample_simplex(3, KeyedStream(3, Purpose::kTest, 6, a), false));
  const auto tails = tail_quantiles(config, allocs, 1000000, 41, config.outage_q);
  for (std::size_t a = 1; a < allocs.size(); ++a)
    CHECK(tails.quantile[0] + 3.0 * std::hypot(tails.standard_error[0], tails.standard_error[a]) >= tails.quantile[a]);
}

TEST_CASE("two-mode grid envelope") {
  MisoEnvelopeOptions opt;
  opt.trials = 20000;
  opt.gradation = 0.05;
  opt.cdf_levels = 50;
  SECTION("envelope dominates every candidate") {
    const auto env = miso_grid_envelope({1, kMiso, 1.0, 0.1}, opt);
    REQUIRE(env.splits.size() == 21);
    CHECK(env.splits.front() == 1.0);
    CHECK(env.splits.back() == 0.0);
    for (std::size_t j = 0; j < env.levels.size(); ++j)
      for (const auto& f : env.family) CHECK(env.envelope[j] >= f[j]);
    CHECK(env.best_quantile == *std::max_element(env.quantiles.begin(), env.quantiles.end()));
    CHECK(env.splits[env.best_index] > 0.3);
    CHECK(env.splits[env.best_index] < 0.8);
  }
  SECTION("equal modes pick the even split") {
    opt.symmetrize = true;
    const auto env = miso_grid_envelope({1, {2.0, 2.0}, 1.0, 0.1}, opt);
    for (std::size_t i = 0; i < env.splits.size(); ++i)
      CHECK(env.quantiles[i] == Approx(env.quantiles[env.splits.size() - 1 - i]).epsilon(1e-12));
    CHECK(std::abs(env.splits[env.best_index] - 0.5) <= 0.1 + 1e-12);
  }
  SECTION("unit gradation compares the two single-mode beams") {
    opt.gradation = 1.0;
    const auto env = miso_grid_envelope({1, kMiso, 1.0, 0.1}, opt);
    REQUIRE(env.splits.size() == 2);
    CHECK(env.best_index == 0);
  }
  CHECK_THROWS_AS(miso_grid_envelope({1, {3.0, 2.0, 1.0}, 1.0, 0.1}, opt), ValidationError);
}

TEST_CASE("random search over the ordered polytope") {
  SearchOptions opt;
  opt.candidates = 200;
  opt.trials = 2000;
  opt.heldout_trials = 20000;
  SECTION("one mode is trivial") {
    const auto r = polytope_envelope_search({4, {3.0}, 1.0, 0.1}, opt);
    CHECK(r.best == PowerAllocation::uniform(1));
  }
  SECTION("never worse than beamforming on held-out draws") {
    const MimoConfig config{4, {6.0, 4.0, 2.5, 1.0}, 1.0, 0.1};
    const auto r = polytope_envelope_search(config, opt);
    const auto bf = capacity_distribution(config, PowerAllocation::single_mode(4), opt.heldout_trials, opt.seed, 1,
                                          Purpose::kHeldOutChannel, 0);
    CHECK(r.quantile >= bf.quantile(0.1));
    CHECK(r.best.is_ordered());
    CHECK_FALSE(r.trace.empty());
  }
  SECTION("two modes agree with the grid") {
    const MimoConfig config{1, kMiso, 1.0, 0.1};
    const auto r = polytope_envelope_search(config, opt);
    double exact = 0.0;
    for (int i = 1; i < 100; ++i) {
      const double l = 0.01 * i;
      exact = std::max(exact, two_mode_quantile(l * kMiso[0], (1.0 - l) * kMiso[1], 0.1));
    }
    MisoEnvelopeOptions g;
    g.trials = 20000;
    g.gradation = 0.02;
    const auto env = miso_grid_envelope(config, g);
    CHECK(r.quantile == Approx(exact).margin(0.03));
    CHECK(env.best_quantile == Approx(exact).margin(0.04));
    CHECK(r.best[0] == Approx(env.splits[env.best_index]).margin(0.15));
  }
}

TEST_CASE("equal-output truncation") {
  const MimoConfig config{4, {6.0, 4.0, 2.5, 1.0}, 1.0, 0.1};
  const auto t = equal_output_truncation(config, 5000, 3);
  REQUIRE(t.quantiles.size() == 4);
  CHECK(t.quantiles[t.best_active - 1] == *std::max_element(t.quantiles.begin(), t.quantiles.end()));
  CHECK(t.best == equal_output_allocation(config.mode_strengths, t.best_active));
}
