// Copyright 2026 The psm Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "psm/detect.hpp"
#include "psm/error.hpp"
#include "psm/numeric.hpp"

using namespace psm;

namespace {

Observation Matrix(int n, std::vector<double> v) { return Observation(n, std::move(v)); }

ModelConfig Config(int n, int k, int m, double lambda) {
  ModelConfig c;
  c.n = n;
  c.k = k;
  c.m = m;
  c.lambda = lambda;
  return c;
}

}  // namespace

TEST_CASE("sum statistic") {
  CHECK(detect::sum_statistic(Matrix(2, {1, 2, 3, 4})) == 10);
  CHECK(detect::sum_statistic(Matrix(3, std::vector<double>(9, 0.0))) == 0);
}

TEST_CASE("tau_sum examples") {
  CHECK(detect::tau_sum(Config(10, 3, 2, 1.0)) == 9);
  CHECK(detect::tau_sum(Config(10, 1, 1, 2.0)) == 1);
  CHECK_THROWS_AS(detect::tau_sum(Config(10, 1, 1, 0.0)), Error);
}

TEST_CASE("scan on the corner block") {
  const auto w = detect::scan_statistic_consecutive(Matrix(3, {1, 1, 0, 1, 1, 0, 0, 0, 0}), 2);
  CHECK(w.value == 4);
  CHECK(w.row == 0);
  CHECK(w.col == 0);
}

TEST_CASE("scan on a constant matrix ties to the first corner") {
  // Dyadic constant keeps every window sum exact.
  const auto w = detect::scan_statistic_consecutive(Matrix(5, std::vector<double>(25, 0.75)), 3);
  CHECK(w.value == 0.75 * 9);
  CHECK(w.row == 0);
  CHECK(w.col == 0);
}

TEST_CASE("prefix table window sums match direct sums") {
  RandomStream rng(1);
  const Observation x = sample_null(9, rng);
  const detect::PrefixSumTable t(x);
  for (int r = 0; r < 9; ++r)
    for (int c = 0; c < 9; ++c)
      for (int h = 0; r + h <= 9; ++h)
        for (int w = 0; c + w <= 9; ++w)
          CHECK(t.window_sum(r, c, h, w) ==
                doctest::Approx(oracle::window_sum(x, r, c, h, w)).epsilon(1e-12));
}

TEST_CASE("scan matches the naive oracle on random matrices") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    RandomStream rng(seed);
    const int n = 4 + static_cast<int>(rng.uniform_index(29));
    const int k = 1 + static_cast<int>(rng.uniform_index(n));
    const Observation x = sample_null(n, rng);
    const auto got = detect::scan_statistic_consecutive(x, k);
    const auto want = oracle::scan(x, k);
    CHECK(std::abs(got.value - want.value) <= 1e-9 * std::max(1.0, std::abs(want.value)));
    CHECK(got.row == want.row);
    CHECK(got.col == want.col);
  }
}

TEST_CASE("arbitrary scan special cases") {
  RandomStream rng(3);
  const Observation x = sample_null(6, rng);
  double total = 0.0, top = -INFINITY;
  for (double v : x.data()) {
    total += v;
    top = std::max(top, v);
  }
  CHECK(detect::scan_statistic_arbitrary(x, 6) == doctest::Approx(total).epsilon(1e-12));
  CHECK(detect::scan_statistic_arbitrary(x, 1) == top);
}

TEST_CASE("arbitrary scan matches double enumeration for n <= 8") {
  for (int n = 1; n <= 8; ++n)
    for (int k = 1; k <= n; ++k) {
      RandomStream rng(static_cast<std::uint64_t>(n * 100 + k));
      const Observation x = sample_null(n, rng);
      const double want = oracle::scan_arbitrary(x, k);
      CHECK(detect::scan_statistic_arbitrary(x, k) ==
            doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("arbitrary scan budget") {
  RandomStream rng(3);
  const Observation x = sample_null(30, rng);
  try {
    detect::scan_statistic_arbitrary(x, 15, 1000);
    FAIL("expected a budget error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBudget);
  }
}

TEST_CASE("log binomial against exact big integers") {
  for (int n : {1, 2, 10, 50, 200, 1000, 5000})
    for (int k : {0, 1, 2, n / 3, n / 2, n - 1, n}) {
      if (k < 0 || k > n) continue;
      const double want = oracle::log_binomial(n, k);
      CHECK(log_binomial(n, k) == doctest::Approx(want).epsilon(1e-12).scale(1e-300));
    }
}

TEST_CASE("scan thresholds") {
  CHECK(detect::tau_scan_csd(10, 2, 0.0) == doctest::Approx(4 * std::sqrt(std::log(10.0))));
  CHECK(detect::tau_scan_csd(10, 2, 0.0) == doctest::Approx(6.070).epsilon(1e-3));
  CHECK(detect::tau_scan_sd(7, 7, 0.5) == 0);
  for (int n = 4; n <= 200; n += 7)
    for (int k = 2; k <= n / 2; ++k) {
      const double sd = detect::tau_scan_sd(n, k, 0.5);
      CHECK(sd >= detect::tau_scan_csd(n, k, 0.5));
      const double want = std::sqrt(4.5 * k * k * oracle::log_binomial(n, k));
      CHECK(std::abs(sd - want) <= 1e-12 * want);
    }
  CHECK_THROWS_AS(detect::tau_scan_csd(10, 11, 0.5), Error);
  CHECK_THROWS_AS(detect::tau_scan_csd(10, 2, -0.1), Error);
}

TEST_CASE("decision is statistic >= threshold") {
  RandomStream rng(5);
  ModelConfig c = Config(20, 4, 1, 0.5);
  for (int t = 0; t < 50; ++t) {
    const Observation x = sample_null(20, rng);
    for (auto kind : {detect::TestKind::kSum, detect::TestKind::kScanCSD,
                      detect::TestKind::kScanSD}) {
      const auto out = detect::run_test(kind, x, c, 0.5);
      CHECK(out.decision == (out.statistic >= out.threshold));
      CHECK(out.argmax_window.has_value() == (kind == detect::TestKind::kScanCSD));
    }
  }
}

TEST_CASE("detection JSON shape") {
  RandomStream rng(5);
  const Observation x = sample_null(10, rng);
  const auto out = detect::test_scan_csd(x, Config(10, 3, 1, 1.0), 0.5);
  const auto j = detect::to_json(out, detect::TestKind::kScanCSD);
  CHECK(j.at("test") == "scan_csd");
  CHECK(j.at("corner").size() == 2);
  CHECK(j.at("decision").get<int>() == static_cast<int>(out.decision));
}
