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
#include "psm/recover.hpp"

using namespace psm;
using namespace psm::recover;

namespace {

SupportSet Windows(std::vector<std::pair<int, int>> corners, int n, int k) {
  std::vector<Rectangle> rects;
  for (auto [r, c] : corners) rects.push_back(Rectangle::Window(r, c, k, n));
  return SupportSet(rects, estimate_config(n, k, static_cast<int>(corners.size())));
}

ModelConfig Config(int n, int k, int m, double lambda,
                   Placement placement = Placement::kUniform) {
  ModelConfig c = estimate_config(n, k, m);
  c.lambda = lambda;
  c.placement = placement;
  return c;
}

std::pair<int, int> Corner(const SupportSet& s, int i) {
  return {s.rectangles()[i].rows.start(), s.rectangles()[i].cols.start()};
}

}  // namespace

TEST_CASE("estimator names") {
  for (auto e : {Estimator::kML, Estimator::kPeel, Estimator::kModifiedPeel})
    CHECK(parse_estimator(to_string(e)) == e);
}

TEST_CASE("m = 1 estimators equal the scan argmax") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    RandomStream rng(seed);
    const int n = 5 + static_cast<int>(rng.uniform_index(12));
    const int k = 1 + static_cast<int>(rng.uniform_index(n));
    const Observation x = sample_null(n, rng);
    const auto w = detect::scan_statistic_consecutive(x, k);
    const std::pair<int, int> corner{w.row, w.col};
    CHECK(Corner(ml_exhaustive(x, k, 1), 0) == corner);
    CHECK(Corner(peel(x, k, 1), 0) == corner);
    const RecoveryResult mp = modified_peel(x, k, 1);
    CHECK(Corner(mp.estimate, 0) == corner);
    CHECK(mp.steps == 1);
    CHECK_FALSE(mp.fallback);
  }
}

TEST_CASE("ml agrees with brute force at n=8 k=2 m=2") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    RandomStream rng(seed);
    const Observation x = sample_null(8, rng);
    const auto want = oracle::ml(x, 2, 2);
    CHECK(cell_mask(ml_exhaustive(x, 2, 2)).bits == want.mask);
  }
}

TEST_CASE("ml recovers high-signal supports") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RandomStream rng(seed);
    const int n = 6 + static_cast<int>(rng.uniform_index(10));
    const int k = 1 + static_cast<int>(rng.uniform_index(std::min(5, n / 2)));
    const int m = 1 + static_cast<int>(rng.uniform_index(2));
    const RecoveryResult r = recovery_trial(Config(n, k, m, 100.0), Estimator::kML, rng);
    CHECK(r.exact == true);
  }
}

TEST_CASE("ml budget and infeasible tuples") {
  RandomStream rng(1);
  const Observation x = sample_null(30, rng);
  try {
    ml_exhaustive(x, 2, 2, 1000);
    FAIL("expected a budget error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBudget);
  }
  const Observation small = sample_null(3, rng);
  CHECK_THROWS_AS(ml_exhaustive(small, 2, 2), Error);
}

TEST_CASE("peel output is valid at lambda = 0") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RandomStream rng(seed);
    const Observation x = sample_null(30, rng);
    const SupportSet s = peel(x, 4, 3);
    CHECK(validate_support(s.rectangles(), estimate_config(30, 4, 3)).ok);
  }
}

TEST_CASE("peel runs out of windows") {
  RandomStream rng(2);
  // Three 2x2 windows in a 4x4 grid: the first pick can block the rest.
  int errors = 0;
  for (int t = 0; t < 50; ++t) {
    const Observation x = sample_null(4, rng);
    try {
      peel(x, 2, 3);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kConfig);
      ++errors;
    }
  }
  CHECK(errors > 0);
}

TEST_CASE("modified peel equals peel on separated high-signal instances") {
  const ModelConfig c = Config(60, 5, 3, 20.0, Placement::kSeparated);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RandomStream rng(seed);
    const SupportSet truth = sample_support(c, rng);
    const Observation x = sample_observation(truth, c.lambda, rng);
    const SupportSet a = peel(x, 5, 3);
    const RecoveryResult b = modified_peel(x, 5, 3);
    CHECK(cell_mask(a).bits == cell_mask(b.estimate).bits);
    CHECK(exact_match(b.estimate, truth));
  }
}

TEST_CASE("modified peel separates adjacent blocks") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SupportSet truth = Windows({{10, 10}, {14, 10}}, 40, 4);
    RandomStream rng(seed);
    const Observation x = sample_observation(truth, 100.0, rng);
    const RecoveryResult r = modified_peel(x, 4, 2);
    CHECK(exact_match(r.estimate, truth));
    CHECK_FALSE(r.fallback);
  }
}

TEST_CASE("modified peel output is valid at lambda = 0") {
  int fallbacks = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    RandomStream rng(seed);
    const Observation x = sample_null(40, rng);
    const RecoveryResult r = modified_peel(x, 4, 2);
    CHECK(validate_support(r.estimate.rectangles(), estimate_config(40, 4, 2)).ok);
    fallbacks += r.fallback;
  }
  MESSAGE("fallbacks at lambda = 0: " << fallbacks << "/200");
}

TEST_CASE("exact match and overlap fraction") {
  const SupportSet k = Windows({{0, 0}, {5, 5}}, 12, 4);
  const SupportSet reversed = Windows({{5, 5}, {0, 0}}, 12, 4);
  const SupportSet shifted = Windows({{0, 1}, {5, 5}}, 12, 4);
  CHECK(exact_match(k, k));
  CHECK(exact_match(reversed, k));
  CHECK_FALSE(exact_match(shifted, k));
  CHECK(overlap_fraction(k, k) == 1.0);
  CHECK(overlap_fraction(Windows({{0, 8}, {8, 0}}, 12, 4), k) == 0.0);
  const SupportSet one = Windows({{2, 2}}, 12, 4);
  CHECK(overlap_fraction(Windows({{2, 4}}, 12, 4), one) == 0.5);
}

TEST_CASE("recovery_trial at high signal is exact for every estimator") {
  for (auto e : {Estimator::kML, Estimator::kPeel, Estimator::kModifiedPeel})
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      RandomStream rng(seed);
      const auto r = recovery_trial(Config(12, 3, 2, 100.0), e, rng);
      CHECK(r.exact == true);
      CHECK(r.overlap_cells == 18);
    }
}

TEST_CASE("recovery_trial at lambda = 0 has chance-level overlap") {
  constexpr int n = 30, k = 4;
  double total = 0.0;
  constexpr int kTrials = 10000;
  for (int t = 0; t < kTrials; ++t) {
    RandomStream rng(static_cast<std::uint64_t>(t));
    const auto r = recovery_trial(Config(n, k, 1, 0.0), Estimator::kPeel, rng);
    total += static_cast<double>(*r.overlap_cells) / (k * k);
  }
  const double bound = 5.0 * k * k / ((n - k + 1.0) * (n - k + 1.0));
  CHECK(total / kTrials <= bound);
}

TEST_CASE("recovery_trial rejects unsupported configurations") {
  RandomStream rng(1);
  ModelConfig c = Config(10, 2, 1, 1.0);
  c.variant = Variant::kArbitrary;
  CHECK_THROWS_AS(recovery_trial(c, Estimator::kPeel, rng), Error);
  c = Config(10, 2, 1, 1.0);
  c.boundary = Boundary::kCyclic;
  CHECK_THROWS_AS(recovery_trial(c, Estimator::kPeel, rng), Error);
}

TEST_CASE("recovery JSON shape") {
  RandomStream rng(1);
  const auto r = recovery_trial(Config(12, 3, 2, 100.0), Estimator::kModifiedPeel, rng);
  const auto j = to_json(r, Estimator::kModifiedPeel);
  CHECK(j.at("estimator") == "modified_peel");
  CHECK(j.at("corners").size() == 2);
  CHECK(j.at("overlap_cells") == 18);
}
