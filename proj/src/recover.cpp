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

#include "psm/recover.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "psm/detect.hpp"
#include "psm/error.hpp"

namespace psm::recover {

std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::kML:
      return "ml";
    case Estimator::kPeel:
      return "peel";
    case Estimator::kModifiedPeel:
      return "modified_peel";
  }
  return "unknown";
}

std::optional<Estimator> parse_estimator(std::string_view s) {
  if (s == "ml") return Estimator::kML;
  if (s == "peel") return Estimator::kPeel;
  if (s == "modified_peel") return Estimator::kModifiedPeel;
  return std::nullopt;
}

ModelConfig estimate_config(int n, int k, int m) {
  ModelConfig config;
  config.n = n;
  config.k = k;
  config.m = m;
  config.variant = Variant::kConsecutive;
  config.placement = Placement::kUniform;
  config.boundary = Boundary::kLinear;
  return config;
}

namespace {

// Sums of every k x k window, indexed row-major by corner.
std::vector<double> window_sums(const Observation& x, int k) {
  const detect::PrefixSumTable table(x);
  const int positions = x.n() - k + 1;
  std::vector<double> sums(static_cast<std::size_t>(positions) * positions);
  for (int r = 0; r < positions; ++r)
    for (int c = 0; c < positions; ++c)
      sums[static_cast<std::size_t>(r) * positions + c] = table.window_sum(r, c, k, k);
  return sums;
}

void check_args(const Observation& x, int k, int m) {
  ModelConfig config = estimate_config(x.n(), k, m);
  config.validate();
}

SupportSet from_corners(const std::vector<std::pair<int, int>>& corners, int n,
                        int k, int m) {
  std::vector<Rectangle> rects;
  rects.reserve(corners.size());
  for (auto [r, c] : corners) rects.push_back(Rectangle::Window(r, c, k, n));
  return SupportSet(std::move(rects), estimate_config(n, k, m));
}

}  // namespace

SupportSet ml_exhaustive(const Observation& x, int k, int m,
                         std::uint64_t max_tuples) {
  check_args(x, k, m);
  const int n = x.n();
  const int positions = n - k + 1;
  const double candidates = std::pow(static_cast<double>(positions), 2.0 * m);
  if (candidates > static_cast<double>(max_tuples)) {
    std::ostringstream os;
    os << "ML search space (n-k+1)^(2m) = " << candidates << " exceeds budget "
       << max_tuples;
    Fail(ErrorCode::kBudget, os.str());
  }
  const std::vector<double> sums = window_sums(x, k);
  const int windows = static_cast<int>(sums.size());
  auto disjoint = [&](int a, int b) {
    const int ra = a / positions, ca = a % positions;
    const int rb = b / positions, cb = b % positions;
    return std::abs(ra - rb) >= k || std::abs(ca - cb) >= k;
  };

  // Depth-first over increasing window indices, i.e. sorted corner lists in
  // lexicographic order; strict improvement keeps the first maximizer.
  std::vector<int> chosen(m), best_tuple;
  double best = -std::numeric_limits<double>::infinity();
  auto search = [&](auto&& self, int depth, int first, double partial) -> void {
    if (depth == m) {
      if (partial > best) {
        best = partial;
        best_tuple = chosen;
      }
      return;
    }
    for (int w = first; w <= windows - (m - depth); ++w) {
      bool ok = true;
      for (int i = 0; i < depth && ok; ++i) ok = disjoint(chosen[i], w);
      if (!ok) continue;
      chosen[depth] = w;
      self(self, depth + 1, w + 1, partial + sums[w]);
    }
  };
  search(search, 0, 0, 0.0);
  if (best_tuple.empty())
    Fail(ErrorCode::kConfig, "no product-disjoint m-tuple of windows exists");
  std::vector<std::pair<int, int>> corners;
  for (int w : best_tuple) corners.emplace_back(w / positions, w % positions);
  return from_corners(corners, n, k, m);
}

SupportSet peel(const Observation& x, int k, int m) {
  check_args(x, k, m);
  const int n = x.n();
  const int positions = n - k + 1;
  const std::vector<double> sums = window_sums(x, k);
  std::vector<double> blocked(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<std::pair<int, int>> corners;
  for (int step = 0; step < m; ++step) {
    // Window exclusion test via a summed-area table over the blocked cells.
    const detect::PrefixSumTable mask(Observation(n, blocked));
    double best = -std::numeric_limits<double>::infinity();
    int best_index = -1;
    for (int w = 0; w < static_cast<int>(sums.size()); ++w) {
      const int r = w / positions, c = w % positions;
      if (mask.window_sum(r, c, k, k) != 0.0) continue;
      if (sums[w] > best) {
        best = sums[w];
        best_index = w;
      }
    }
    if (best_index < 0)
      Fail(ErrorCode::kConfig, "peeling ran out of windows disjoint from earlier picks");
    const int r0 = best_index / positions, c0 = best_index % positions;
    corners.emplace_back(r0, c0);
    for (int r = r0; r < r0 + k; ++r)
      for (int c = c0; c < c0 + k; ++c) blocked[static_cast<std::size_t>(r) * n + c] = 1.0;
  }
  return from_corners(corners, n, k, m);
}

namespace {

// Decomposes a 0/1 cell indicator into m disjoint k x k blocks by repeatedly
// anchoring a block at the first set cell in row-major order. The first set
// cell of any disjoint union of equal squares is a top-left corner, so this
// succeeds exactly when such a decomposition exists.
std::optional<std::vector<std::pair<int, int>>> decode_blocks(
    std::vector<std::uint8_t> cells, int n, int k, int m) {
  std::vector<std::pair<int, int>> corners;
  std::size_t cursor = 0;
  while (true) {
    while (cursor < cells.size() && !cells[cursor]) ++cursor;
    if (cursor == cells.size()) break;
    if (static_cast<int>(corners.size()) == m) return std::nullopt;
    const int r0 = static_cast<int>(cursor / n);
    const int c0 = static_cast<int>(cursor % n);
    if (r0 + k > n || c0 + k > n) return std::nullopt;
    for (int r = r0; r < r0 + k; ++r) {
      for (int c = c0; c < c0 + k; ++c) {
        auto& cell = cells[static_cast<std::size_t>(r) * n + c];
        if (!cell) return std::nullopt;
        cell = 0;
      }
    }
    corners.emplace_back(r0, c0);
  }
  if (static_cast<int>(corners.size()) != m) return std::nullopt;
  return corners;
}

}  // namespace

RecoveryResult modified_peel(const Observation& x, int k, int m) {
  check_args(x, k, m);
  const int n = x.n();
  const int positions = n - k + 1;
  const std::vector<double> sums = window_sums(x, k);
  std::vector<int> order(sums.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return sums[a] > sums[b]; });

  const std::int64_t target = static_cast<std::int64_t>(m) * k * k;
  std::vector<std::uint8_t> covered(static_cast<std::size_t>(n) * n, 0);
  std::int64_t count = 0;
  int steps = 0;
  for (int w : order) {
    ++steps;
    const int r0 = w / positions, c0 = w % positions;
    for (int r = r0; r < r0 + k; ++r) {
      for (int c = c0; c < c0 + k; ++c) {
        auto& cell = covered[static_cast<std::size_t>(r) * n + c];
        if (!cell) {
          cell = 1;
          ++count;
        }
      }
    }
    if (count == target) {
      if (auto corners = decode_blocks(covered, n, k, m)) {
        return RecoveryResult{from_corners(*corners, n, k, m), steps, {}, {}, false};
      }
    } else if (count > target) {
      // The union only grows, so no later prefix can decode.
      break;
    }
  }
  return RecoveryResult{peel(x, k, m), steps, {}, {}, true};
}

bool exact_match(const SupportSet& estimate, const SupportSet& truth) {
  if (estimate.n() != truth.n()) return false;
  const std::int64_t cells = truth.cell_count();
  return estimate.cell_count() == cells && overlap(estimate, truth) == cells;
}

double overlap_fraction(const SupportSet& estimate, const SupportSet& truth) {
  const ModelConfig& config = truth.config();
  const double planted = static_cast<double>(config.m) * config.k * config.k;
  return static_cast<double>(overlap(estimate, truth)) / planted;
}

RecoveryResult estimate_support(Estimator estimator, const Observation& x,
                                int k, int m, std::uint64_t max_tuples) {
  switch (estimator) {
    case Estimator::kML:
      return RecoveryResult{ml_exhaustive(x, k, m, max_tuples), 1, {}, {}, false};
    case Estimator::kPeel:
      return RecoveryResult{peel(x, k, m), m, {}, {}, false};
    case Estimator::kModifiedPeel:
      return modified_peel(x, k, m);
  }
  Fail(ErrorCode::kInternal, "unknown estimator");
}

RecoveryResult recovery_trial(const ModelConfig& config, Estimator estimator,
                              RandomStream& rng, std::uint64_t max_tuples) {
  config.validate();
  if (config.variant != Variant::kConsecutive || config.boundary != Boundary::kLinear)
    Fail(ErrorCode::kConfig, "recovery requires the consecutive variant with linear boundary");
  const SupportSet truth = sample_support(config, rng);
  const Observation x = sample_observation(truth, config.lambda, rng);
  RecoveryResult result = estimate_support(estimator, x, config.k, config.m, max_tuples);
  result.exact = exact_match(result.estimate, truth);
  result.overlap_cells = overlap(result.estimate, truth);
  return result;
}

nlohmann::json to_json(const RecoveryResult& result, Estimator estimator) {
  nlohmann::json corners = nlohmann::json::array();
  for (const Rectangle& rect : result.estimate.rectangles())
    corners.push_back({rect.rows.start(), rect.cols.start()});
  nlohmann::json j = {
      {"estimator", std::string(to_string(estimator))},
      {"corners", corners},
      {"steps", result.steps},
      {"exact", nullptr},
      {"overlap_cells", nullptr},
  };
  if (result.exact) j["exact"] = *result.exact ? 1 : 0;
  if (result.overlap_cells) j["overlap_cells"] = *result.overlap_cells;
  if (result.fallback) j["fallback"] = true;
  return j;
}

}  // namespace psm::recover
