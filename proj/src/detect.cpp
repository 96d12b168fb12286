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

#include "psm/detect.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "psm/error.hpp"
#include "psm/numeric.hpp"

namespace psm::detect {

PrefixSumTable::PrefixSumTable(const Observation& x)
    : n_(x.n()), table_(static_cast<std::size_t>(x.n() + 1) * (x.n() + 1), 0.0) {
  const auto data = x.data();
  const std::size_t stride = n_ + 1;
  for (int r = 0; r < n_; ++r) {
    double row_sum = 0.0;
    for (int c = 0; c < n_; ++c) {
      row_sum += data[static_cast<std::size_t>(r) * n_ + c];
      table_[(r + 1) * stride + (c + 1)] = table_[r * stride + (c + 1)] + row_sum;
    }
  }
}

double sum_statistic(const Observation& x) {
  const auto data = x.data();
  return std::accumulate(data.begin(), data.end(), 0.0);
}

namespace {

void check_window(int n, int k) {
  if (k < 1 || k > n) Fail(ErrorCode::kConfig, "scan requires 1 <= k <= n");
}

}  // namespace

WindowMax scan_statistic_consecutive(const PrefixSumTable& table, int k) {
  const int n = table.n();
  check_window(n, k);
  const int positions = n - k + 1;
  WindowMax best{-std::numeric_limits<double>::infinity(), 0, 0};
  for (int r = 0; r < positions; ++r) {
    for (int c = 0; c < positions; ++c) {
      const double s = table.window_sum(r, c, k, k);
      if (s > best.value) best = WindowMax{s, r, c};
    }
  }
  return best;
}

WindowMax scan_statistic_consecutive(const Observation& x, int k) {
  return scan_statistic_consecutive(PrefixSumTable(x), k);
}

double scan_statistic_arbitrary(const Observation& x, int k,
                                std::uint64_t max_subsets) {
  const int n = x.n();
  check_window(n, k);
  const double subsets = binomial(n, k);
  if (subsets > static_cast<double>(max_subsets)) {
    std::ostringstream os;
    os << "arbitrary scan needs C(" << n << "," << k << ") = " << subsets
       << " row subsets, budget is " << max_subsets;
    Fail(ErrorCode::kBudget, os.str());
  }
  const auto data = x.data();
  // column_sums[d] holds the column sums of the first d chosen rows.
  std::vector<std::vector<double>> column_sums(k + 1, std::vector<double>(n, 0.0));
  std::vector<double> scratch(n);
  double best = -std::numeric_limits<double>::infinity();

  std::function<void(int, int)> extend = [&](int depth, int first_row) {
    if (depth == k) {
      scratch = column_sums[k];
      std::nth_element(scratch.begin(), scratch.begin() + (k - 1), scratch.end(),
                       std::greater<>());
      const double value = std::accumulate(scratch.begin(), scratch.begin() + k, 0.0);
      best = std::max(best, value);
      return;
    }
    // Leave room for the remaining k - depth - 1 rows.
    for (int row = first_row; row <= n - (k - depth); ++row) {
      const double* src = &data[static_cast<std::size_t>(row) * n];
      const auto& parent = column_sums[depth];
      auto& child = column_sums[depth + 1];
      for (int c = 0; c < n; ++c) child[c] = parent[c] + src[c];
      extend(depth + 1, row + 1);
    }
  };
  extend(0, 0);
  return best;
}

double tau_sum(const ModelConfig& config) {
  if (!(config.lambda > 0.0) || !std::isfinite(config.lambda))
    Fail(ErrorCode::kConfig, "tau_sum requires lambda > 0");
  return static_cast<double>(config.m) * config.k * config.k * config.lambda / 2.0;
}

namespace {

void check_threshold_args(int n, int k, double delta) {
  if (n < 1 || k < 1 || k > n)
    Fail(ErrorCode::kConfig, "threshold requires 1 <= k <= n");
  if (!(delta >= 0.0) || !std::isfinite(delta))
    Fail(ErrorCode::kConfig, "delta must be finite and nonnegative");
}

}  // namespace

double tau_scan_sd(int n, int k, double delta) {
  check_threshold_args(n, k, delta);
  const double kk = static_cast<double>(k);
  return std::sqrt((4.0 + delta) * kk * kk * log_binomial(n, k));
}

double tau_scan_csd(int n, int k, double delta) {
  check_threshold_args(n, k, delta);
  const double kk = static_cast<double>(k);
  return std::sqrt((4.0 + delta) * kk * kk * std::log(static_cast<double>(n)));
}

std::string_view to_string(TestKind kind) {
  switch (kind) {
    case TestKind::kSum:
      return "sum";
    case TestKind::kScanSD:
      return "scan_sd";
    case TestKind::kScanCSD:
      return "scan_csd";
  }
  return "unknown";
}

namespace {

DetectionOutcome decide(double statistic, double threshold) {
  return DetectionOutcome{statistic, threshold, statistic >= threshold, std::nullopt};
}

}  // namespace

DetectionOutcome test_sum(const Observation& x, const ModelConfig& config) {
  return decide(sum_statistic(x), tau_sum(config));
}

DetectionOutcome test_scan_csd(const Observation& x, const ModelConfig& config,
                               double delta) {
  const double threshold = tau_scan_csd(x.n(), config.k, delta);
  const WindowMax best = scan_statistic_consecutive(x, config.k);
  DetectionOutcome outcome = decide(best.value, threshold);
  outcome.argmax_window = best;
  return outcome;
}

DetectionOutcome test_scan_sd(const Observation& x, const ModelConfig& config,
                              double delta, std::uint64_t max_subsets) {
  const double threshold = tau_scan_sd(x.n(), config.k, delta);
  return decide(scan_statistic_arbitrary(x, config.k, max_subsets), threshold);
}

DetectionOutcome run_test(TestKind kind, const Observation& x,
                          const ModelConfig& config, double delta,
                          std::uint64_t max_subsets) {
  switch (kind) {
    case TestKind::kSum:
      return test_sum(x, config);
    case TestKind::kScanSD:
      return test_scan_sd(x, config, delta, max_subsets);
    case TestKind::kScanCSD:
      return test_scan_csd(x, config, delta);
  }
  Fail(ErrorCode::kInternal, "unknown test kind");
}

nlohmann::json to_json(const DetectionOutcome& outcome, TestKind kind) {
  nlohmann::json j = {
      {"test", std::string(to_string(kind))},
      {"statistic", outcome.statistic},
      {"threshold", outcome.threshold},
      {"decision", outcome.decision ? 1 : 0},
  };
  if (outcome.argmax_window)
    j["corner"] = {outcome.argmax_window->row, outcome.argmax_window->col};
  return j;
}

}  // namespace psm::detect
