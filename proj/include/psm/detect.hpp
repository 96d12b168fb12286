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

// Detection statistics, thresholds and tests.
//
//   sum      T = sum_ij X_ij                     tau = m k^2 lambda / 2
//   scan SD  T = max over k-subsets S, T of the  tau = sqrt((4+delta) k^2
//            sum of X on S x T                           * log C(n,k))
//   scan CSD T = max over k x k windows          tau = sqrt((4+delta) k^2
//                                                        * log n)
//
// Each test rejects the null (decision = 1) iff T >= tau.

#ifndef PSM_DETECT_HPP_
#define PSM_DETECT_HPP_

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "psm/model.hpp"

namespace psm::detect {

// Summed-area table with a zero guard row and column:
// at(i, j) = sum of X[a][b] over a < i, b < j.
class PrefixSumTable {
 public:
  explicit PrefixSumTable(const Observation& x);

  int n() const { return n_; }
  double at(int i, int j) const {
    return table_[static_cast<std::size_t>(i) * (n_ + 1) + j];
  }
  // Sum over rows [r, r+h) and columns [c, c+w).
  double window_sum(int r, int c, int h, int w) const {
    return at(r + h, c + w) - at(r, c + w) - at(r + h, c) + at(r, c);
  }

 private:
  int n_;
  std::vector<double> table_;
};

struct WindowMax {
  double value = 0.0;
  int row = 0;
  int col = 0;
};

double sum_statistic(const Observation& x);

// Maximum k x k window sum in O(n^2) via PrefixSumTable. Among exactly equal
// sums the smallest (row, col) in lexicographic order wins.
WindowMax scan_statistic_consecutive(const Observation& x, int k);
WindowMax scan_statistic_consecutive(const PrefixSumTable& table, int k);

inline constexpr std::uint64_t kDefaultSubsetBudget = 20'000'000;

// Exhaustive scan over all k x k submatrices with arbitrary index sets.
//
// For a fixed row set S the best column set is the k columns with the
// largest column sums restricted to S, since the objective separates as
// sum_{j in T} colsum_S(j). Maximizing over S therefore only needs
// C(n, k) row subsets, each followed by a top-k selection over n column
// sums, instead of C(n, k)^2 pairs. Throws Error(kBudget) when C(n, k)
// exceeds max_subsets.
double scan_statistic_arbitrary(const Observation& x, int k,
                                std::uint64_t max_subsets = kDefaultSubsetBudget);

// Throws Error(kConfig) for lambda <= 0: the threshold collapses to zero.
double tau_sum(const ModelConfig& config);
double tau_scan_sd(int n, int k, double delta);
double tau_scan_csd(int n, int k, double delta);

struct DetectionOutcome {
  double statistic = 0.0;
  double threshold = 0.0;
  bool decision = false;
  std::optional<WindowMax> argmax_window;  // consecutive scan only
};

enum class TestKind { kSum, kScanSD, kScanCSD };
std::string_view to_string(TestKind kind);

DetectionOutcome test_sum(const Observation& x, const ModelConfig& config);
DetectionOutcome test_scan_csd(const Observation& x, const ModelConfig& config,
                               double delta);
DetectionOutcome test_scan_sd(const Observation& x, const ModelConfig& config,
                              double delta,
                              std::uint64_t max_subsets = kDefaultSubsetBudget);
DetectionOutcome run_test(TestKind kind, const Observation& x,
                          const ModelConfig& config, double delta,
                          std::uint64_t max_subsets = kDefaultSubsetBudget);

// {test, statistic, threshold, decision, corner?}
nlohmann::json to_json(const DetectionOutcome& outcome, TestKind kind);

}  // namespace psm::detect

#endif  // PSM_DETECT_HPP_
