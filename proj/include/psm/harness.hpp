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

// Seeded Monte Carlo runner: risk and recovery-rate estimation, grid sweeps,
// oracle cross-validation and CSV/JSON emission.
//
// Trial i under hypothesis tag t draws from RandomStream(derive_seed(
// master_seed, t, i)); tags are 0 (null), 1 (alternative), 2 (recovery).
// The same streams are reused at every grid point, so sweeps over lambda
// run under common random numbers.

#ifndef PSM_HARNESS_HPP_
#define PSM_HARNESS_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "psm/detect.hpp"
#include "psm/model.hpp"
#include "psm/recover.hpp"

namespace psm::harness {

enum class Task {
  kDetectSum,
  kDetectScanSD,
  kDetectScanCSD,
  kRecoverML,
  kRecoverPeel,
  kRecoverModifiedPeel,
};

// "detect_sum", "detect_scan_sd", "detect_scan_csd", "recover_ml",
// "recover_peel", "recover_modified_peel".
std::string_view to_string(Task task);
std::optional<Task> parse_task(std::string_view s);

bool is_detection(Task task);
detect::TestKind test_kind(Task task);          // detection tasks only
recover::Estimator estimator(Task task);        // recovery tasks only

inline constexpr std::uint64_t kTagNull = 0;
inline constexpr std::uint64_t kTagAlternative = 1;
inline constexpr std::uint64_t kTagRecovery = 2;

// Empty lists fall back to the value in ExperimentConfig::model / task.
struct SweepGrid {
  std::vector<double> lambda;
  std::vector<int> k;
  std::vector<int> m;
  std::vector<int> n;
  std::vector<Task> tasks;
};

struct Budgets {
  std::uint64_t subsets = detect::kDefaultSubsetBudget;
  std::uint64_t ml_tuples = recover::kDefaultMLBudget;
};

struct ExperimentConfig {
  ModelConfig model;
  Task task = Task::kDetectSum;
  std::int64_t trials = 100;
  std::uint64_t master_seed = 0;
  double delta = 0.5;
  SweepGrid grid;
  int threads = 1;
  Budgets budgets;

  // trials >= 1, threads >= 1, delta >= 0 and every grid combination passes
  // ModelConfig::validate. Throws Error(kConfig).
  void validate() const;
};

// sqrt(ln(2/0.05) / (2 trials)).
double hoeffding_halfwidth(std::int64_t trials);

struct RiskEstimate {
  double type1_rate = 0.0;
  double type2_rate = 0.0;
  double risk = 0.0;
  std::int64_t trials_per_hypothesis = 0;
  double ci_halfwidth = 0.0;
  std::int64_t false_positives = 0;
  std::int64_t false_negatives = 0;

  friend bool operator==(const RiskEstimate&, const RiskEstimate&) = default;
};

struct RecoveryEstimate {
  double exact_rate = 0.0;
  double mean_overlap_fraction = 0.0;
  double ci_halfwidth = 0.0;
  std::int64_t trials = 0;
  std::int64_t exact_count = 0;
  std::int64_t fallback_count = 0;

  friend bool operator==(const RecoveryEstimate&, const RecoveryEstimate&) = default;
};

// Ignores the grid. Errors from detectors and estimators propagate; with
// several failing trials the one with the lowest index is rethrown.
RiskEstimate estimate_risk(const ExperimentConfig& config);
RecoveryEstimate estimate_recovery(const ExperimentConfig& config);

struct SweepRow {
  int n = 0, k = 0, m = 0;
  double lambda = 0.0;
  double alpha = 0.0, beta = 0.0, gamma_m = 0.0;
  Variant variant = Variant::kConsecutive;
  Task task = Task::kDetectSum;
  std::int64_t trials = 0;
  std::optional<double> type1, type2, risk;
  std::optional<double> exact_rate, overlap_frac;
  double ci = 0.0;
  std::string regime;  // theory label or "n/a"
  std::uint64_t seed = 0;
  std::optional<std::string> error;
  int error_code = 0;  // ErrorCode value when error is set

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

// Regime label for a row: SD (arbitrary) or CSD (consecutive) for detection,
// SR or CSR for recovery. "n/a" outside the exponent domain.
std::string regime_label(int n, int k, int m, double lambda, Variant variant,
                         Task task);

// One row per (n, k, m, lambda, task), in that nesting order. Trial errors
// are stored in the row and the sweep continues.
std::vector<SweepRow> sweep(const ExperimentConfig& config);

// Oracle cross-validation.
using ScanFunction = std::function<detect::WindowMax(const Observation&, int)>;

struct CrossvalOptions {
  int n_max = 32;
  std::int64_t matrices = 1000;  // scan suite size
  std::uint64_t seed = 0;
  std::int64_t moment_pairs = 100'000;
  ScanFunction scan;  // defaults to detect::scan_statistic_consecutive
};

struct SuiteResult {
  std::string name;
  bool passed = true;
  std::int64_t cases = 0;
  double worst_discrepancy = 0.0;
  std::string detail;  // first failure, if any
};

struct CrossvalReport {
  bool passed = true;
  std::vector<SuiteResult> suites;
};

// Suites: scan_consecutive, scan_arbitrary, ml_bruteforce, overlap,
// moments. Deterministic per seed.
CrossvalReport crossval(const CrossvalOptions& options);
nlohmann::json to_json(const CrossvalReport& report);

enum class Format { kCsv, kJson };
std::optional<Format> parse_format(std::string_view s);

// n,k,m,lambda,alpha,beta,gamma_m,variant,task,trials,type1,type2,risk,
// exact_rate,overlap_frac,ci,regime,seed
inline constexpr std::string_view kCsvHeader =
    "n,k,m,lambda,alpha,beta,gamma_m,variant,task,trials,type1,type2,risk,"
    "exact_rate,overlap_frac,ci,regime,seed";

std::string render(const std::vector<SweepRow>& rows, Format format);
nlohmann::json rows_to_json(const std::vector<SweepRow>& rows);
std::vector<SweepRow> rows_from_json(const nlohmann::json& j);

// Writes render(rows, format) to path, or to stdout when path is empty or
// "-". Throws Error(kIo) naming the path.
void emit(const std::vector<SweepRow>& rows, Format format, const std::string& path);

// Shared helper for any text output destined for a file or stdout.
void write_text(const std::string& text, const std::string& path);

}  // namespace psm::harness

#endif  // PSM_HARNESS_HPP_
