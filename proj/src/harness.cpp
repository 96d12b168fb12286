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

#include "psm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "psm/error.hpp"
#include "psm/theory.hpp"

namespace psm::harness {

namespace {

struct TaskName {
  Task task;
  std::string_view name;
};

constexpr TaskName kTaskNames[] = {
    {Task::kDetectSum, "detect_sum"},
    {Task::kDetectScanSD, "detect_scan_sd"},
    {Task::kDetectScanCSD, "detect_scan_csd"},
    {Task::kRecoverML, "recover_ml"},
    {Task::kRecoverPeel, "recover_peel"},
    {Task::kRecoverModifiedPeel, "recover_modified_peel"},
};

// Runs fn(i) for i in [0, count) on up to `threads` workers. Indices are
// handed out in increasing order; on failure no new indices are started and
// the exception of the lowest failing index is rethrown.
template <class Fn>
void parallel_for(std::int64_t count, int threads, Fn&& fn) {
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mutex;
  std::int64_t failed_index = count;
  std::exception_ptr failure;

  auto worker = [&] {
    while (!stop.load(std::memory_order_relaxed)) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mutex);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
        stop.store(true);
      }
    }
  };

  const int workers =
      static_cast<int>(std::min<std::int64_t>(std::max(threads, 1), count));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
}

std::int64_t count_ones(const std::vector<std::uint8_t>& v) {
  std::int64_t total = 0;
  for (auto b : v) total += b;
  return total;
}

template <class T>
std::vector<T> or_default(const std::vector<T>& values, T fallback) {
  return values.empty() ? std::vector<T>{fallback} : values;
}

}  // namespace

std::string_view to_string(Task task) {
  for (const auto& entry : kTaskNames)
    if (entry.task == task) return entry.name;
  return "?";
}

std::optional<Task> parse_task(std::string_view s) {
  for (const auto& entry : kTaskNames)
    if (entry.name == s) return entry.task;
  return std::nullopt;
}

bool is_detection(Task task) {
  return task == Task::kDetectSum || task == Task::kDetectScanSD ||
         task == Task::kDetectScanCSD;
}

detect::TestKind test_kind(Task task) {
  switch (task) {
    case Task::kDetectSum:
      return detect::TestKind::kSum;
    case Task::kDetectScanSD:
      return detect::TestKind::kScanSD;
    case Task::kDetectScanCSD:
      return detect::TestKind::kScanCSD;
    default:
      Fail(ErrorCode::kConfig, "not a detection task: " + std::string(to_string(task)));
  }
}

recover::Estimator estimator(Task task) {
  switch (task) {
    case Task::kRecoverML:
      return recover::Estimator::kML;
    case Task::kRecoverPeel:
      return recover::Estimator::kPeel;
    case Task::kRecoverModifiedPeel:
      return recover::Estimator::kModifiedPeel;
    default:
      Fail(ErrorCode::kConfig, "not a recovery task: " + std::string(to_string(task)));
  }
}

void ExperimentConfig::validate() const {
  if (trials < 1) Fail(ErrorCode::kConfig, "trials must be at least 1");
  if (threads < 1) Fail(ErrorCode::kConfig, "threads must be at least 1");
  if (!(delta >= 0.0) || !std::isfinite(delta))
    Fail(ErrorCode::kConfig, "delta must be finite and nonnegative");
  for (int n : or_default(grid.n, model.n))
    for (int k : or_default(grid.k, model.k))
      for (int m : or_default(grid.m, model.m))
        for (double lambda : or_default(grid.lambda, model.lambda)) {
          ModelConfig point = model;
          point.n = n;
          point.k = k;
          point.m = m;
          point.lambda = lambda;
          try {
            point.validate();
          } catch (const Error& e) {
            Fail(ErrorCode::kConfig, "grid point n=" + std::to_string(n) +
                                         " k=" + std::to_string(k) +
                                         " m=" + std::to_string(m) + ": " + e.what());
          }
        }
}

double hoeffding_halfwidth(std::int64_t trials) {
  if (trials < 1) Fail(ErrorCode::kConfig, "trials must be at least 1");
  return std::sqrt(std::log(2.0 / 0.05) / (2.0 * static_cast<double>(trials)));
}

RiskEstimate estimate_risk(const ExperimentConfig& config) {
  config.model.validate();
  if (config.trials < 1) Fail(ErrorCode::kConfig, "trials must be at least 1");
  const detect::TestKind kind = test_kind(config.task);
  const ModelConfig& model = config.model;

  std::vector<std::uint8_t> false_positive(config.trials, 0);
  std::vector<std::uint8_t> false_negative(config.trials, 0);
  parallel_for(2 * config.trials, config.threads, [&](std::int64_t j) {
    const bool alternative = j >= config.trials;
    const std::int64_t i = alternative ? j - config.trials : j;
    if (!alternative) {
      RandomStream rng(derive_seed(config.master_seed, kTagNull, i));
      const Observation x = sample_null(model.n, rng);
      false_positive[i] =
          detect::run_test(kind, x, model, config.delta, config.budgets.subsets).decision;
    } else {
      RandomStream rng(derive_seed(config.master_seed, kTagAlternative, i));
      const SupportSet support = sample_support(model, rng);
      const Observation x = sample_observation(support, model.lambda, rng);
      false_negative[i] =
          !detect::run_test(kind, x, model, config.delta, config.budgets.subsets).decision;
    }
  });

  RiskEstimate estimate;
  estimate.trials_per_hypothesis = config.trials;
  estimate.false_positives = count_ones(false_positive);
  estimate.false_negatives = count_ones(false_negative);
  const double trials = static_cast<double>(config.trials);
  estimate.type1_rate = static_cast<double>(estimate.false_positives) / trials;
  estimate.type2_rate = static_cast<double>(estimate.false_negatives) / trials;
  estimate.risk = estimate.type1_rate + estimate.type2_rate;
  estimate.ci_halfwidth = hoeffding_halfwidth(config.trials);
  return estimate;
}

RecoveryEstimate estimate_recovery(const ExperimentConfig& config) {
  config.model.validate();
  if (config.trials < 1) Fail(ErrorCode::kConfig, "trials must be at least 1");
  const recover::Estimator est = estimator(config.task);

  std::vector<std::uint8_t> exact(config.trials, 0);
  std::vector<std::uint8_t> fallback(config.trials, 0);
  std::vector<std::int64_t> overlap_cells(config.trials, 0);
  parallel_for(config.trials, config.threads, [&](std::int64_t i) {
    RandomStream rng(derive_seed(config.master_seed, kTagRecovery, i));
    const recover::RecoveryResult result =
        recover::recovery_trial(config.model, est, rng, config.budgets.ml_tuples);
    exact[i] = result.exact.value_or(false);
    fallback[i] = result.fallback;
    overlap_cells[i] = result.overlap_cells.value_or(0);
  });

  RecoveryEstimate estimate;
  estimate.trials = config.trials;
  estimate.exact_count = count_ones(exact);
  estimate.fallback_count = count_ones(fallback);
  std::int64_t total_overlap = 0;
  for (auto c : overlap_cells) total_overlap += c;
  const double trials = static_cast<double>(config.trials);
  const double block = static_cast<double>(config.model.m) * config.model.k * config.model.k;
  estimate.exact_rate = static_cast<double>(estimate.exact_count) / trials;
  estimate.mean_overlap_fraction = static_cast<double>(total_overlap) / (trials * block);
  estimate.ci_halfwidth = hoeffding_halfwidth(config.trials);
  return estimate;
}

std::string regime_label(int n, int k, int m, double lambda, Variant variant,
                         Task task) {
  if (n < 2) return "n/a";
  const theory::Exponents e = theory::exponents(n, k, m, lambda);
  theory::Problem problem;
  if (is_detection(task))
    problem = variant == Variant::kArbitrary ? theory::Problem::kSD : theory::Problem::kCSD;
  else
    problem = variant == Variant::kArbitrary ? theory::Problem::kSR : theory::Problem::kCSR;
  try {
    return std::string(
        theory::to_string(theory::regime_classify(e.alpha, e.beta, e.gamma_m, problem)));
  } catch (const Error&) {
    return "n/a";
  }
}

std::vector<SweepRow> sweep(const ExperimentConfig& config) {
  config.validate();
  std::vector<SweepRow> rows;
  for (int n : or_default(config.grid.n, config.model.n))
    for (int k : or_default(config.grid.k, config.model.k))
      for (int m : or_default(config.grid.m, config.model.m))
        for (double lambda : or_default(config.grid.lambda, config.model.lambda))
          for (Task task : or_default(config.grid.tasks, config.task)) {
            ExperimentConfig point = config;
            point.model.n = n;
            point.model.k = k;
            point.model.m = m;
            point.model.lambda = lambda;
            point.task = task;

            SweepRow row;
            row.n = n;
            row.k = k;
            row.m = m;
            row.lambda = lambda;
            if (n >= 2) {
              const theory::Exponents e = theory::exponents(n, k, m, lambda);
              row.alpha = e.alpha;
              row.beta = e.beta;
              row.gamma_m = e.gamma_m;
            }
            row.variant = config.model.variant;
            row.task = task;
            row.trials = config.trials;
            row.ci = hoeffding_halfwidth(config.trials);
            row.regime = regime_label(n, k, m, lambda, row.variant, task);
            row.seed = config.master_seed;
            try {
              if (is_detection(task)) {
                const RiskEstimate r = estimate_risk(point);
                row.type1 = r.type1_rate;
                row.type2 = r.type2_rate;
                row.risk = r.risk;
              } else {
                const RecoveryEstimate r = estimate_recovery(point);
                row.exact_rate = r.exact_rate;
                row.overlap_frac = r.mean_overlap_fraction;
              }
            } catch (const Error& e) {
              row.error = e.what();
              row.error_code = static_cast<int>(e.code());
            } catch (const std::exception& e) {
              row.error = e.what();
              row.error_code = static_cast<int>(ErrorCode::kInternal);
            }
            rows.push_back(std::move(row));
          }
  return rows;
}

}  // namespace psm::harness
