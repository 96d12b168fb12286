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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "psm/error.hpp"
#include "psm/harness.hpp"
#include "psm/theory.hpp"

using namespace psm;
using namespace psm::harness;

namespace {

ExperimentConfig Experiment(int n, int k, int m, double lambda, Task task,
                            std::int64_t trials) {
  ExperimentConfig c;
  c.model.n = n;
  c.model.k = k;
  c.model.m = m;
  c.model.lambda = lambda;
  c.task = task;
  c.trials = trials;
  c.master_seed = 12345;
  return c;
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("task names") {
  for (auto t : {Task::kDetectSum, Task::kDetectScanSD, Task::kDetectScanCSD, Task::kRecoverML,
                 Task::kRecoverPeel, Task::kRecoverModifiedPeel})
    CHECK(parse_task(to_string(t)) == t);
  CHECK_FALSE(parse_task("detect").has_value());
  CHECK_THROWS_AS(test_kind(Task::kRecoverML), Error);
  CHECK_THROWS_AS(estimator(Task::kDetectSum), Error);
}

TEST_CASE("hoeffding half-width") {
  CHECK(hoeffding_halfwidth(1000) == doctest::Approx(std::sqrt(std::log(40.0) / 2000.0)));
  CHECK(hoeffding_halfwidth(1000) == doctest::Approx(0.043).epsilon(0.01));
}

TEST_CASE("experiment validation") {
  ExperimentConfig c = Experiment(20, 4, 1, 1.0, Task::kDetectSum, 0);
  CHECK_THROWS_AS(c.validate(), Error);
  c.trials = 10;
  c.grid.k = {4, 25};
  CHECK_THROWS_AS(c.validate(), Error);
  c.grid.k = {2, 4};
  CHECK_NOTHROW(c.validate());
  c.delta = -1;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("risk estimate invariants and determinism") {
  ExperimentConfig c = Experiment(30, 5, 1, 0.5, Task::kDetectScanCSD, 300);
  const RiskEstimate a = estimate_risk(c);
  CHECK(a.risk == a.type1_rate + a.type2_rate);
  CHECK(a.type1_rate >= 0.0);
  CHECK(a.type1_rate <= 1.0);
  CHECK(a.type2_rate <= 1.0);
  CHECK(estimate_risk(c) == a);
  for (int threads : {2, 4, 8}) {
    c.threads = threads;
    CHECK(estimate_risk(c) == a);
  }
}

TEST_CASE("risk at lambda = 0 is chance") {
  ExperimentConfig c = Experiment(30, 5, 1, 0.0, Task::kDetectScanCSD, 1000);
  c.delta = 0.0;
  const RiskEstimate r = estimate_risk(c);
  CHECK(std::abs(r.risk - 1.0) <= 2 * r.ci_halfwidth);
  CHECK(std::abs(r.type2_rate - (1.0 - r.type1_rate)) <= 2 * r.ci_halfwidth);
}

TEST_CASE("recovery estimate") {
  ExperimentConfig c = Experiment(40, 4, 2, 5.0, Task::kRecoverPeel, 100);
  const RecoveryEstimate r = estimate_recovery(c);
  CHECK(r.mean_overlap_fraction >= r.exact_rate);
  CHECK(r.exact_rate > 0.9);
  c.threads = 4;
  CHECK(estimate_recovery(c) == r);

  ExperimentConfig z = Experiment(200, 20, 1, 0.0, Task::kRecoverPeel, 100);
  CHECK(estimate_recovery(z).exact_rate <= 0.01);
}

TEST_CASE("trial errors propagate") {
  ExperimentConfig c = Experiment(30, 15, 1, 1.0, Task::kDetectScanSD, 8);
  c.budgets.subsets = 10;
  c.threads = 4;
  try {
    estimate_risk(c);
    FAIL("expected a budget error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBudget);
  }
}

TEST_CASE("single-point sweep equals a single estimate") {
  const ExperimentConfig c = Experiment(30, 5, 1, 0.6, Task::kDetectSum, 200);
  const auto rows = sweep(c);
  REQUIRE(rows.size() == 1);
  const RiskEstimate r = estimate_risk(c);
  CHECK(rows[0].type1 == r.type1_rate);
  CHECK(rows[0].type2 == r.type2_rate);
  CHECK(rows[0].risk == r.risk);
  CHECK(rows[0].ci == r.ci_halfwidth);
  CHECK_FALSE(rows[0].exact_rate.has_value());
}

TEST_CASE("lambda sweep risk is non-increasing under common random numbers") {
  ExperimentConfig c = Experiment(40, 6, 1, 0.0, Task::kDetectSum, 400);
  c.grid.lambda = {0.05, 0.1, 0.2, 0.3, 0.5, 0.8};
  c.grid.tasks = {Task::kDetectSum, Task::kDetectScanCSD};
  const auto rows = sweep(c);
  REQUIRE(rows.size() == 12);
  for (Task task : c.grid.tasks) {
    double previous = 2.0;
    for (const auto& row : rows) {
      if (row.task != task) continue;
      REQUIRE(row.risk.has_value());
      CHECK(*row.risk <= previous);
      previous = *row.risk;
    }
  }
}

TEST_CASE("sweep rows carry theory labels") {
  ExperimentConfig c = Experiment(64, 8, 1, 0.3, Task::kDetectSum, 20);
  c.grid.n = {64, 128};
  c.grid.k = {4, 8};
  c.grid.lambda = {0.0, 0.3, 1.0};
  c.grid.tasks = {Task::kDetectSum, Task::kRecoverPeel};
  c.model.variant = Variant::kConsecutive;
  const auto rows = sweep(c);
  CHECK(rows.size() == 24);
  for (const auto& row : rows) {
    const auto e = theory::exponents(row.n, row.k, row.m, row.lambda);
    const auto problem =
        is_detection(row.task) ? theory::Problem::kCSD : theory::Problem::kCSR;
    CHECK(row.regime ==
          theory::to_string(theory::regime_classify(e.alpha, e.beta, e.gamma_m, problem)));
    CHECK(row.alpha == e.alpha);
    CHECK(row.seed == c.master_seed);
  }
  // lambda = 0 rows of the sum test have no threshold: errors stay in-row.
  int errors = 0;
  for (const auto& row : rows)
    if (row.error) {
      ++errors;
      CHECK(row.lambda == 0.0);
      CHECK(row.task == Task::kDetectSum);
      CHECK(row.error_code == static_cast<int>(ErrorCode::kConfig));
      CHECK_FALSE(row.risk.has_value());
    }
  CHECK(errors == 4);
}

TEST_CASE("regime label outside the exponent domain") {
  CHECK(regime_label(100, 1, 1, 0.5, Variant::kConsecutive, Task::kDetectSum) == "n/a");
  CHECK(regime_label(100, 10, 1, 0.5, Variant::kArbitrary, Task::kDetectSum) ==
        theory::to_string(theory::regime_classify(-std::log(0.5) / std::log(100.0), 0.5, 0,
                                                  theory::Problem::kSD)));
}

TEST_CASE("CSV and JSON rendering") {
  CHECK(render({}, Format::kCsv) == std::string(kCsvHeader) + "\n");
  CHECK(render({}, Format::kJson) == "[]\n");

  ExperimentConfig c = Experiment(32, 4, 1, 0.0, Task::kDetectScanCSD, 30);
  c.grid.lambda = {0.0, 0.5};
  c.grid.tasks = {Task::kDetectSum, Task::kDetectScanCSD, Task::kRecoverModifiedPeel};
  const auto rows = sweep(c);
  const std::string csv = render(rows, Format::kCsv);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == kCsvHeader);
  int count = 0;
  while (std::getline(lines, line)) {
    ++count;
    CHECK(std::count(line.begin(), line.end(), ',') == 17);
  }
  CHECK(count == 6);
  CHECK(render(sweep(c), Format::kCsv) == csv);
  CHECK(rows_from_json(nlohmann::json::parse(render(rows, Format::kJson))) == rows);
  CHECK(rows_to_json(rows)[0].at("alpha") == "inf");
}

TEST_CASE("emit writes files and reports bad paths") {
  const std::string path = "psm_test_emit.csv";
  emit({}, Format::kCsv, path);
  CHECK(Slurp(path) == std::string(kCsvHeader) + "\n");
  std::remove(path.c_str());
  try {
    emit({}, Format::kCsv, "/nonexistent/dir/out.csv");
    FAIL("expected an I/O error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
    CHECK(std::string(e.what()).find("/nonexistent/dir/out.csv") != std::string::npos);
  }
}

TEST_CASE("crossval passes, is deterministic, and catches an off-by-one scan") {
  CrossvalOptions options;
  options.matrices = 300;
  options.seed = 4;
  const CrossvalReport a = crossval(options);
  CHECK(a.passed);
  for (const auto& s : a.suites) {
    CHECK(s.passed);
    CHECK(s.cases > 0);
  }
  CHECK(to_json(crossval(options)) == to_json(a));

  options.scan = [](const Observation& x, int k) {
    // Window bounds shifted by one row.
    const detect::PrefixSumTable t(x);
    detect::WindowMax best{-INFINITY, 0, 0};
    for (int r = 0; r + k <= x.n(); ++r)
      for (int c = 0; c + k <= x.n(); ++c) {
        const int h = r + k < x.n() ? k + 1 : k;
        const double s = t.window_sum(r, c, h, k);
        if (s > best.value) best = detect::WindowMax{s, r, c};
      }
    return best;
  };
  const CrossvalReport b = crossval(options);
  CHECK_FALSE(b.passed);
  CHECK_FALSE(b.suites[0].passed);
  CHECK_FALSE(b.suites[0].detail.empty());
}
