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
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "psm/error.hpp"
#include "psm/harness.hpp"
#include "psm/theory.hpp"

namespace psm::harness {

namespace {

// Tags for crossval streams, disjoint from the experiment tags.
constexpr std::uint64_t kTagScan = 100;
constexpr std::uint64_t kTagArbitrary = 101;
constexpr std::uint64_t kTagML = 102;
constexpr std::uint64_t kTagOverlap = 103;
constexpr std::uint64_t kTagMoments = 104;

constexpr double kScanTolerance = 1e-9;
constexpr double kMomentSigmas = 4.0;

double relative_gap(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}

int uniform_int(RandomStream& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(hi - lo + 1)));
}

double naive_window_sum(const Observation& x, int r, int c, int k) {
  double s = 0.0;
  for (int i = r; i < r + k; ++i)
    for (int j = c; j < c + k; ++j) s += x(i, j);
  return s;
}

double naive_scan(const Observation& x, int k) {
  double best = -std::numeric_limits<double>::infinity();
  for (int r = 0; r + k <= x.n(); ++r)
    for (int c = 0; c + k <= x.n(); ++c) best = std::max(best, naive_window_sum(x, r, c, k));
  return best;
}

double naive_scan_arbitrary(const Observation& x, int k) {
  const int n = x.n();
  double best = -std::numeric_limits<double>::infinity();
  for (unsigned rows = 0; rows < (1u << n); ++rows) {
    if (std::popcount(rows) != k) continue;
    for (unsigned cols = 0; cols < (1u << n); ++cols) {
      if (std::popcount(cols) != k) continue;
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        if (rows >> i & 1u)
          for (int j = 0; j < n; ++j)
            if (cols >> j & 1u) s += x(i, j);
      best = std::max(best, s);
    }
  }
  return best;
}

struct BruteForce {
  double value = -std::numeric_limits<double>::infinity();
  std::vector<std::uint8_t> mask;
};

// Every ordered m-tuple of windows whose cells do not collide.
BruteForce brute_force_ml(const Observation& x, int k, int m) {
  const int n = x.n();
  const int positions = n - k + 1;
  const int windows = positions * positions;
  BruteForce best;
  std::vector<int> chosen(m);
  std::vector<std::uint8_t> paint(static_cast<std::size_t>(n) * n);
  auto search = [&](auto&& self, int depth) -> void {
    if (depth == m) {
      std::fill(paint.begin(), paint.end(), 0);
      double s = 0.0;
      for (int w : chosen) {
        const int r = w / positions, c = w % positions;
        for (int i = r; i < r + k; ++i)
          for (int j = c; j < c + k; ++j) {
            auto& cell = paint[static_cast<std::size_t>(i) * n + j];
            if (cell) return;
            cell = 1;
            s += x(i, j);
          }
      }
      if (s > best.value) {
        best.value = s;
        best.mask = paint;
      }
      return;
    }
    for (int w = 0; w < windows; ++w) {
      chosen[depth] = w;
      self(self, depth + 1);
    }
  };
  search(search, 0);
  return best;
}

Observation random_matrix(int n, RandomStream& rng) { return sample_null(n, rng); }

void record_failure(SuiteResult& suite, const std::string& detail) {
  if (suite.passed) suite.detail = detail;
  suite.passed = false;
}

SuiteResult scan_suite(const CrossvalOptions& options) {
  SuiteResult suite;
  suite.name = "scan_consecutive";
  const ScanFunction scan =
      options.scan ? options.scan : ScanFunction([](const Observation& x, int k) {
        return detect::scan_statistic_consecutive(x, k);
      });
  const int n_lo = std::min(4, options.n_max);
  for (std::int64_t t = 0; t < options.matrices; ++t) {
    RandomStream rng(derive_seed(options.seed, kTagScan, t));
    const int n = uniform_int(rng, n_lo, options.n_max);
    const int k = uniform_int(rng, 1, n);
    const Observation x = random_matrix(n, rng);
    const double oracle = naive_scan(x, k);
    double got;
    try {
      got = scan(x, k).value;
    } catch (const std::exception& e) {
      record_failure(suite, std::string("scan threw: ") + e.what());
      ++suite.cases;
      continue;
    }
    const double gap = relative_gap(got, oracle);
    suite.worst_discrepancy = std::max(suite.worst_discrepancy, gap);
    if (!(gap < kScanTolerance)) {
      std::ostringstream os;
      os << "n=" << n << " k=" << k << " scan=" << got << " naive=" << oracle;
      record_failure(suite, os.str());
    }
    ++suite.cases;
  }
  return suite;
}

SuiteResult arbitrary_suite(const CrossvalOptions& options) {
  SuiteResult suite;
  suite.name = "scan_arbitrary";
  const int n_hi = std::min(options.n_max, 7);
  const std::int64_t count = std::min<std::int64_t>(options.matrices, 100);
  for (std::int64_t t = 0; t < count; ++t) {
    RandomStream rng(derive_seed(options.seed, kTagArbitrary, t));
    const int n = uniform_int(rng, 1, n_hi);
    const int k = uniform_int(rng, 1, n);
    const Observation x = random_matrix(n, rng);
    const double got = detect::scan_statistic_arbitrary(x, k);
    const double oracle = naive_scan_arbitrary(x, k);
    const double gap = relative_gap(got, oracle);
    suite.worst_discrepancy = std::max(suite.worst_discrepancy, gap);
    if (!(gap < kScanTolerance)) {
      std::ostringstream os;
      os << "n=" << n << " k=" << k << " scan=" << got << " naive=" << oracle;
      record_failure(suite, os.str());
    }
    ++suite.cases;
  }
  return suite;
}

SuiteResult ml_suite(const CrossvalOptions& options) {
  SuiteResult suite;
  suite.name = "ml_bruteforce";
  const int n_hi = std::min(options.n_max, 8);
  std::int64_t index = 0;
  for (int n = 1; n <= n_hi; ++n)
    for (int k = 1; k <= std::min(3, n); ++k)
      for (int m = 1; m <= 2 && m * k <= n; ++m)
        for (int rep = 0; rep < 5; ++rep) {
          RandomStream rng(derive_seed(options.seed, kTagML, index++));
          const Observation x = random_matrix(n, rng);
          const BruteForce oracle = brute_force_ml(x, k, m);
          ++suite.cases;
          if (oracle.mask.empty()) {
            bool threw = false;
            try {
              recover::ml_exhaustive(x, k, m);
            } catch (const Error&) {
              threw = true;
            }
            if (!threw) record_failure(suite, "ml returned a tuple where none exists");
            continue;
          }
          const SupportSet estimate = recover::ml_exhaustive(x, k, m);
          const CellMask mask = cell_mask(estimate);
          double value = 0.0;
          for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
              if (mask(r, c)) value += x(r, c);
          const double gap = relative_gap(value, oracle.value);
          suite.worst_discrepancy = std::max(suite.worst_discrepancy, gap);
          if (mask.bits != oracle.mask || !(gap < kScanTolerance)) {
            std::ostringstream os;
            os << "n=" << n << " k=" << k << " m=" << m << " ml=" << value
               << " brute=" << oracle.value;
            record_failure(suite, os.str());
          }
        }
  return suite;
}

SuiteResult overlap_suite(const CrossvalOptions& options) {
  SuiteResult suite;
  suite.name = "overlap";
  const int n_hi = std::max(4, std::min(options.n_max, 16));
  for (std::int64_t t = 0; t < 500; ++t) {
    RandomStream rng(derive_seed(options.seed, kTagOverlap, t));
    ModelConfig config;
    config.n = uniform_int(rng, 4, n_hi);
    config.k = uniform_int(rng, 1, config.n / 2);
    config.m = uniform_int(rng, 1, std::max(1, std::min(3, config.n / (2 * config.k))));
    config.variant = rng.uniform_index(2) ? Variant::kConsecutive : Variant::kArbitrary;
    config.boundary = rng.uniform_index(2) ? Boundary::kCyclic : Boundary::kLinear;
    SupportSet a = sample_support(config, rng);
    SupportSet b = sample_support(config, rng);
    const CellMask ma = cell_mask(a), mb = cell_mask(b);
    std::int64_t both = 0;
    for (std::size_t i = 0; i < ma.bits.size(); ++i) both += ma.bits[i] & mb.bits[i];
    const std::int64_t got = overlap(a, b);
    suite.worst_discrepancy =
        std::max(suite.worst_discrepancy, static_cast<double>(std::abs(got - both)));
    if (got != both) {
      std::ostringstream os;
      os << "n=" << config.n << " k=" << config.k << " m=" << config.m
         << " overlap=" << got << " popcount=" << both;
      record_failure(suite, os.str());
    }
    ++suite.cases;
  }
  return suite;
}

SuiteResult moment_suite(const CrossvalOptions& options) {
  SuiteResult suite;
  suite.name = "moments";
  constexpr int kDegree = 6;
  const Variant variants[] = {Variant::kConsecutive, Variant::kArbitrary};
  std::uint64_t index = 0;
  for (Variant variant : variants) {
    ModelConfig config;
    config.n = 20;
    config.k = 3;
    config.m = 1;
    config.variant = variant;
    config.boundary = Boundary::kCyclic;
    RandomStream rng(derive_seed(options.seed, kTagMoments, index++));
    const theory::OverlapMoments exact =
        theory::overlap_moments_exact_single(config.n, config.k, kDegree, variant);
    const theory::OverlapMoments mc =
        theory::overlap_moment_mc(config, kDegree, options.moment_pairs, rng);
    for (int d = 1; d <= kDegree; ++d) {
      const double se = mc.std_errors[d];
      const double z = se > 0.0 ? std::abs(mc.values[d] - exact.values[d]) / se
                                : (mc.values[d] == exact.values[d] ? 0.0 : INFINITY);
      suite.worst_discrepancy = std::max(suite.worst_discrepancy, z);
      if (!(z <= kMomentSigmas)) {
        std::ostringstream os;
        os << to_string(variant) << " d=" << d << " mc=" << mc.values[d]
           << " exact=" << exact.values[d] << " se=" << se;
        record_failure(suite, os.str());
      }
      ++suite.cases;
    }
  }
  return suite;
}

}  // namespace

CrossvalReport crossval(const CrossvalOptions& options) {
  if (options.n_max < 1) Fail(ErrorCode::kConfig, "crossval n_max must be at least 1");
  if (options.matrices < 1) Fail(ErrorCode::kConfig, "crossval needs at least 1 matrix");
  CrossvalReport report;
  report.suites.push_back(scan_suite(options));
  report.suites.push_back(arbitrary_suite(options));
  report.suites.push_back(ml_suite(options));
  report.suites.push_back(overlap_suite(options));
  report.suites.push_back(moment_suite(options));
  for (const auto& suite : report.suites) report.passed = report.passed && suite.passed;
  return report;
}

nlohmann::json to_json(const CrossvalReport& report) {
  nlohmann::json suites = nlohmann::json::array();
  for (const auto& s : report.suites) {
    nlohmann::json entry{{"name", s.name},
                         {"passed", s.passed},
                         {"cases", s.cases},
                         {"worst_discrepancy", s.worst_discrepancy}};
    if (!s.detail.empty()) entry["detail"] = s.detail;
    suites.push_back(std::move(entry));
  }
  return nlohmann::json{{"passed", report.passed}, {"suites", std::move(suites)}};
}

}  // namespace psm::harness
