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
#include "psm/error.hpp"
#include "psm/theory.hpp"

using namespace psm;
using namespace psm::theory;

TEST_CASE("chi-square against quadrature") {
  CHECK(chi_square_gaussian(0.0) == 0.0);
  for (double l : {0.1, 0.5, 1.0, 2.0, 3.0})
    CHECK(std::abs(chi_square_gaussian(l) - oracle::chi_square_quadrature(l)) <= 1e-6);
  CHECK(chi_square_gaussian(1.0) == doctest::Approx(1.71828).epsilon(1e-5));
  CHECK(chi_square_gaussian(0.5) == doctest::Approx(0.28403).epsilon(1e-4));
  CHECK(chi_square_gaussian(1.0, Chi2Convention::kPaper) == 0.5 * chi_square_gaussian(1.0));
  try {
    chi_square_gaussian(30.0);
    FAIL("expected saturation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBudget);
  }
}

TEST_CASE("consecutive pmf examples") {
  const OverlapPMF p = overlap_pmf_consecutive(10, 3);
  REQUIRE(p.probs.size() == 4);
  CHECK(p.probs[0] == 0.5);
  CHECK(p.probs[1] == 0.2);
  CHECK(p.probs[2] == 0.2);
  CHECK(p.probs[3] == 0.1);
  CHECK(p.mean() == doctest::Approx(0.9).epsilon(1e-12));
  const OverlapPMF q = overlap_pmf_consecutive(2, 1);
  CHECK(q.probs == std::vector<double>{0.5, 0.5});
  CHECK_THROWS_AS(overlap_pmf_consecutive(5, 4), Error);
}

TEST_CASE("consecutive pmf equals cyclic enumeration") {
  for (int n = 1; n <= 30; ++n)
    for (int k = 1; 2 * k <= n + 1; ++k) {
      const auto counts = oracle::cyclic_overlap_counts(n, k);
      const OverlapPMF p = overlap_pmf_consecutive(n, k);
      double total = 0.0;
      for (int z = 0; z <= k; ++z) {
        CHECK(p.probs[z] ==
              doctest::Approx(static_cast<double>(counts[z]) / (n * n)).epsilon(1e-14));
        CHECK(p.probs[z] >= 0.0);
        total += p.probs[z];
      }
      CHECK(std::abs(total - 1.0) <= 1e-12);
      CHECK(std::abs(p.mean() - static_cast<double>(k) * k / n) <= 1e-12);
    }
}

TEST_CASE("hypergeometric pmf against exact counts") {
  for (int n = 1; n <= 40; n += 3)
    for (int k = 1; k <= n; k += 2) {
      const OverlapPMF p = overlap_pmf_hypergeometric(n, k);
      const double total = oracle::binomial(n, k).convert_to<double>();
      for (int z = 0; z <= k; ++z) {
        const double want =
            (oracle::binomial(k, z) * oracle::binomial(n - k, k - z)).convert_to<double>() /
            total;
        CHECK(p.probs[z] == doctest::Approx(want).epsilon(1e-10).scale(1e-300));
      }
      CHECK(p.mean() == doctest::Approx(static_cast<double>(k) * k / n).epsilon(1e-10));
    }
}

TEST_CASE("exact single moments") {
  CHECK(overlap_moment_exact_single(10, 3, 0, Variant::kConsecutive) == 1.0);
  CHECK(overlap_moment_exact_single(10, 3, 1, Variant::kArbitrary) ==
        doctest::Approx(0.81).epsilon(1e-12));
  CHECK(overlap_moment_exact_single(10, 3, 1, Variant::kConsecutive) ==
        doctest::Approx(0.81).epsilon(1e-12));
  for (int d = 0; d <= 6; ++d)
    CHECK(overlap_moment_exact_single(12, 3, d, Variant::kConsecutive) ==
          doctest::Approx(oracle::cyclic_window_moment(12, 3, d)).epsilon(1e-12));
  // Jensen: mu_d >= mu_1^d.
  const auto mu = overlap_moments_exact_single(20, 4, 6, Variant::kArbitrary);
  for (int d = 2; d <= 6; ++d) CHECK(mu.values[d] >= std::pow(mu.values[1], d) * (1 - 1e-12));
}

TEST_CASE("MC moments against exact") {
  ModelConfig c;
  c.n = 20;
  c.k = 3;
  c.m = 1;
  c.boundary = Boundary::kCyclic;
  RandomStream rng(17);
  const auto mc = overlap_moment_mc(c, 6, 100000, rng);
  const auto exact = overlap_moments_exact_single(20, 3, 6, Variant::kConsecutive);
  CHECK(mc.values[0] == 1.0);
  CHECK(mc.std_errors[0] == 0.0);
  for (int d = 1; d <= 6; ++d)
    CHECK(std::abs(mc.values[d] - exact.values[d]) <= 4 * mc.std_errors[d]);

  // lambda plays no role.
  c.lambda = 3.0;
  RandomStream again(17);
  CHECK(overlap_moment_mc(c, 6, 100000, again).values == mc.values);
  RandomStream few(1);
  CHECK_THROWS_AS(overlap_moment_mc(c, 2, 999, few), Error);
}

TEST_CASE("low-degree norm") {
  const auto mu = overlap_moments_exact_single(20, 3, 6, Variant::kConsecutive);
  CHECK(low_degree_norm_sq(0.0, mu) == 1.0);
  RandomStream rng(9);
  for (int t = 0; t < 20; ++t) {
    const double l = 2.0 * rng.uniform01();
    CHECK(low_degree_norm_sq(l, mu) >= 1.0 + l * l * mu.values[1]);
  }
  double previous = 0.0;
  for (int D = 0; D <= 6; ++D) {
    OverlapMoments prefix = mu;
    prefix.values.resize(D + 1);
    prefix.std_errors.resize(D + 1);
    const double v = low_degree_norm_sq(0.7, prefix);
    CHECK(v >= previous);
    previous = v;
  }
}

TEST_CASE("Bell numbers") {
  const std::vector<int> small{1, 1, 2, 5, 15, 52, 203};
  for (int d = 0; d < 7; ++d) CHECK(bell_number(d) == static_cast<BellInt>(small[d]));
  for (int d = 0; d <= kMaxExactBell; ++d) {
    const oracle::cpp_int want = oracle::bell(d);
    const BellInt got = bell_number(d);
    CHECK(static_cast<std::uint64_t>(got >> 64) ==
          static_cast<std::uint64_t>(want >> 64));
    CHECK(static_cast<std::uint64_t>(got) == static_cast<std::uint64_t>(want));
  }
  CHECK(bell_number_real(25).exact);
  const BellValue b30 = bell_number_real(30);
  CHECK_FALSE(b30.exact);
  CHECK(b30.value == doctest::Approx(oracle::bell(30).convert_to<double>()).epsilon(1e-12));
  CHECK_THROWS_AS(bell_number(26), Error);
}

TEST_CASE("Bell bound dominates the exact truncated norm") {
  const auto mu = overlap_moments_exact_single(20, 3, 6, Variant::kArbitrary);
  for (double l : {0.1, 0.5}) {
    const BellBound b = low_degree_bell_bound(l, 20, 3, 1, 6);
    CHECK(b.exact_bell);
    CHECK(b.value >= low_degree_norm_sq(l, mu));
  }
  CHECK(low_degree_bell_bound(0.0, 20, 3, 1, 6).value == 1.0);
  CHECK_FALSE(low_degree_bell_bound(0.1, 20, 3, 1, 30).exact_bell);
}

TEST_CASE("second-moment bound") {
  CHECK(second_moment_bound_consecutive(0.0, 40, 4, 2) == 1.0);
  const double chi2 = chi_square_gaussian(0.3);
  CHECK(second_moment_bound_consecutive(0.3, 40, 4, 1) ==
        doctest::Approx(1.0 + 4.0 * 16.0 / 1600.0 * std::expm1(chi2 * 16)).epsilon(1e-14));
  CHECK_THROWS_AS(second_moment_bound_consecutive(3.0, 40, 10, 1), Error);

  ModelConfig c;
  c.n = 40;
  c.k = 4;
  c.m = 2;
  c.boundary = Boundary::kCyclic;
  RandomStream rng(3);
  const McEstimate zero = second_moment_mc(0.0, c, 1000, rng);
  CHECK(zero.mean == 1.0);
  const McEstimate mc = second_moment_mc(0.2, c, 100000, rng);
  CHECK(mc.mean >= 1.0);
  CHECK(mc.mean <= second_moment_bound_consecutive(0.2, 40, 4, 2) + 4 * mc.std_error);
}

TEST_CASE("regime edges and anchors") {
  CHECK(regime_classify(0.25, 0.6, 0, Problem::kSD) == RegimeLabel::kHard);
  CHECK(regime_classify(0.1, 0.6, 0, Problem::kSD) == RegimeLabel::kEasy);
  CHECK(regime_classify(0.5, 0.6, 0, Problem::kSD) == RegimeLabel::kImpossible);
  CHECK(regime_classify(0.2, 0.5, 0.25, Problem::kSD) == RegimeLabel::kEasy);
  CHECK(regime_classify(0.1, 0.3, 0.25, Problem::kSD) == RegimeLabel::kHard);
  CHECK(regime_classify(0.5, 0.5, 0.25, Problem::kSD) == RegimeLabel::kImpossible);
  CHECK(regime_classify(0.3, 0.8, 0.25, Problem::kSD) == RegimeLabel::kEasy);
  CHECK(regime_classify(0.6, 0.5, 0, Problem::kCSD) == RegimeLabel::kImpossible);
  CHECK(regime_classify(0.4, 0.5, 0, Problem::kCSD) == RegimeLabel::kEasy);
  CHECK(regime_classify(0.3, 0.5, 0, Problem::kCSR) == RegimeLabel::kImpossible);
  CHECK(regime_classify(0.2, 0.5, 0, Problem::kCSR) == RegimeLabel::kEasy);
  CHECK(regime_classify(0.2, 0.6, 0, Problem::kSR) == RegimeLabel::kHard);
  CHECK(regime_classify(0.05, 0.6, 0, Problem::kSR) == RegimeLabel::kEasy);
  CHECK(regime_classify(0.35, 0.6, 0, Problem::kSR) == RegimeLabel::kImpossible);
  CHECK(regime_classify(INFINITY, 0.5, 0, Problem::kCSD) == RegimeLabel::kImpossible);
  CHECK(regime_classify(0.2, 0.6, 0, Problem::kSD) == RegimeLabel::kBoundary);
  CHECK(regime_classify(0.5 + 1e-10, 0.5, 0, Problem::kCSD) == RegimeLabel::kBoundary);
  CHECK_THROWS_AS(regime_classify(0.1, 1.0, 0, Problem::kSD), Error);
  CHECK_THROWS_AS(regime_classify(-0.1, 0.5, 0, Problem::kSD), Error);
  for (auto p : {Problem::kSD, Problem::kSR, Problem::kCSD, Problem::kCSR})
    CHECK(parse_problem(to_string(p)) == p);
}

TEST_CASE("regime classifier is monotone in alpha") {
  for (auto p : {Problem::kSD, Problem::kSR, Problem::kCSD, Problem::kCSR})
    for (double beta = 0.05; beta < 1.0; beta += 0.05)
      for (double gamma = 0.0; gamma <= 0.5; gamma += 0.25) {
        int rank = 0;  // easy < hard < impossible
        for (double alpha = 0.0; alpha <= 1.5; alpha += 0.01) {
          const auto label = regime_classify(alpha, beta, gamma, p);
          if (label == RegimeLabel::kBoundary) continue;
          const int r = label == RegimeLabel::kEasy ? 0 : label == RegimeLabel::kHard ? 1 : 2;
          CHECK(r >= rank);
          rank = r;
        }
      }
}

TEST_CASE("threshold table") {
  const ThresholdTable t = threshold_table(256, 16, 1, 0.5, 0.5);
  CHECK(t.tau_scan_csd == doctest::Approx(std::sqrt(4.5 * 256 * std::log(256.0))));
  CHECK(t.tau_sum == 64.0);
  CHECK(t.chi2 == chi_square_gaussian(0.5));
  CHECK(t.csd_type1_bound == doctest::Approx(0.125));
  CHECK(t.peel_lambda_min == doctest::Approx(std::sqrt(24 * std::log(256.0) / 16)));
  CHECK(t.exps.beta == doctest::Approx(0.5));
  CHECK(t.exps.alpha == doctest::Approx(0.125));
  CHECK(t.regime_csd == "easy");
  CHECK(threshold_table_from_json(to_json(t)) == t);

  const ThresholdTable zero = threshold_table(100, 10, 1, 0.0, 0.5);
  CHECK_FALSE(zero.tau_sum.has_value());
  CHECK(std::isinf(zero.exps.alpha));
  CHECK(threshold_table_from_json(to_json(zero)) == zero);
  CHECK(threshold_table(100, 1, 1, 1.0, 0.5).regime_sd == "n/a");

  double previous = 0.0;
  for (int n = 16; n <= 4096; n *= 2) {
    const double tau = threshold_table(n, 4, 1, 1.0, 0.5).tau_scan_csd;
    CHECK(tau > previous);
    previous = tau;
  }
}

TEST_CASE("exponents") {
  const Exponents e = exponents(100, 10, 1, 0.1);
  CHECK(e.alpha == doctest::Approx(0.5));
  CHECK(e.beta == doctest::Approx(0.5));
  CHECK(e.gamma_m == 0.0);
  CHECK_FALSE(std::signbit(exponents(100, 10, 1, 1.0).alpha));
  CHECK_THROWS_AS(exponents(1, 1, 1, 1.0), Error);
}
