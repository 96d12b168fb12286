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

// Closed-form and Monte Carlo quantities behind the detection and recovery
// limits: chi-square divergence of the Gaussian pair, the distribution and
// moments of |K cap K'| for independent supports, second-moment and
// low-degree bounds, and the exponent-space regime classifier.

#ifndef PSM_THEORY_HPP_
#define PSM_THEORY_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "psm/model.hpp"

namespace psm::theory {

// kStandard: chi2(N(lambda,1) || N(0,1)) = exp(lambda^2) - 1.
// kPaper:    half of that, for reproducing bounds stated with the 1/2 factor.
enum class Chi2Convention { kStandard, kPaper };

// Throws Error(kBudget) when lambda^2 > 700 (exp saturates).
double chi_square_gaussian(double lambda,
                           Chi2Convention convention = Chi2Convention::kStandard);

// Distribution of an overlap count on {0, ..., k}.
struct OverlapPMF {
  std::vector<double> probs;

  double mean() const;
  double moment(int d) const;  // E[Z^d]
};

// |S cap S'| for two uniform cyclic runs of length k on Z_n:
// P(0) = (n-2k+1)/n, P(z) = 2/n for 0 < z < k, P(k) = 1/n.
// Requires 2k <= n + 1.
OverlapPMF overlap_pmf_consecutive(int n, int k);

// |S cap S'| for two uniform k-subsets of [n]: Hypergeometric(n, k, k),
// evaluated through log-gamma.
OverlapPMF overlap_pmf_hypergeometric(int n, int k);

// E|K cap K'|^d for m = 1. Row and column overlaps are independent with the
// same law, so the moment is (E Z^d)^2.
double overlap_moment_exact_single(int n, int k, int d, Variant variant);

enum class MomentMethod { kExactSingle, kMonteCarlo };

struct OverlapMoments {
  std::vector<double> values;     // mu_d for d = 0..D
  std::vector<double> std_errors; // zero for exact
  MomentMethod method = MomentMethod::kExactSingle;

  int max_degree() const { return static_cast<int>(values.size()) - 1; }
};

OverlapMoments overlap_moments_exact_single(int n, int k, int max_degree,
                                            Variant variant);

// Plug-in estimates of E|K cap K'|^d from `trials` independent support pairs
// drawn from config (lambda is ignored). Requires trials >= 1000.
OverlapMoments overlap_moment_mc(const ModelConfig& config, int max_degree,
                                 std::int64_t trials, RandomStream& rng);

// sum_{d=0}^{D} lambda^{2d} / d! * mu_d. Throws Error(kBudget) on overflow.
double low_degree_norm_sq(double lambda, const OverlapMoments& moments);

using BellInt = unsigned __int128;
inline constexpr int kMaxExactBell = 25;

// Bell triangle in 128-bit integers; Error(kBudget) for d > 25.
BellInt bell_number(int d);

struct BellValue {
  double value = 0.0;
  bool exact = true;  // false beyond d = 25 (floating Bell triangle)
};
BellValue bell_number_real(int d);

struct BellBound {
  double value = 1.0;
  bool exact_bell = true;
};

// 1 + sum_{d=1}^{D} lambda^{2d}/d! * B_d^2 * max(q, q^d), q = m^2 k^4 / n^2.
BellBound low_degree_bell_bound(double lambda, int n, int k, int m,
                                int max_degree);

// [1 + (4k^2/n^2)(exp(chi2 k^2) - 1)]^{m^2}. Error(kBudget) if chi2 k^2 > 700.
double second_moment_bound_consecutive(
    double lambda, int n, int k, int m,
    Chi2Convention convention = Chi2Convention::kStandard);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t trials = 0;
};

// Plug-in mean of (1 + chi2)^{|K cap K'|} over independent support pairs.
McEstimate second_moment_mc(double lambda, const ModelConfig& config,
                            std::int64_t trials, RandomStream& rng,
                            Chi2Convention convention = Chi2Convention::kStandard);

enum class Problem { kSD, kSR, kCSD, kCSR };
enum class RegimeLabel { kImpossible, kHard, kEasy, kBoundary };

std::string_view to_string(Problem p);
std::string_view to_string(RegimeLabel r);
std::optional<Problem> parse_problem(std::string_view s);

// Region edges in alpha for fixed (beta, gamma_m): Easy below easy_below,
// Impossible above impossible_above, Hard in between (empty when equal).
struct RegimeEdges {
  double easy_below = 0.0;
  double impossible_above = 0.0;
};
RegimeEdges regime_edges(double beta, double gamma_m, Problem problem);

inline constexpr double kRegimeTolerance = 1e-9;

// Exponent parametrization k = n^beta, lambda = n^-alpha, m = n^gamma_m with
// poly-log factors ignored. Requires alpha >= 0 (infinity allowed),
// 0 < beta < 1, gamma_m >= 0; Error(kConfig) otherwise. Points within
// `tolerance` of an edge are kBoundary.
RegimeLabel regime_classify(double alpha, double beta, double gamma_m,
                            Problem problem, double tolerance = kRegimeTolerance);

struct Exponents {
  double alpha = 0.0;  // -ln(lambda)/ln(n), +inf at lambda = 0
  double beta = 0.0;   // ln(k)/ln(n)
  double gamma_m = 0.0;

  friend bool operator==(const Exponents&, const Exponents&) = default;
};
// Requires n >= 2.
Exponents exponents(int n, int k, int m, double lambda);

struct ThresholdTable {
  int n = 0, k = 0, m = 0;
  double lambda = 0.0;
  double delta = 0.0;
  std::optional<double> tau_sum;  // absent at lambda = 0
  double tau_scan_sd = 0.0;
  double tau_scan_csd = 0.0;
  double peel_lambda_min = 0.0;   // sqrt(24 ln n / k)
  std::optional<double> chi2;     // at lambda; absent on saturation
  double chi2_ceiling_sd = 0.0;   // min{1/k, n^2 ln(1+delta) / (2 m^2 k^4)}
  double chi2_ceiling_csd = 0.0;  // ln(1 + n^2 ln(1+delta) / (4 k^2 m^2)) / k^2
  double sum_risk_bound = 0.0;    // exp(-m^2 k^4 lambda^2 / (8 n^2))
  double csd_type1_bound = 0.0;   // n^{-delta/2} / 2
  Exponents exps;
  // Labels per problem, "n/a" outside the exponent domain.
  std::string regime_sd, regime_sr, regime_csd, regime_csr;
  Chi2Convention convention = Chi2Convention::kStandard;

  friend bool operator==(const ThresholdTable&, const ThresholdTable&) = default;
};

ThresholdTable threshold_table(int n, int k, int m, double lambda, double delta,
                               Chi2Convention convention = Chi2Convention::kStandard);

nlohmann::json to_json(const ThresholdTable& table);
ThresholdTable threshold_table_from_json(const nlohmann::json& j);

}  // namespace psm::theory

#endif  // PSM_THEORY_HPP_
