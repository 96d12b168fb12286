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

#include "psm/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "psm/detect.hpp"
#include "psm/error.hpp"
#include "psm/numeric.hpp"

namespace psm::theory {

namespace {

constexpr double kExpCeiling = 700.0;

}  // namespace

double chi_square_gaussian(double lambda, Chi2Convention convention) {
  if (!std::isfinite(lambda)) Fail(ErrorCode::kConfig, "lambda must be finite");
  const double l2 = lambda * lambda;
  if (l2 > kExpCeiling)
    Fail(ErrorCode::kBudget, "chi-square saturates: lambda^2 > 700");
  const double value = std::expm1(l2);
  return convention == Chi2Convention::kPaper ? 0.5 * value : value;
}

double OverlapPMF::mean() const { return moment(1); }

double OverlapPMF::moment(int d) const {
  double acc = 0.0;
  for (std::size_t z = 0; z < probs.size(); ++z)
    acc += probs[z] * std::pow(static_cast<double>(z), d);
  return acc;
}

OverlapPMF overlap_pmf_consecutive(int n, int k) {
  if (n < 1 || k < 1 || k > n)
    Fail(ErrorCode::kConfig, "overlap pmf requires 1 <= k <= n");
  if (2 * k > n + 1)
    Fail(ErrorCode::kConfig, "consecutive overlap pmf requires 2k <= n + 1");
  const double nn = static_cast<double>(n);
  OverlapPMF pmf;
  pmf.probs.assign(k + 1, 2.0 / nn);
  pmf.probs[0] = static_cast<double>(n - 2 * k + 1) / nn;
  pmf.probs[k] = 1.0 / nn;
  return pmf;
}

OverlapPMF overlap_pmf_hypergeometric(int n, int k) {
  if (n < 1 || k < 1 || k > n)
    Fail(ErrorCode::kConfig, "overlap pmf requires 1 <= k <= n");
  OverlapPMF pmf;
  pmf.probs.assign(k + 1, 0.0);
  const double log_total = log_binomial(n, k);
  // z ranges over max(0, 2k - n) .. k.
  for (int z = std::max(0, 2 * k - n); z <= k; ++z) {
    pmf.probs[z] =
        std::exp(log_binomial(k, z) + log_binomial(n - k, k - z) - log_total);
  }
  return pmf;
}

double overlap_moment_exact_single(int n, int k, int d, Variant variant) {
  if (d < 0 || d > 64) Fail(ErrorCode::kConfig, "moment degree must be in [0, 64]");
  if (d == 0) return 1.0;
  const OverlapPMF pmf = variant == Variant::kConsecutive
                             ? overlap_pmf_consecutive(n, k)
                             : overlap_pmf_hypergeometric(n, k);
  const double one_axis = pmf.moment(d);
  return one_axis * one_axis;
}

OverlapMoments overlap_moments_exact_single(int n, int k, int max_degree,
                                            Variant variant) {
  OverlapMoments moments;
  moments.method = MomentMethod::kExactSingle;
  for (int d = 0; d <= max_degree; ++d)
    moments.values.push_back(overlap_moment_exact_single(n, k, d, variant));
  moments.std_errors.assign(moments.values.size(), 0.0);
  return moments;
}

OverlapMoments overlap_moment_mc(const ModelConfig& config, int max_degree,
                                 std::int64_t trials, RandomStream& rng) {
  if (trials < 1000) Fail(ErrorCode::kConfig, "overlap_moment_mc needs >= 1000 trials");
  if (max_degree < 0 || max_degree > 64)
    Fail(ErrorCode::kConfig, "moment degree must be in [0, 64]");
  const int degrees = max_degree + 1;
  std::vector<double> sum(degrees, 0.0), sum_sq(degrees, 0.0);
  for (std::int64_t t = 0; t < trials; ++t) {
    const SupportSet a = sample_support(config, rng);
    const SupportSet b = sample_support(config, rng);
    const double o = static_cast<double>(overlap(a, b));
    double power = 1.0;
    for (int d = 0; d < degrees; ++d) {
      sum[d] += power;
      sum_sq[d] += power * power;
      power *= o;
    }
  }
  OverlapMoments moments;
  moments.method = MomentMethod::kMonteCarlo;
  const double count = static_cast<double>(trials);
  for (int d = 0; d < degrees; ++d) {
    const double mean = sum[d] / count;
    const double var = std::max(0.0, (sum_sq[d] - count * mean * mean) / (count - 1.0));
    moments.values.push_back(mean);
    moments.std_errors.push_back(std::sqrt(var / count));
  }
  // Exact: the d = 0 term is identically one.
  moments.values[0] = 1.0;
  moments.std_errors[0] = 0.0;
  return moments;
}

double low_degree_norm_sq(double lambda, const OverlapMoments& moments) {
  if (!std::isfinite(lambda) || lambda < 0.0)
    Fail(ErrorCode::kConfig, "lambda must be finite and nonnegative");
  double coefficient = 1.0;  // lambda^{2d} / d!
  double total = 0.0;
  for (int d = 0; d <= moments.max_degree(); ++d) {
    if (d > 0) coefficient *= lambda * lambda / d;
    total += coefficient * moments.values[d];
  }
  if (!std::isfinite(total))
    Fail(ErrorCode::kBudget, "low-degree norm overflows double precision");
  return total;
}

BellInt bell_number(int d) {
  if (d < 0) Fail(ErrorCode::kConfig, "Bell number index must be nonnegative");
  if (d > kMaxExactBell)
    Fail(ErrorCode::kBudget, "exact Bell numbers are limited to d <= 25");
  // Bell triangle: each row starts with the last entry of the previous row;
  // B_d is the first entry of row d.
  std::vector<BellInt> row{1};
  for (int i = 0; i < d; ++i) {
    std::vector<BellInt> next{row.back()};
    for (BellInt v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.front();
}

BellValue bell_number_real(int d) {
  if (d <= kMaxExactBell) return BellValue{static_cast<double>(bell_number(d)), true};
  std::vector<double> row{1.0};
  for (int i = 0; i < d; ++i) {
    std::vector<double> next{row.back()};
    for (double v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return BellValue{row.front(), false};
}

BellBound low_degree_bell_bound(double lambda, int n, int k, int m, int max_degree) {
  if (!std::isfinite(lambda) || lambda < 0.0)
    Fail(ErrorCode::kConfig, "lambda must be finite and nonnegative");
  if (n < 1 || k < 1 || m < 1 || max_degree < 0)
    Fail(ErrorCode::kConfig, "Bell bound requires positive n, k, m and D >= 0");
  const double kk = static_cast<double>(k);
  const double q = static_cast<double>(m) * m * kk * kk * kk * kk /
                   (static_cast<double>(n) * n);
  BellBound bound;
  double coefficient = 1.0;
  for (int d = 1; d <= max_degree; ++d) {
    coefficient *= lambda * lambda / d;
    const BellValue bell = bell_number_real(d);
    bound.exact_bell = bound.exact_bell && bell.exact;
    bound.value += coefficient * bell.value * bell.value * std::max(q, std::pow(q, d));
  }
  if (!std::isfinite(bound.value))
    Fail(ErrorCode::kBudget, "Bell bound overflows double precision");
  return bound;
}

double second_moment_bound_consecutive(double lambda, int n, int k, int m,
                                       Chi2Convention convention) {
  if (n < 1 || k < 1 || m < 1) Fail(ErrorCode::kConfig, "n, k, m must be positive");
  const double chi2 = chi_square_gaussian(lambda, convention);
  const double kk = static_cast<double>(k);
  const double exponent = chi2 * kk * kk;
  if (exponent > kExpCeiling)
    Fail(ErrorCode::kBudget, "second-moment bound saturates: chi2 * k^2 > 700");
  const double nn = static_cast<double>(n);
  const double base = 1.0 + 4.0 * kk * kk / (nn * nn) * std::expm1(exponent);
  return std::pow(base, static_cast<double>(m) * m);
}

McEstimate second_moment_mc(double lambda, const ModelConfig& config,
                            std::int64_t trials, RandomStream& rng,
                            Chi2Convention convention) {
  if (trials < 2) Fail(ErrorCode::kConfig, "second_moment_mc needs >= 2 trials");
  const double log_base = std::log1p(chi_square_gaussian(lambda, convention));
  double sum = 0.0, sum_sq = 0.0;
  for (std::int64_t t = 0; t < trials; ++t) {
    const SupportSet a = sample_support(config, rng);
    const SupportSet b = sample_support(config, rng);
    const double value = std::exp(log_base * static_cast<double>(overlap(a, b)));
    sum += value;
    sum_sq += value * value;
  }
  const double count = static_cast<double>(trials);
  const double mean = sum / count;
  const double var = std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0));
  if (!std::isfinite(mean)) Fail(ErrorCode::kBudget, "second moment overflows");
  return McEstimate{mean, std::sqrt(var / count), trials};
}

std::string_view to_string(Problem p) {
  switch (p) {
    case Problem::kSD:
      return "SD";
    case Problem::kSR:
      return "SR";
    case Problem::kCSD:
      return "CSD";
    case Problem::kCSR:
      return "CSR";
  }
  return "?";
}

std::string_view to_string(RegimeLabel r) {
  switch (r) {
    case RegimeLabel::kImpossible:
      return "impossible";
    case RegimeLabel::kHard:
      return "hard";
    case RegimeLabel::kEasy:
      return "easy";
    case RegimeLabel::kBoundary:
      return "boundary";
  }
  return "?";
}

std::optional<Problem> parse_problem(std::string_view s) {
  if (s == "SD" || s == "sd") return Problem::kSD;
  if (s == "SR" || s == "sr") return Problem::kSR;
  if (s == "CSD" || s == "csd") return Problem::kCSD;
  if (s == "CSR" || s == "csr") return Problem::kCSR;
  return std::nullopt;
}

// In log_n units: n/(m k^2) -> 1 - gamma - 2 beta, 1/sqrt(k) -> -beta/2,
// sqrt(n)/k -> 1/2 - beta, 1/k -> -beta, lambda -> -alpha.
//   SD   impossible: lambda << n/(mk^2) ^ k^{-1/2}; easy: lambda >> 1 ^ n/(mk^2)
//   SR   impossible: lambda << k^{-1/2};            easy: lambda >> 1 ^ sqrt(n)/k
//   CSD  impossible: lambda << 1/k;                 easy: lambda >> 1/k
//   CSR  impossible: lambda << k^{-1/2};            easy: lambda >> k^{-1/2}
RegimeEdges regime_edges(double beta, double gamma_m, Problem problem) {
  switch (problem) {
    case Problem::kSD: {
      const double sum_edge = 2.0 * beta + gamma_m - 1.0;
      return RegimeEdges{std::max(0.0, sum_edge), std::max(sum_edge, beta / 2.0)};
    }
    case Problem::kSR:
      return RegimeEdges{std::max(0.0, beta - 0.5), beta / 2.0};
    case Problem::kCSD:
      return RegimeEdges{beta, beta};
    case Problem::kCSR:
      return RegimeEdges{beta / 2.0, beta / 2.0};
  }
  Fail(ErrorCode::kInternal, "unknown problem");
}

RegimeLabel regime_classify(double alpha, double beta, double gamma_m,
                            Problem problem, double tolerance) {
  if (std::isnan(alpha) || alpha < 0.0)
    Fail(ErrorCode::kConfig, "alpha must be >= 0");
  if (!(beta > 0.0 && beta < 1.0)) Fail(ErrorCode::kConfig, "beta must lie in (0, 1)");
  if (!(gamma_m >= 0.0) || !std::isfinite(gamma_m))
    Fail(ErrorCode::kConfig, "gamma_m must be finite and >= 0");
  const RegimeEdges edges = regime_edges(beta, gamma_m, problem);
  if (std::isfinite(alpha) && (std::abs(alpha - edges.easy_below) <= tolerance ||
                               std::abs(alpha - edges.impossible_above) <= tolerance))
    return RegimeLabel::kBoundary;
  if (alpha < edges.easy_below) return RegimeLabel::kEasy;
  if (alpha > edges.impossible_above) return RegimeLabel::kImpossible;
  return RegimeLabel::kHard;
}

Exponents exponents(int n, int k, int m, double lambda) {
  if (n < 2) Fail(ErrorCode::kConfig, "exponents need n >= 2");
  const double log_n = std::log(static_cast<double>(n));
  Exponents e;
  // + 0.0 turns -0 at lambda = 1 into +0.
  e.alpha = lambda > 0.0 ? -std::log(lambda) / log_n + 0.0
                         : std::numeric_limits<double>::infinity();
  e.beta = std::log(static_cast<double>(k)) / log_n;
  e.gamma_m = std::log(static_cast<double>(m)) / log_n;
  return e;
}

namespace {

std::string label_or_na(const Exponents& e, Problem p) {
  try {
    return std::string(to_string(regime_classify(e.alpha, e.beta, e.gamma_m, p)));
  } catch (const Error&) {
    return "n/a";
  }
}

}  // namespace

ThresholdTable threshold_table(int n, int k, int m, double lambda, double delta,
                               Chi2Convention convention) {
  ModelConfig config;
  config.n = n;
  config.k = k;
  config.m = m;
  config.lambda = lambda;
  config.validate();
  if (!(delta >= 0.0) || !std::isfinite(delta))
    Fail(ErrorCode::kConfig, "delta must be finite and nonnegative");

  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  const double mm = static_cast<double>(m);
  const double log_1pd = std::log1p(delta);

  ThresholdTable t;
  t.n = n;
  t.k = k;
  t.m = m;
  t.lambda = lambda;
  t.delta = delta;
  t.convention = convention;
  if (lambda > 0.0) t.tau_sum = detect::tau_sum(config);
  t.tau_scan_sd = detect::tau_scan_sd(n, k, delta);
  t.tau_scan_csd = detect::tau_scan_csd(n, k, delta);
  t.peel_lambda_min = std::sqrt(24.0 * std::log(nn) / kk);
  if (lambda * lambda <= kExpCeiling) t.chi2 = chi_square_gaussian(lambda, convention);
  t.chi2_ceiling_sd =
      std::min(1.0 / kk, nn * nn * log_1pd / (2.0 * mm * mm * kk * kk * kk * kk));
  t.chi2_ceiling_csd = std::log1p(nn * nn * log_1pd / (4.0 * kk * kk * mm * mm)) / (kk * kk);
  t.sum_risk_bound = std::exp(-mm * mm * kk * kk * kk * kk * lambda * lambda / (8.0 * nn * nn));
  t.csd_type1_bound = 0.5 * std::pow(nn, -delta / 2.0);
  if (n >= 2) {
    t.exps = exponents(n, k, m, lambda);
    t.regime_sd = label_or_na(t.exps, Problem::kSD);
    t.regime_sr = label_or_na(t.exps, Problem::kSR);
    t.regime_csd = label_or_na(t.exps, Problem::kCSD);
    t.regime_csr = label_or_na(t.exps, Problem::kCSR);
  } else {
    t.regime_sd = t.regime_sr = t.regime_csd = t.regime_csr = "n/a";
  }
  return t;
}

namespace {

nlohmann::json number_or_null(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

double read_number(const nlohmann::json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    Fail(ErrorCode::kConfig, "unexpected string in numeric field: " + s);
  }
  return v.get<double>();
}

std::optional<double> read_optional(const nlohmann::json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

}  // namespace

nlohmann::json to_json(const ThresholdTable& t) {
  return nlohmann::json{
      {"n", t.n},
      {"k", t.k},
      {"m", t.m},
      {"lambda", t.lambda},
      {"delta", t.delta},
      {"chi2_convention", t.convention == Chi2Convention::kPaper ? "paper" : "standard"},
      {"tau_sum", number_or_null(t.tau_sum)},
      {"tau_scan_sd", t.tau_scan_sd},
      {"tau_scan_csd", t.tau_scan_csd},
      {"peel_lambda_min", t.peel_lambda_min},
      {"chi2", number_or_null(t.chi2)},
      {"chi2_ceiling_sd", t.chi2_ceiling_sd},
      {"chi2_ceiling_csd", t.chi2_ceiling_csd},
      {"sum_risk_bound", t.sum_risk_bound},
      {"csd_type1_bound", t.csd_type1_bound},
      {"alpha", finite_or_string(t.exps.alpha)},
      {"beta", t.exps.beta},
      {"gamma_m", t.exps.gamma_m},
      {"regime_sd", t.regime_sd},
      {"regime_sr", t.regime_sr},
      {"regime_csd", t.regime_csd},
      {"regime_csr", t.regime_csr},
  };
}

ThresholdTable threshold_table_from_json(const nlohmann::json& j) {
  ThresholdTable t;
  try {
    t.n = j.at("n").get<int>();
    t.k = j.at("k").get<int>();
    t.m = j.at("m").get<int>();
    t.lambda = j.at("lambda").get<double>();
    t.delta = j.at("delta").get<double>();
    t.convention = j.at("chi2_convention").get<std::string>() == "paper"
                       ? Chi2Convention::kPaper
                       : Chi2Convention::kStandard;
    t.tau_sum = read_optional(j.at("tau_sum"));
    t.tau_scan_sd = j.at("tau_scan_sd").get<double>();
    t.tau_scan_csd = j.at("tau_scan_csd").get<double>();
    t.peel_lambda_min = j.at("peel_lambda_min").get<double>();
    t.chi2 = read_optional(j.at("chi2"));
    t.chi2_ceiling_sd = j.at("chi2_ceiling_sd").get<double>();
    t.chi2_ceiling_csd = j.at("chi2_ceiling_csd").get<double>();
    t.sum_risk_bound = j.at("sum_risk_bound").get<double>();
    t.csd_type1_bound = j.at("csd_type1_bound").get<double>();
    t.exps.alpha = read_number(j.at("alpha"));
    t.exps.beta = j.at("beta").get<double>();
    t.exps.gamma_m = j.at("gamma_m").get<double>();
    t.regime_sd = j.at("regime_sd").get<std::string>();
    t.regime_sr = j.at("regime_sr").get<std::string>();
    t.regime_csd = j.at("regime_csd").get<std::string>();
    t.regime_csr = j.at("regime_csr").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kConfig, std::string("malformed threshold table: ") + e.what());
  }
  return t;
}

}  // namespace psm::theory
