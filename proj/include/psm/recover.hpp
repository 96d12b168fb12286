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

// Support recovery for the consecutive model (linear boundary).
//
// All estimators maximize window sums of X over k x k consecutive windows;
// they differ in how m windows are combined:
//   ml_exhaustive  joint maximum over product-disjoint m-tuples (~n^{2m})
//   peel           m greedy scans, each excluding windows that touch cells
//                  already chosen
//   modified_peel  take windows in decreasing order of their sum until the
//                  union of chosen cells is exactly a disjoint union of m
//                  k x k blocks

#ifndef PSM_RECOVER_HPP_
#define PSM_RECOVER_HPP_

#include <cstdint>
#include <optional>
#include <string_view>

#include "json.hpp"
#include "psm/model.hpp"

namespace psm::recover {

enum class Estimator { kML, kPeel, kModifiedPeel };
std::string_view to_string(Estimator e);
std::optional<Estimator> parse_estimator(std::string_view s);

struct RecoveryResult {
  SupportSet estimate;
  int steps = 0;
  std::optional<bool> exact;
  std::optional<std::int64_t> overlap_cells;
  // modified_peel only: the greedy union overshot m*k^2 cells without
  // forming m blocks, and the estimate came from peel() instead.
  bool fallback = false;
};

inline constexpr std::uint64_t kDefaultMLBudget = 1'000'000'000;

// Config under which estimates are validated: consecutive, uniform, linear.
ModelConfig estimate_config(int n, int k, int m);

// Throws Error(kBudget) when (n-k+1)^{2m} > max_tuples. Ties go to the
// lexicographically smallest sorted list of corners.
SupportSet ml_exhaustive(const Observation& x, int k, int m,
                         std::uint64_t max_tuples = kDefaultMLBudget);

// Masking of previously chosen cells is realized by skipping every window
// that intersects them, which is what a -inf entry would do to the argmax.
SupportSet peel(const Observation& x, int k, int m);

RecoveryResult modified_peel(const Observation& x, int k, int m);

// Cell sets identical; rectangle order is irrelevant.
bool exact_match(const SupportSet& estimate, const SupportSet& truth);
double overlap_fraction(const SupportSet& estimate, const SupportSet& truth);

RecoveryResult estimate_support(Estimator estimator, const Observation& x,
                                int k, int m,
                                std::uint64_t max_tuples = kDefaultMLBudget);

// Sample truth and observation from config, estimate, and score.
RecoveryResult recovery_trial(const ModelConfig& config, Estimator estimator,
                              RandomStream& rng,
                              std::uint64_t max_tuples = kDefaultMLBudget);

// {estimator, corners, steps, exact, overlap_cells}
nlohmann::json to_json(const RecoveryResult& result, Estimator estimator);

}  // namespace psm::recover

#endif  // PSM_RECOVER_HPP_
