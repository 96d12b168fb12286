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

#include "psm/numeric.hpp"

#include <algorithm>
#include <cmath>

#include "psm/error.hpp"

namespace psm {

double log_binomial(std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0 || k > n)
    Fail(ErrorCode::kConfig, "log_binomial requires 0 <= k <= n");
  const std::int64_t j = std::min(k, n - k);
  if (j == 0) return 0.0;
  if (j <= 256) {
    double acc = 0.0;
    const double base = static_cast<double>(n - j);
    for (std::int64_t i = 1; i <= j; ++i)
      acc += std::log1p(base / static_cast<double>(i));
    return acc;
  }
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

double binomial(std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0 || k > n) return 0.0;
  const std::int64_t j = std::min(k, n - k);
  double acc = 1.0;
  for (std::int64_t i = 1; i <= j; ++i) {
    acc = acc * static_cast<double>(n - j + i) / static_cast<double>(i);
    if (acc > 0x1.0p60) return std::round(std::exp(log_binomial(n, k)));
  }
  return std::round(acc);
}

}  // namespace psm
