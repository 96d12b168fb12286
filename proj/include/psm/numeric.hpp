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

#ifndef PSM_NUMERIC_HPP_
#define PSM_NUMERIC_HPP_

#include <cstdint>

namespace psm {

// log C(n, k) without overflow. Sums log((n-k+i)/i) when min(k, n-k) is
// small (keeps ~1e-14 relative accuracy where lgamma would cancel), and
// falls back to lgamma otherwise. Requires 0 <= k <= n.
double log_binomial(std::int64_t n, std::int64_t k);

// Exact C(n, k) as a double when it is below 2^53, else the rounded value.
double binomial(std::int64_t n, std::int64_t k);

}  // namespace psm

#endif  // PSM_NUMERIC_HPP_
