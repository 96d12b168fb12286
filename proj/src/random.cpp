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

#include "psm/random.hpp"

#include <cmath>
#include <numbers>

namespace psm {

std::uint64_t RandomStream::uniform_index(std::uint64_t bound) {
  if (bound <= 1) return 0;
  unsigned __int128 product =
      static_cast<unsigned __int128>(next_u64()) * bound;
  auto low = static_cast<std::uint64_t>(product);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      product = static_cast<unsigned __int128>(next_u64()) * bound;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::uint64_t>(product >> 64);
}

double RandomStream::normal() {
  const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

void fill_standard_normal(std::uint64_t key, std::span<double> out) {
  const std::size_t size = out.size();
  const std::size_t pairs = (size + 1) / 2;
  for (std::size_t j = 0; j < pairs; ++j) {
    const double u1 =
        (static_cast<double>(counter_word(key, 2 * j) >> 11) + 1.0) * 0x1.0p-53;
    const double u2 =
        static_cast<double>(counter_word(key, 2 * j + 1) >> 11) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[2 * j] = radius * std::cos(angle);
    if (2 * j + 1 < size) out[2 * j + 1] = radius * std::sin(angle);
  }
}

}  // namespace psm
