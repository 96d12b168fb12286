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

// Counter-based random streams.
//
// Every random quantity in the library is a pure function of a 64-bit key and
// a position counter, so that trials and cells can be generated in any order
// (or in parallel) and still reproduce bit-for-bit. The construction is the
// SplitMix64 sequence made indexable:
//
//   word(key, i) = mix64(key + (i + 1) * 0x9E3779B97F4A7C15)
//
// where mix64 is the SplitMix64 finalizer. Per-trial keys are derived with
// derive_seed() below; see its comment for the exact recipe.

#ifndef PSM_RANDOM_HPP_
#define PSM_RANDOM_HPP_

#include <cstdint>
#include <span>

namespace psm {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t counter_word(std::uint64_t key, std::uint64_t index) {
  return mix64(key + (index + 1) * kGolden);
}

// mix64(mix64(mix64(master) ^ tag * C1) ^ index * C2), with
// C1 = 0xD1B54A32D192ED03 and C2 = 0x8CB92BA72F3D8DD7.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                                    std::uint64_t index) {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ (tag * 0xD1B54A32D192ED03ULL));
  return mix64(h ^ (index * 0x8CB92BA72F3D8DD7ULL));
}

// Sequential view over one counter-based stream.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return counter_word(key_, counter_++); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Unbiased uniform integer in [0, bound), Lemire's multiply-and-reject.
  std::uint64_t uniform_index(std::uint64_t bound);

  // Standard normal by Box-Muller (cosine branch only).
  double normal();

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Fills out[i] with i.i.d. N(0,1) values. Pair j = (out[2j], out[2j+1]) is
// the Box-Muller transform of u1 = ((word(key,2j) >> 11) + 1) * 2^-53 and
// u2 = (word(key,2j+1) >> 11) * 2^-53:
//   out[2j] = r cos(2 pi u2), out[2j+1] = r sin(2 pi u2), r = sqrt(-2 ln u1).
// The value at each index depends only on (key, index).
void fill_standard_normal(std::uint64_t key, std::span<double> out);

}  // namespace psm

#endif  // PSM_RANDOM_HPP_
