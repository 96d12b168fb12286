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

// Planted-submatrix model: parameters, support ensembles and observation
// synthesis.
//
// An n x n observation is X = lambda * 1{K} + Z with Z i.i.d. N(0,1) and K a
// union of m pairwise product-disjoint k x k rectangles. In the arbitrary
// variant each rectangle is S x T for any k-subsets S, T of [n]; in the
// consecutive variant S and T are runs of k adjacent indices. All indices are
// 0-based.

#ifndef PSM_MODEL_HPP_
#define PSM_MODEL_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psm/random.hpp"

namespace psm {

enum class Variant { kArbitrary, kConsecutive };
enum class Placement { kUniform, kSeparated };
// Position convention for consecutive runs: kLinear admits n - k + 1 starts,
// kCyclic admits n starts and lets a run wrap past n - 1 back to 0.
enum class Boundary { kLinear, kCyclic };

std::string_view to_string(Variant v);
std::string_view to_string(Placement p);
std::string_view to_string(Boundary b);
std::optional<Variant> parse_variant(std::string_view s);
std::optional<Placement> parse_placement(std::string_view s);
std::optional<Boundary> parse_boundary(std::string_view s);

struct ModelConfig {
  int n = 1;
  int k = 1;
  int m = 1;
  double lambda = 0.0;
  Variant variant = Variant::kConsecutive;
  Placement placement = Placement::kUniform;
  Boundary boundary = Boundary::kLinear;

  // Throws Error(kConfig) naming the first violated constraint.
  void validate() const;
};

// A set of k indices along one axis, stored sorted.
class AxisSet {
 public:
  static AxisSet Interval(int start, int length, int n,
                          Boundary boundary = Boundary::kLinear);
  static AxisSet Subset(std::vector<int> indices, int n);

  bool is_interval() const { return interval_; }
  // Interval start (may exceed the last index for wrapped cyclic runs);
  // for subsets, the smallest index.
  int start() const { return start_; }
  int size() const { return static_cast<int>(indices_.size()); }
  int extent() const { return n_; }
  std::span<const int> indices() const { return indices_; }
  bool contains(int i) const;
  // True when the indices form one run of adjacent positions.
  bool is_contiguous(Boundary boundary) const;

  friend bool operator==(const AxisSet& a, const AxisSet& b) {
    return a.n_ == b.n_ && a.indices_ == b.indices_;
  }

 private:
  AxisSet() = default;
  std::vector<int> indices_;
  int start_ = 0;
  int n_ = 0;
  bool interval_ = false;
};

int intersection_size(const AxisSet& a, const AxisSet& b);

struct Rectangle {
  AxisSet rows;
  AxisSet cols;

  // k x k consecutive window with top-left corner (row, col).
  static Rectangle Window(int row, int col, int k, int n,
                          Boundary boundary = Boundary::kLinear);

  std::int64_t cells() const {
    return static_cast<std::int64_t>(rows.size()) * cols.size();
  }
  bool contains(int r, int c) const {
    return rows.contains(r) && cols.contains(c);
  }

  friend bool operator==(const Rectangle&, const Rectangle&) = default;
};

// |(rows_a x cols_a) cap (rows_b x cols_b)|.
std::int64_t overlap(const Rectangle& a, const Rectangle& b);

struct ValidationResult {
  bool ok = true;
  std::string violation;  // empty when ok

  explicit operator bool() const { return ok; }
};

// Checks count, sizes, index range, consecutiveness (consecutive variant),
// pairwise product-disjointness and, under kSeparated, the separation rule.
// Reports the first violation found in that order.
ValidationResult validate_support(std::span<const Rectangle> candidate,
                                  const ModelConfig& config);

// Latent support K: m product-disjoint rectangles. Immutable.
class SupportSet {
 public:
  // Throws Error(kConfig) if validate_support fails.
  SupportSet(std::vector<Rectangle> rectangles, ModelConfig config);

  const std::vector<Rectangle>& rectangles() const { return rectangles_; }
  const ModelConfig& config() const { return config_; }
  int n() const { return config_.n; }
  std::int64_t cell_count() const;
  bool contains(int r, int c) const;

 private:
  std::vector<Rectangle> rectangles_;
  ModelConfig config_;
};

// Exact |K cap K'| by summing |S_i cap S'_j| * |T_i cap T'_j| over rectangle
// pairs; never materializes masks.
std::int64_t overlap(const SupportSet& a, const SupportSet& b);

struct CellMask {
  int n = 0;
  std::vector<std::uint8_t> bits;  // row-major, 1 = planted cell

  std::int64_t popcount() const;
  std::uint8_t operator()(int r, int c) const {
    return bits[static_cast<std::size_t>(r) * n + c];
  }
};

CellMask cell_mask(const SupportSet& support);

struct Provenance {
  std::uint64_t master_seed = 0;
  std::uint64_t trial = 0;
  std::optional<SupportSet> support;
};

// Dense n x n real matrix, row-major, finite everywhere.
class Observation {
 public:
  Observation(int n, std::vector<double> data,
              std::optional<Provenance> provenance = std::nullopt);

  int n() const { return n_; }
  std::span<const double> data() const { return data_; }
  double operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * n_ + c];
  }
  const std::optional<Provenance>& provenance() const { return provenance_; }

 private:
  int n_;
  std::vector<double> data_;
  std::optional<Provenance> provenance_;
};

inline constexpr std::uint64_t kDefaultRejectionBudget = 1'000'000;

// Uniform over ordered m-tuples of product-disjoint rectangles (rejection
// sampling of i.i.d. rectangles). Under kSeparated the separation rule is
// part of the acceptance test. Throws Error(kBudget) after max_attempts
// rejected tuples.
SupportSet sample_support(const ModelConfig& config, RandomStream& rng,
                          std::uint64_t max_attempts = kDefaultRejectionBudget);

// Draws one 64-bit noise key from rng, fills Z with fill_standard_normal and
// adds lambda on support cells.
Observation sample_observation(const SupportSet& support, double lambda,
                               RandomStream& rng);

// Same draw order as sample_observation, so with lambda = 0 and equal rng
// state the two are bit-identical.
Observation sample_null(int n, RandomStream& rng);

}  // namespace psm

#endif  // PSM_MODEL_HPP_
