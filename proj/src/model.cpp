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

#include "psm/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "psm/error.hpp"

namespace psm {

std::string_view to_string(Variant v) {
  return v == Variant::kArbitrary ? "arbitrary" : "consecutive";
}
std::string_view to_string(Placement p) {
  return p == Placement::kUniform ? "uniform" : "separated";
}
std::string_view to_string(Boundary b) {
  return b == Boundary::kLinear ? "linear" : "cyclic";
}

std::optional<Variant> parse_variant(std::string_view s) {
  if (s == "arbitrary") return Variant::kArbitrary;
  if (s == "consecutive") return Variant::kConsecutive;
  return std::nullopt;
}
std::optional<Placement> parse_placement(std::string_view s) {
  if (s == "uniform") return Placement::kUniform;
  if (s == "separated") return Placement::kSeparated;
  return std::nullopt;
}
std::optional<Boundary> parse_boundary(std::string_view s) {
  if (s == "linear") return Boundary::kLinear;
  if (s == "cyclic") return Boundary::kCyclic;
  return std::nullopt;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& what) { Fail(ErrorCode::kConfig, what); };
  if (n < 1 || k < 1 || m < 1) fail("n, k and m must be at least 1");
  if (k > n) fail("k must not exceed n");
  if (static_cast<std::int64_t>(m) * k > n) fail("m*k must not exceed n");
  if (!std::isfinite(lambda) || lambda < 0.0)
    fail("lambda must be finite and nonnegative");
  if (placement == Placement::kSeparated) {
    if (variant != Variant::kConsecutive)
      fail("separated placement requires the consecutive variant");
    if (boundary != Boundary::kLinear)
      fail("separated placement requires the linear boundary");
    if (2LL * m * k > static_cast<std::int64_t>(n) + k)
      fail("separated placement requires 2*m*k <= n + k");
  }
}

// ---------------------------------------------------------------- AxisSet

AxisSet AxisSet::Interval(int start, int length, int n, Boundary boundary) {
  if (n < 1 || length < 1 || length > n || start < 0 || start >= n)
    Fail(ErrorCode::kConfig, "interval out of range");
  if (boundary == Boundary::kLinear && start + length > n)
    Fail(ErrorCode::kConfig, "linear interval runs past the last index");
  AxisSet axis;
  axis.interval_ = true;
  axis.start_ = start;
  axis.n_ = n;
  axis.indices_.resize(length);
  for (int i = 0; i < length; ++i) axis.indices_[i] = (start + i) % n;
  std::sort(axis.indices_.begin(), axis.indices_.end());
  return axis;
}

AxisSet AxisSet::Subset(std::vector<int> indices, int n) {
  std::sort(indices.begin(), indices.end());
  if (indices.empty() || indices.front() < 0 || indices.back() >= n)
    Fail(ErrorCode::kConfig, "subset indices out of range");
  if (std::adjacent_find(indices.begin(), indices.end()) != indices.end())
    Fail(ErrorCode::kConfig, "subset indices repeat");
  AxisSet axis;
  axis.start_ = indices.front();
  axis.n_ = n;
  axis.indices_ = std::move(indices);
  return axis;
}

bool AxisSet::contains(int i) const {
  return std::binary_search(indices_.begin(), indices_.end(), i);
}

bool AxisSet::is_contiguous(Boundary boundary) const {
  int gaps = 0;
  for (std::size_t i = 1; i < indices_.size(); ++i)
    if (indices_[i] != indices_[i - 1] + 1) ++gaps;
  if (gaps == 0) return true;
  return boundary == Boundary::kCyclic && gaps == 1 &&
         indices_.front() == 0 && indices_.back() == n_ - 1;
}

int intersection_size(const AxisSet& a, const AxisSet& b) {
  auto ia = a.indices();
  auto ib = b.indices();
  std::size_t i = 0, j = 0;
  int count = 0;
  while (i < ia.size() && j < ib.size()) {
    if (ia[i] < ib[j]) {
      ++i;
    } else if (ib[j] < ia[i]) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

Rectangle Rectangle::Window(int row, int col, int k, int n,
                            Boundary boundary) {
  return Rectangle{AxisSet::Interval(row, k, n, boundary),
                   AxisSet::Interval(col, k, n, boundary)};
}

std::int64_t overlap(const Rectangle& a, const Rectangle& b) {
  const int rows = intersection_size(a.rows, b.rows);
  if (rows == 0) return 0;
  return static_cast<std::int64_t>(rows) * intersection_size(a.cols, b.cols);
}

// ------------------------------------------------------------- validation

namespace {

// Linear distance between [a, a+k) and [b, b+k): empty rows/cols between
// the nearest endpoints.
int interval_gap(int a, int b, int k) {
  return std::max(0, std::max(a, b) - (std::min(a, b) + k));
}

bool separated(const Rectangle& a, const Rectangle& b, int k) {
  return interval_gap(a.rows.start(), b.rows.start(), k) >= k &&
         interval_gap(a.cols.start(), b.cols.start(), k) >= k;
}

ValidationResult violation(std::string what) {
  return ValidationResult{false, std::move(what)};
}

}  // namespace

ValidationResult validate_support(std::span<const Rectangle> candidate,
                                  const ModelConfig& config) {
  const int m = config.m;
  const int k = config.k;
  const int n = config.n;
  if (static_cast<int>(candidate.size()) != m) {
    std::ostringstream os;
    os << "count: expected " << m << " rectangles, got " << candidate.size();
    return violation(os.str());
  }
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    const Rectangle& r = candidate[i];
    if (r.rows.size() != k || r.cols.size() != k) {
      std::ostringstream os;
      os << "size: rectangle " << i << " is " << r.rows.size() << "x"
         << r.cols.size() << ", expected " << k << "x" << k;
      return violation(os.str());
    }
    if (r.rows.extent() != n || r.cols.extent() != n) {
      std::ostringstream os;
      os << "range: rectangle " << i << " indexes a matrix of side "
         << r.rows.extent() << ", expected " << n;
      return violation(os.str());
    }
  }
  if (config.variant == Variant::kConsecutive) {
    for (std::size_t i = 0; i < candidate.size(); ++i) {
      if (!candidate[i].rows.is_contiguous(config.boundary) ||
          !candidate[i].cols.is_contiguous(config.boundary)) {
        std::ostringstream os;
        os << "consecutive: rectangle " << i << " is not a contiguous window";
        return violation(os.str());
      }
    }
  }
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    for (std::size_t j = i + 1; j < candidate.size(); ++j) {
      if (overlap(candidate[i], candidate[j]) != 0) {
        std::ostringstream os;
        os << "product-disjoint: rectangles " << i << " and " << j
           << " share cells";
        return violation(os.str());
      }
    }
  }
  if (config.placement == Placement::kSeparated) {
    for (std::size_t i = 0; i < candidate.size(); ++i) {
      for (std::size_t j = i + 1; j < candidate.size(); ++j) {
        if (!separated(candidate[i], candidate[j], k)) {
          std::ostringstream os;
          os << "separation: rectangles " << i << " and " << j
             << " are closer than " << k << " rows or columns";
          return violation(os.str());
        }
      }
    }
  }
  return {};
}

// ------------------------------------------------------------- SupportSet

SupportSet::SupportSet(std::vector<Rectangle> rectangles, ModelConfig config)
    : rectangles_(std::move(rectangles)), config_(config) {
  ValidationResult check = validate_support(rectangles_, config_);
  if (!check) Fail(ErrorCode::kConfig, "invalid support: " + check.violation);
}

std::int64_t SupportSet::cell_count() const {
  std::int64_t total = 0;
  for (const Rectangle& r : rectangles_) total += r.cells();
  return total;
}

bool SupportSet::contains(int r, int c) const {
  return std::any_of(rectangles_.begin(), rectangles_.end(),
                     [&](const Rectangle& rect) { return rect.contains(r, c); });
}

std::int64_t overlap(const SupportSet& a, const SupportSet& b) {
  std::int64_t total = 0;
  for (const Rectangle& ra : a.rectangles())
    for (const Rectangle& rb : b.rectangles()) total += overlap(ra, rb);
  return total;
}

std::int64_t CellMask::popcount() const {
  return std::count(bits.begin(), bits.end(), std::uint8_t{1});
}

CellMask cell_mask(const SupportSet& support) {
  const int n = support.n();
  CellMask mask{n, std::vector<std::uint8_t>(static_cast<std::size_t>(n) * n)};
  for (const Rectangle& rect : support.rectangles())
    for (int r : rect.rows.indices())
      for (int c : rect.cols.indices())
        mask.bits[static_cast<std::size_t>(r) * n + c] = 1;
  return mask;
}

// ------------------------------------------------------------ Observation

Observation::Observation(int n, std::vector<double> data,
                         std::optional<Provenance> provenance)
    : n_(n), data_(std::move(data)), provenance_(std::move(provenance)) {
  if (n < 1 || data_.size() != static_cast<std::size_t>(n) * n)
    Fail(ErrorCode::kConfig, "observation data does not match n*n");
  if (!std::all_of(data_.begin(), data_.end(),
                   [](double x) { return std::isfinite(x); }))
    Fail(ErrorCode::kConfig, "observation contains non-finite entries");
}

// --------------------------------------------------------------- samplers

namespace {

AxisSet sample_axis(const ModelConfig& config, RandomStream& rng) {
  const int n = config.n;
  const int k = config.k;
  if (config.variant == Variant::kConsecutive) {
    const int positions = config.boundary == Boundary::kLinear ? n - k + 1 : n;
    const int start = static_cast<int>(rng.uniform_index(positions));
    return AxisSet::Interval(start, k, n, config.boundary);
  }
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.uniform_index(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return AxisSet::Subset(std::move(pool), n);
}

}  // namespace

SupportSet sample_support(const ModelConfig& config, RandomStream& rng,
                          std::uint64_t max_attempts) {
  config.validate();
  std::vector<Rectangle> rects;
  rects.reserve(config.m);
  for (std::uint64_t attempt = 0; attempt < max_attempts; ++attempt) {
    rects.clear();
    for (int i = 0; i < config.m; ++i) {
      AxisSet rows = sample_axis(config, rng);
      AxisSet cols = sample_axis(config, rng);
      rects.push_back(Rectangle{std::move(rows), std::move(cols)});
    }
    if (validate_support(rects, config)) {
      return SupportSet(std::move(rects), config);
    }
  }
  std::ostringstream os;
  os << "support sampling rejected " << max_attempts
     << " tuples; enlarge n or reduce m";
  Fail(ErrorCode::kBudget, os.str());
}

Observation sample_observation(const SupportSet& support, double lambda,
                               RandomStream& rng) {
  if (!std::isfinite(lambda) || lambda < 0.0)
    Fail(ErrorCode::kConfig, "lambda must be finite and nonnegative");
  const int n = support.n();
  std::vector<double> data(static_cast<std::size_t>(n) * n);
  fill_standard_normal(rng.next_u64(), data);
  if (lambda != 0.0) {
    for (const Rectangle& rect : support.rectangles())
      for (int r : rect.rows.indices())
        for (int c : rect.cols.indices())
          data[static_cast<std::size_t>(r) * n + c] += lambda;
  }
  return Observation(n, std::move(data));
}

Observation sample_null(int n, RandomStream& rng) {
  if (n < 1) Fail(ErrorCode::kConfig, "n must be at least 1");
  std::vector<double> data(static_cast<std::size_t>(n) * n);
  fill_standard_normal(rng.next_u64(), data);
  return Observation(n, std::move(data));
}

}  // namespace psm
