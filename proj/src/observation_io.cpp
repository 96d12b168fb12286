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

#include "psm/observation_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "psm/error.hpp"

namespace psm {
namespace {

constexpr char kTextMagic[] = "PSM1";
constexpr char kBinaryMagic[] = "PSMB1";

void put_u32_le(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> bytes;
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

void put_f64_le(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  std::array<char, 8> bytes;
  for (int i = 0; i < 8; ++i)
    bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

std::uint64_t get_le(std::istream& in, int width) {
  std::array<unsigned char, 8> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), width);
  if (!in) Fail(ErrorCode::kIo, "truncated binary observation");
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

Observation read_binary(std::istream& in) {
  const auto n = static_cast<std::uint32_t>(get_le(in, 4));
  if (n == 0 || n > 100'000) Fail(ErrorCode::kIo, "binary observation has invalid side");
  std::vector<double> data(static_cast<std::size_t>(n) * n);
  for (double& v : data) v = std::bit_cast<double>(get_le(in, 8));
  return Observation(static_cast<int>(n), std::move(data));
}

Observation read_text(std::istream& in) {
  long long n = 0;
  if (!(in >> n) || n < 1 || n > 100'000)
    Fail(ErrorCode::kIo, "text observation header lacks a valid side");
  std::vector<double> data(static_cast<std::size_t>(n) * n);
  std::string token;
  for (double& v : data) {
    if (!(in >> token)) Fail(ErrorCode::kIo, "text observation is truncated");
    const char* first = token.data();
    const char* last = first + token.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
      Fail(ErrorCode::kIo, "text observation has a malformed entry: " + token);
  }
  if (in >> token) Fail(ErrorCode::kIo, "text observation has trailing data");
  return Observation(static_cast<int>(n), std::move(data));
}

}  // namespace

void write_observation(std::ostream& out, const Observation& x,
                       ObservationFormat format) {
  const int n = x.n();
  const auto data = x.data();
  if (format == ObservationFormat::kBinary) {
    out.write(kBinaryMagic, 5);
    put_u32_le(out, static_cast<std::uint32_t>(n));
    for (double v : data) put_f64_le(out, v);
  } else {
    out << kTextMagic << ' ' << n << '\n';
    // Shortest round-trip representation.
    std::array<char, 32> buf;
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(),
                                       data[static_cast<std::size_t>(r) * n + c]);
        if (c) out << ' ';
        out.write(buf.data(), ptr - buf.data());
      }
      out << '\n';
    }
  }
  if (!out) Fail(ErrorCode::kIo, "failed writing observation");
}

Observation read_observation(std::istream& in) {
  std::array<char, 5> magic{};
  in.read(magic.data(), 4);
  if (!in || std::memcmp(magic.data(), "PSM", 3) != 0)
    Fail(ErrorCode::kIo, "not an observation file (bad magic)");
  if (magic[3] == 'B') {
    in.read(magic.data() + 4, 1);
    if (!in || magic[4] != '1') Fail(ErrorCode::kIo, "unsupported binary version");
    return read_binary(in);
  }
  if (magic[3] != '1') Fail(ErrorCode::kIo, "unsupported text version");
  return read_text(in);
}

void write_observation_file(const std::string& path, const Observation& x,
                            ObservationFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot open " + path + " for writing");
  try {
    write_observation(out, x, format);
  } catch (const Error& e) {
    Fail(ErrorCode::kIo, path + ": " + e.what());
  }
}

Observation read_observation_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path + " for reading");
  try {
    return read_observation(in);
  } catch (const Error& e) {
    Fail(ErrorCode::kIo, path + ": " + e.what());
  }
}

nlohmann::json support_to_json(const SupportSet& support) {
  nlohmann::json records = nlohmann::json::array();
  for (const Rectangle& rect : support.rectangles()) {
    nlohmann::json rec = nlohmann::json::object();
    if (rect.rows.is_interval()) {
      rec["row_start"] = rect.rows.start();
    } else {
      rec["rows"] = std::vector<int>(rect.rows.indices().begin(),
                                     rect.rows.indices().end());
    }
    if (rect.cols.is_interval()) {
      rec["col_start"] = rect.cols.start();
    } else {
      rec["cols"] = std::vector<int>(rect.cols.indices().begin(),
                                     rect.cols.indices().end());
    }
    records.push_back(std::move(rec));
  }
  return records;
}

SupportSet support_from_json(const nlohmann::json& records,
                             const ModelConfig& config) {
  if (!records.is_array()) Fail(ErrorCode::kConfig, "support JSON must be an array");
  auto axis = [&](const nlohmann::json& rec, const char* start_key,
                  const char* set_key) {
    if (rec.contains(start_key))
      return AxisSet::Interval(rec.at(start_key).get<int>(), config.k,
                               config.n, config.boundary);
    if (rec.contains(set_key))
      return AxisSet::Subset(rec.at(set_key).get<std::vector<int>>(), config.n);
    Fail(ErrorCode::kConfig, std::string("support record lacks ") + start_key +
                                 " or " + set_key);
  };
  std::vector<Rectangle> rects;
  try {
    for (const auto& rec : records)
      rects.push_back(Rectangle{axis(rec, "row_start", "rows"),
                                axis(rec, "col_start", "cols")});
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kConfig, std::string("malformed support JSON: ") + e.what());
  }
  return SupportSet(std::move(rects), config);
}

}  // namespace psm
