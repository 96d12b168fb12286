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

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>

#include "psm/error.hpp"
#include "psm/harness.hpp"

namespace psm::harness {

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

// Non-finite doubles are stored as strings in JSON.
nlohmann::json json_double(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double read_double(const nlohmann::json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    Fail(ErrorCode::kConfig, "unexpected string in numeric field: " + s);
  }
  return v.get<double>();
}

nlohmann::json json_optional(const std::optional<double>& v) {
  return v ? json_double(*v) : nlohmann::json(nullptr);
}

std::optional<double> read_optional(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return read_double(v);
}

std::string render_csv(const std::vector<SweepRow>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.n) + ',' + std::to_string(r.k) + ',' + std::to_string(r.m) + ',';
    out += format_double(r.lambda) + ',' + format_double(r.alpha) + ',' +
           format_double(r.beta) + ',' + format_double(r.gamma_m) + ',';
    out += std::string(to_string(r.variant)) + ',' + std::string(to_string(r.task)) + ',';
    out += std::to_string(r.trials) + ',';
    out += format_optional(r.type1) + ',' + format_optional(r.type2) + ',' +
           format_optional(r.risk) + ',';
    out += format_optional(r.exact_rate) + ',' + format_optional(r.overlap_frac) + ',';
    out += format_double(r.ci) + ',' + r.regime + ',' + std::to_string(r.seed) + '\n';
  }
  return out;
}

}  // namespace

std::optional<Format> parse_format(std::string_view s) {
  if (s == "csv") return Format::kCsv;
  if (s == "json") return Format::kJson;
  return std::nullopt;
}

nlohmann::json rows_to_json(const std::vector<SweepRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j{
        {"n", r.n},
        {"k", r.k},
        {"m", r.m},
        {"lambda", json_double(r.lambda)},
        {"alpha", json_double(r.alpha)},
        {"beta", json_double(r.beta)},
        {"gamma_m", json_double(r.gamma_m)},
        {"variant", to_string(r.variant)},
        {"task", to_string(r.task)},
        {"trials", r.trials},
        {"type1", json_optional(r.type1)},
        {"type2", json_optional(r.type2)},
        {"risk", json_optional(r.risk)},
        {"exact_rate", json_optional(r.exact_rate)},
        {"overlap_frac", json_optional(r.overlap_frac)},
        {"ci", json_double(r.ci)},
        {"regime", r.regime},
        {"seed", r.seed},
    };
    if (r.error) {
      j["error"] = *r.error;
      j["error_code"] = r.error_code;
    }
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<SweepRow> rows_from_json(const nlohmann::json& j) {
  if (!j.is_array()) Fail(ErrorCode::kConfig, "sweep rows must be a JSON array");
  std::vector<SweepRow> rows;
  try {
    for (const auto& e : j) {
      SweepRow r;
      r.n = e.at("n").get<int>();
      r.k = e.at("k").get<int>();
      r.m = e.at("m").get<int>();
      r.lambda = read_double(e.at("lambda"));
      r.alpha = read_double(e.at("alpha"));
      r.beta = read_double(e.at("beta"));
      r.gamma_m = read_double(e.at("gamma_m"));
      const auto variant = parse_variant(e.at("variant").get<std::string>());
      const auto task = parse_task(e.at("task").get<std::string>());
      if (!variant || !task) Fail(ErrorCode::kConfig, "unknown variant or task in sweep row");
      r.variant = *variant;
      r.task = *task;
      r.trials = e.at("trials").get<std::int64_t>();
      r.type1 = read_optional(e, "type1");
      r.type2 = read_optional(e, "type2");
      r.risk = read_optional(e, "risk");
      r.exact_rate = read_optional(e, "exact_rate");
      r.overlap_frac = read_optional(e, "overlap_frac");
      r.ci = read_double(e.at("ci"));
      r.regime = e.at("regime").get<std::string>();
      r.seed = e.at("seed").get<std::uint64_t>();
      if (e.contains("error")) {
        r.error = e.at("error").get<std::string>();
        r.error_code = e.value("error_code", static_cast<int>(ErrorCode::kInternal));
      }
      rows.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& ex) {
    Fail(ErrorCode::kConfig, std::string("malformed sweep rows: ") + ex.what());
  }
  return rows;
}

std::string render(const std::vector<SweepRow>& rows, Format format) {
  if (format == Format::kCsv) return render_csv(rows);
  return rows_to_json(rows).dump(2) + '\n';
}

void write_text(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) Fail(ErrorCode::kIo, "failed writing to stdout");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot open for writing: " + path);
  out << text;
  out.flush();
  if (!out) Fail(ErrorCode::kIo, "failed writing: " + path);
}

void emit(const std::vector<SweepRow>& rows, Format format, const std::string& path) {
  write_text(render(rows, format), path);
}

}  // namespace psm::harness
