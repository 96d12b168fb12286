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

// File formats for replaying observations and supports.
//
// Text:   "PSM1 <n>\n" then n lines of n space-separated decimals.
// Binary: "PSMB1", u32 n (little-endian), n*n float64 little-endian,
//         row-major.
// Support JSON: array of m records, {"row_start", "col_start"} for interval
//         axes or {"rows": [...], "cols": [...]} for index sets. 0-based.

#ifndef PSM_OBSERVATION_IO_HPP_
#define PSM_OBSERVATION_IO_HPP_

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "psm/model.hpp"

namespace psm {

enum class ObservationFormat { kText, kBinary };

void write_observation(std::ostream& out, const Observation& x,
                       ObservationFormat format);
// Detects the format from the magic bytes.
Observation read_observation(std::istream& in);

// Path variants; Error(kIo) messages carry the path.
void write_observation_file(const std::string& path, const Observation& x,
                            ObservationFormat format);
Observation read_observation_file(const std::string& path);

nlohmann::json support_to_json(const SupportSet& support);
// Rebuilds a support under config; throws Error(kConfig) if the records do
// not form a valid support for it.
SupportSet support_from_json(const nlohmann::json& records,
                             const ModelConfig& config);

}  // namespace psm

#endif  // PSM_OBSERVATION_IO_HPP_
