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

#ifndef PSM_ERROR_HPP_
#define PSM_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace psm {

// Numeric values double as CLI exit codes.
enum class ErrorCode : int {
  kConfig = 2,    // parameter outside its domain
  kBudget = 3,    // enumeration budget, rejection budget or overflow guard
  kCrossval = 4,  // oracle mismatch
  kIo = 5,
  kInternal = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace psm

#endif  // PSM_ERROR_HPP_
