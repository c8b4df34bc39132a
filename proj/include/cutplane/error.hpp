// Copyright 2026 The Authors.
//
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cutplane {

enum class ErrorCode {
  kNotPositiveDefinite,
  kPreconditionViolated,
  kSlackNonpositive,
  kNotUnitVector,
  kIterationCapExceeded,
  kEmptyVector,
  kBudgetViolated,
  kOutsideOmega,
  kOracleInconsistent,
  kRoundingFailed,
  kOutOfBox,
  kDegenerateInput,
  kTriggerNotMet,
  kNoProgress,
  kInvalidInput,
};

inline std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kPreconditionViolated: return "PreconditionViolated";
    case ErrorCode::kSlackNonpositive: return "SlackNonpositive";
    case ErrorCode::kNotUnitVector: return "NotUnitVector";
    case ErrorCode::kIterationCapExceeded: return "IterationCapExceeded";
    case ErrorCode::kEmptyVector: return "EmptyVector";
    case ErrorCode::kBudgetViolated: return "BudgetViolated";
    case ErrorCode::kOutsideOmega: return "OutsideOmega";
    case ErrorCode::kOracleInconsistent: return "OracleInconsistent";
    case ErrorCode::kRoundingFailed: return "RoundingFailed";
    case ErrorCode::kOutOfBox: return "OutOfBox";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kTriggerNotMet: return "TriggerNotMet";
    case ErrorCode::kNoProgress: return "NoProgress";
    case ErrorCode::kInvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace cutplane
