/******************************************************************************
 * Copyright 2026 The Autotune Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *****************************************************************************/

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace autotune {

enum class ErrorCode {
  kInvalidArgument,
  kNonFiniteState,
  kEmptyDataset,
  kDiverged,
  kDegenerateTrajectory,
  kSpeedTooLow,
  kNoConvergence,
  kWeightMismatch,
  kSingularKernel,
  kEvaluationFailed,
  kNoPairs,
  kIo,
  kParse,
};

std::string_view ErrorCodeName(ErrorCode code);

/// Every recoverable failure in the library is reported through this type;
/// callers switch on code() rather than on the message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kNonFiniteState:
      return "NonFiniteState";
    case ErrorCode::kEmptyDataset:
      return "EmptyDataset";
    case ErrorCode::kDiverged:
      return "Diverged";
    case ErrorCode::kDegenerateTrajectory:
      return "DegenerateTrajectory";
    case ErrorCode::kSpeedTooLow:
      return "SpeedTooLow";
    case ErrorCode::kNoConvergence:
      return "NoConvergence";
    case ErrorCode::kWeightMismatch:
      return "WeightMismatch";
    case ErrorCode::kSingularKernel:
      return "SingularKernel";
    case ErrorCode::kEvaluationFailed:
      return "EvaluationFailed";
    case ErrorCode::kNoPairs:
      return "NoPairs";
    case ErrorCode::kIo:
      return "Io";
    case ErrorCode::kParse:
      return "Parse";
  }
  return "Unknown";
}

}  // namespace autotune
