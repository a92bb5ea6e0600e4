//
// Copyright 2026 The fairci Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef FAIRCI_ERROR_HPP_
#define FAIRCI_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairci {

// Every failure the library reports carries one of these codes. The CLI maps
// them onto process exit codes (see ExitCodeFor).
enum class ErrorCode {
  kDegenerateDenominator,
  kNegativeQuadraticForm,
  kInvalidAlpha,
  kZeroSigma,
  kInvalidArgument,
  kMixedLabelPresence,
  kEmptyInput,
  kLabelsMissing,
  kUnknownReferenceGroup,
  kInvalidDistribution,
  kDegenerateDistribution,
  kTooManyDegenerateResamples,
  kIoError,
  kRaggedRow,
  kEmptyFile,
  kMissingColumn,
  kUnmappableValue,
  kSchemaError,
  kDigestMismatch,
  kNetworkError,
  kUnknownPreset,
  kUnreadableReport,
};

// Stable identifier, e.g. "DegenerateDenominator".
std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// 1 = usage or configuration problem, 2 = the data itself is degenerate or
// unusable.
int ExitCodeFor(ErrorCode code);

}  // namespace fairci

#endif  // FAIRCI_ERROR_HPP_
