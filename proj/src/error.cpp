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

#include "fairci/error.hpp"

namespace fairci {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::kNegativeQuadraticForm: return "NegativeQuadraticForm";
    case ErrorCode::kInvalidAlpha: return "InvalidAlpha";
    case ErrorCode::kZeroSigma: return "ZeroSigma";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMixedLabelPresence: return "MixedLabelPresence";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kLabelsMissing: return "LabelsMissing";
    case ErrorCode::kUnknownReferenceGroup: return "UnknownReferenceGroup";
    case ErrorCode::kInvalidDistribution: return "InvalidDistribution";
    case ErrorCode::kDegenerateDistribution: return "DegenerateDistribution";
    case ErrorCode::kTooManyDegenerateResamples:
      return "TooManyDegenerateResamples";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kRaggedRow: return "RaggedRow";
    case ErrorCode::kEmptyFile: return "EmptyFile";
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kUnmappableValue: return "UnmappableValue";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kDigestMismatch: return "DigestMismatch";
    case ErrorCode::kNetworkError: return "NetworkError";
    case ErrorCode::kUnknownPreset: return "UnknownPreset";
    case ErrorCode::kUnreadableReport: return "UnreadableReport";
  }
  return "UnknownError";
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateDenominator:
    case ErrorCode::kNegativeQuadraticForm:
    case ErrorCode::kZeroSigma:
    case ErrorCode::kMixedLabelPresence:
    case ErrorCode::kEmptyInput:
    case ErrorCode::kLabelsMissing:
    case ErrorCode::kDegenerateDistribution:
    case ErrorCode::kTooManyDegenerateResamples:
    case ErrorCode::kRaggedRow:
    case ErrorCode::kEmptyFile:
    case ErrorCode::kUnmappableValue:
    case ErrorCode::kDigestMismatch:
      return 2;
    default:
      return 1;
  }
}

}  // namespace fairci
