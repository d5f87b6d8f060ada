// Copyright 2026 The AGE Toolkit Authors. All Rights Reserved.
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace agekit {

// Every failure raised by the toolkit carries one of these codes so callers
// (and the CLI exit-code logic) can branch without parsing messages.
enum class ErrorCode {
  kFormat,                 // unsupported or malformed file contents
  kEmptyInput,             // no samples / no frames / no rows
  kIo,                     // read or write failure
  kDegenerateSignal,       // zero-power or all-silent audio
  kRateMismatch,           // sample rates differ
  kTooShort,               // signal shorter than one frame / segment
  kTooFewFrames,           // statistic needs more frames
  kInvalidArgument,        // spec / parameter violates its invariants
  kParse,                  // model or manifest parse failure
  kDimensionChain,         // layer dims do not chain
  kActivation,             // softmax misplaced or missing
  kShape,                  // matrix / sequence shapes disagree
  kNumeric,                // non-finite intermediate
  kLabelRange,             // class index out of range
  kAlignment,              // clean/degraded lengths too different
  kUndefinedCorrelation,   // zero variance in a correlation input
  kDegenerateFit,          // logistic fit has no information
  kTooFewPoints,           // fit / report needs more points
  kDuplicateId,            // manifest utt_id repeated
  kMissingColumn,          // manifest lacks a required column
  kConfig,                 // model and run configuration disagree
  kEmptyReport,            // no group had enough data to report
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kEmptyInput: return "empty-input";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kDegenerateSignal: return "degenerate-signal";
    case ErrorCode::kRateMismatch: return "rate-mismatch";
    case ErrorCode::kTooShort: return "too-short";
    case ErrorCode::kTooFewFrames: return "too-few-frames";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kDimensionChain: return "dimension-chain";
    case ErrorCode::kActivation: return "activation";
    case ErrorCode::kShape: return "shape";
    case ErrorCode::kNumeric: return "numeric";
    case ErrorCode::kLabelRange: return "label-range";
    case ErrorCode::kAlignment: return "alignment";
    case ErrorCode::kUndefinedCorrelation: return "undefined-correlation";
    case ErrorCode::kDegenerateFit: return "degenerate-fit";
    case ErrorCode::kTooFewPoints: return "too-few-points";
    case ErrorCode::kDuplicateId: return "duplicate-id";
    case ErrorCode::kMissingColumn: return "missing-column";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kEmptyReport: return "empty-report";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  // Message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace agekit
