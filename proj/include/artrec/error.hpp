// artrec/error.hpp

// Copyright 2026  The artrec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace artrec {

enum class ErrorCode {
  kConfig,              // invalid configuration
  kEmptyInput,          // clip or list with nothing in it
  kInsufficientFrames,  // too few frames for the requested statistic
  kInsufficientData,    // not enough data to train a model
  kData,                // non-finite or otherwise unusable data
  kShape,               // dimension mismatch
  kNumerical,           // singular system, NaN loss, non-PD matrix
  kDegenerateVector,    // zero-norm vector
  kDegenerateLabels,    // a single class where several are needed
  kRankDeficiency,      // more dimensions than samples
  kEmptyEnrollment,
  kKindMismatch,
  kFusion,
  kInsufficientTrials,
  kProtocolViolation,   // train/eval artist overlap
  kProtocol,            // wrong track counts / splits
  kFormat,              // malformed WAV
  kIo,
  kCorruption,          // malformed model container
  kUnsupportedVersion,
  kUsage,
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig: return "configuration error";
    case ErrorCode::kEmptyInput: return "empty-input error";
    case ErrorCode::kInsufficientFrames: return "insufficient-frames error";
    case ErrorCode::kInsufficientData: return "insufficient-data error";
    case ErrorCode::kData: return "data error";
    case ErrorCode::kShape: return "shape error";
    case ErrorCode::kNumerical: return "numerical error";
    case ErrorCode::kDegenerateVector: return "degenerate-vector error";
    case ErrorCode::kDegenerateLabels: return "degenerate-labels error";
    case ErrorCode::kRankDeficiency: return "rank-deficiency error";
    case ErrorCode::kEmptyEnrollment: return "empty-enrollment error";
    case ErrorCode::kKindMismatch: return "kind-mismatch error";
    case ErrorCode::kFusion: return "fusion error";
    case ErrorCode::kInsufficientTrials: return "insufficient-trials error";
    case ErrorCode::kProtocolViolation: return "protocol-violation error";
    case ErrorCode::kProtocol: return "protocol error";
    case ErrorCode::kFormat: return "format error";
    case ErrorCode::kIo: return "I/O error";
    case ErrorCode::kCorruption: return "corruption error";
    case ErrorCode::kUnsupportedVersion: return "unsupported-version error";
    case ErrorCode::kUsage: return "usage error";
  }
  return "error";
}

/// All failures raised by the library. The code classifies the failure; the
/// message names the offending field, file, component or artist.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

namespace internal {

template <typename... Args>
[[noreturn]] void Fail(ErrorCode code, const Args &...args) {
  std::ostringstream os;
  (os << ... << args);
  throw Error(code, os.str());
}

}  // namespace internal

#define ARTREC_REQUIRE(cond, code, ...)                      \
  do {                                                       \
    if (!(cond)) ::artrec::internal::Fail(code, __VA_ARGS__); \
  } while (0)

}  // namespace artrec
