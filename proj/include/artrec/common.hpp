// artrec/common.hpp

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

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "artrec/error.hpp"

namespace artrec {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class EmbeddingKind { kIvector, kDeep, kFused };

inline std::string EmbeddingKindName(EmbeddingKind kind) {
  switch (kind) {
    case EmbeddingKind::kIvector: return "ivector";
    case EmbeddingKind::kDeep: return "deep";
    case EmbeddingKind::kFused: return "fused";
  }
  return "unknown";
}

inline EmbeddingKind ParseEmbeddingKind(const std::string &name) {
  if (name == "ivector") return EmbeddingKind::kIvector;
  if (name == "deep") return EmbeddingKind::kDeep;
  if (name == "fused") return EmbeddingKind::kFused;
  internal::Fail(ErrorCode::kConfig, "unknown embedding kind '", name, "'");
}

/// A track-level (or artist-level) vector: an i-vector, a deep audio feature,
/// or the concatenation of both.
struct EmbeddingVector {
  Vector values;
  EmbeddingKind kind = EmbeddingKind::kIvector;
  std::string track_id;

  Eigen::Index dim() const { return values.size(); }
  bool IsFinite() const { return values.allFinite(); }
};

}  // namespace artrec
