// artrec/backend.hpp

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

// Scoring backend: two-covariance Gaussian PLDA, enrollment by averaging, and
// early / late fusion of the i-vector and deep branches.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "artrec/common.hpp"
#include "artrec/error.hpp"
#include "artrec/tvspace.hpp"

namespace artrec {
namespace backend {

/**
   Gaussian PLDA in the two-covariance form.  Embeddings are first centered
   by `mean`, whitened to unit total covariance, projected onto the unit
   sphere, and re-centered by `offset`; in that space a same-identity pair
   is distributed as N(0, [[B+W, B], [B, B+W]]) and a different-identity
   pair as N(0, blockdiag(B+W, B+W)).

   Scoring uses a simultaneous diagonalization V' W V = I, V' B V = diag(psi)
   which is recomputed deterministically from B and W, so only the five
   primary fields are persisted.
*/
class PldaModel {
 public:
  PldaModel() = default;
  PldaModel(Vector mean, Matrix whitener, Vector offset, Matrix between,
            Matrix within)
      : mean_(std::move(mean)),
        whitener_(std::move(whitener)),
        offset_(std::move(offset)),
        between_(std::move(between)),
        within_(std::move(within)) {
    Initialize();
  }

  /// Input embedding dimension.
  int Dim() const { return static_cast<int>(mean_.size()); }
  /// Dimension of the whitened space (smaller than Dim() only when the
  /// training covariance was rank deficient).
  int ReducedDim() const { return static_cast<int>(whitener_.rows()); }

  const Vector &mean() const { return mean_; }
  const Matrix &whitener() const { return whitener_; }
  const Vector &offset() const { return offset_; }
  const Matrix &between() const { return between_; }
  const Matrix &within() const { return within_; }
  const Vector &psi() const { return psi_; }

  /// Center, whiten, length-normalize, re-center.
  Vector Preprocess(const Vector &x) const {
    ARTREC_REQUIRE(x.size() == Dim(), ErrorCode::kShape, "embedding dim ",
                   x.size(), " != PLDA dim ", Dim());
    Vector y = whitener_ * (x - mean_);
    const double norm = y.norm();
    if (norm > 0.0) y /= norm;
    return y - offset_;
  }

  /// Log-likelihood ratio of two already preprocessed vectors.
  double ScorePreprocessed(const Vector &e, const Vector &t) const {
    ARTREC_REQUIRE(e.size() == ReducedDim() && t.size() == ReducedDim(),
                   ErrorCode::kShape, "preprocessed dims do not match the model");
    const Vector u = transform_.transpose() * e;
    const Vector v = transform_.transpose() * t;
    double llr = 0.0;
    for (Eigen::Index i = 0; i < psi_.size(); ++i) {
      const double p = psi_(i), s = 2.0 * p + 1.0, q = p + 1.0;
      const double uu = u(i) * u(i) + v(i) * v(i);
      llr += -0.5 * std::log(s) + std::log(q) -
             0.5 * ((q * uu - 2.0 * p * u(i) * v(i)) / s - uu / q);
    }
    return llr;
  }

  double Score(const EmbeddingVector &enroll, const EmbeddingVector &test) const {
    ARTREC_REQUIRE(enroll.dim() == Dim() && test.dim() == Dim(),
                   ErrorCode::kShape, "score dims (", enroll.dim(), ", ",
                   test.dim(), ") != PLDA dim ", Dim());
    return ScorePreprocessed(Preprocess(enroll.values), Preprocess(test.values));
  }

 private:
  void Initialize() {
    const auto p = whitener_.rows();
    ARTREC_REQUIRE(p >= 1 && whitener_.cols() == mean_.size() &&
                       offset_.size() == p && between_.rows() == p &&
                       between_.cols() == p && within_.rows() == p &&
                       within_.cols() == p,
                   ErrorCode::kShape, "inconsistent PLDA parameter shapes");
    Eigen::LLT<Matrix> llt(within_);
    ARTREC_REQUIRE(llt.info() == Eigen::Success, ErrorCode::kNumerical,
                   "within-class covariance is not positive definite");
    const Matrix l_inv = llt.matrixL().solve(Matrix::Identity(p, p));
    const Matrix m = l_inv * between_ * l_inv.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()));
    ARTREC_REQUIRE(eig.info() == Eigen::Success, ErrorCode::kNumerical,
                   "PLDA eigendecomposition failed");
    psi_ = eig.eigenvalues().cwiseMax(0.0);
    transform_ = l_inv.transpose() * eig.eigenvectors();
  }

  Vector mean_;
  Matrix whitener_;
  Vector offset_;
  Matrix between_;
  Matrix within_;
  Matrix transform_;
  Vector psi_;
};

namespace internal {

// Flips each column so its largest-magnitude entry is positive.
inline void CanonicalizeSigns(Matrix &vecs) {
  for (Eigen::Index j = 0; j < vecs.cols(); ++j) {
    Eigen::Index arg;
    vecs.col(j).cwiseAbs().maxCoeff(&arg);
    if (vecs(arg, j) < 0.0) vecs.col(j) *= -1.0;
  }
}

// Whitening transform for covariance `cov`. Full rank: the symmetric inverse
// square root. Otherwise the rows span the leading non-null eigenvectors,
// at most `max_dim` of them.
inline Matrix Whitener(const Matrix &cov, Eigen::Index max_dim) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  ARTREC_REQUIRE(eig.info() == Eigen::Success, ErrorCode::kNumerical,
                 "covariance eigendecomposition failed");
  const Vector &vals = eig.eigenvalues();
  const double max_val = vals.maxCoeff();
  ARTREC_REQUIRE(max_val > 0.0, ErrorCode::kNumerical,
                 "training embeddings have zero variance");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = vals.size() - 1; i >= 0; --i)
    if (vals(i) > 1e-10 * max_val && static_cast<Eigen::Index>(keep.size()) < max_dim)
      keep.push_back(i);
  if (static_cast<Eigen::Index>(keep.size()) == vals.size())
    return eig.eigenvectors() * vals.cwiseInverse().cwiseSqrt().asDiagonal() *
           eig.eigenvectors().transpose();
  Matrix vecs(cov.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    vecs.col(j) = eig.eigenvectors().col(keep[j]) / std::sqrt(vals(keep[j]));
  CanonicalizeSigns(vecs);
  return vecs.transpose();
}

}  // namespace internal

/// Fits the preprocessing chain and the between/within covariances.
/// `labels[i]` is the identity of `vectors[i]`.
inline PldaModel TrainPlda(std::span<const EmbeddingVector> vectors,
                           std::span<const std::string> labels) {
  ARTREC_REQUIRE(vectors.size() == labels.size(), ErrorCode::kShape,
                 vectors.size(), " vectors but ", labels.size(), " labels");
  ARTREC_REQUIRE(!vectors.empty(), ErrorCode::kInsufficientData,
                 "no PLDA training vectors");
  const Eigen::Index p = vectors[0].dim();
  const Eigen::Index n = static_cast<Eigen::Index>(vectors.size());
  for (const auto &v : vectors) {
    ARTREC_REQUIRE(v.dim() == p, ErrorCode::kShape,
                   "PLDA training vectors have different dims");
    ARTREC_REQUIRE(v.kind == vectors[0].kind, ErrorCode::kKindMismatch,
                   "PLDA training vectors mix kinds");
    ARTREC_REQUIRE(v.IsFinite(), ErrorCode::kData, "vector '", v.track_id,
                   "' is not finite");
  }
  std::map<std::string, std::vector<Eigen::Index>> classes;
  for (Eigen::Index i = 0; i < n; ++i) classes[labels[i]].push_back(i);
  ARTREC_REQUIRE(classes.size() >= 2, ErrorCode::kDegenerateLabels,
                 "PLDA needs >= 2 classes, got ", classes.size());
  const bool has_pair = std::any_of(classes.begin(), classes.end(),
                                    [](const auto &kv) { return kv.second.size() >= 2; });
  ARTREC_REQUIRE(has_pair, ErrorCode::kDegenerateLabels,
                 "PLDA needs a class with >= 2 vectors");
  ARTREC_REQUIRE(p <= n, ErrorCode::kRankDeficiency, "embedding dim ", p,
                 " exceeds the number of training vectors ", n);

  Matrix x(n, p);
  for (Eigen::Index i = 0; i < n; ++i) x.row(i) = vectors[i].values.transpose();
  const Vector mean = x.colwise().mean().transpose();
  x.rowwise() -= mean.transpose();
  const Matrix cov = x.transpose() * x / static_cast<double>(n);
  // at most (#classes - 1) dims, the rank of B
  const Matrix whitener =
      internal::Whitener(cov, static_cast<Eigen::Index>(classes.size()) - 1);
  const Eigen::Index q = whitener.rows();

  Matrix y = x * whitener.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = y.row(i).norm();
    if (norm > 0.0) y.row(i) /= norm;
  }
  const Vector offset = y.colwise().mean().transpose();
  y.rowwise() -= offset.transpose();

  Matrix between = Matrix::Zero(q, q), within = Matrix::Zero(q, q);
  for (const auto &[label, members] : classes) {
    Vector class_mean = Vector::Zero(q);
    for (auto i : members) class_mean += y.row(i).transpose();
    class_mean /= static_cast<double>(members.size());
    between.noalias() +=
        static_cast<double>(members.size()) * class_mean * class_mean.transpose();
    for (auto i : members) {
      const Vector dev = y.row(i).transpose() - class_mean;
      within.noalias() += dev * dev.transpose();
    }
  }
  between /= static_cast<double>(n);
  within /= static_cast<double>(n);
  between = 0.5 * (between + between.transpose());
  within = 0.5 * (within + within.transpose());
  double trace = within.trace();
  if (trace <= 0.0) trace = between.trace();
  within.diagonal().array() += 1e-6 * trace / static_cast<double>(q);
  return PldaModel(mean, whitener, offset, between, within);
}

inline double PldaScore(const PldaModel &plda, const EmbeddingVector &enroll,
                        const EmbeddingVector &test) {
  return plda.Score(enroll, test);
}

struct ArtistModel {
  std::string artist_id;
  EmbeddingVector vector;
  int n_enrolled = 0;
};

/// Normalized mean of the enrollment vectors.
inline ArtistModel EnrollArtist(const std::string &artist_id,
                                std::span<const EmbeddingVector> vectors) {
  ARTREC_REQUIRE(!vectors.empty(), ErrorCode::kEmptyEnrollment,
                 "no enrollment vectors for artist '", artist_id, "'");
  Vector sum = Vector::Zero(vectors[0].dim());
  for (const auto &v : vectors) {
    ARTREC_REQUIRE(v.kind == vectors[0].kind, ErrorCode::kKindMismatch,
                   "artist '", artist_id, "' mixes ",
                   EmbeddingKindName(vectors[0].kind), " and ",
                   EmbeddingKindName(v.kind), " vectors");
    ARTREC_REQUIRE(v.dim() == sum.size(), ErrorCode::kShape, "artist '",
                   artist_id, "' has enrollment vectors of different dims");
    sum += v.values;
  }
  EmbeddingVector mean{sum / static_cast<double>(vectors.size()),
                       vectors[0].kind, artist_id};
  return ArtistModel{artist_id, tvspace::LengthNormalize(mean),
                     static_cast<int>(vectors.size())};
}

/// [normalized i-vector || normalized deep feature].
inline EmbeddingVector EarlyFuse(const EmbeddingVector &ivec,
                                 const EmbeddingVector &deep) {
  ARTREC_REQUIRE(ivec.kind == EmbeddingKind::kIvector &&
                     deep.kind == EmbeddingKind::kDeep,
                 ErrorCode::kFusion, "early fusion needs (ivector, deep), got (",
                 EmbeddingKindName(ivec.kind), ", ",
                 EmbeddingKindName(deep.kind), ")");
  ARTREC_REQUIRE(ivec.track_id == deep.track_id, ErrorCode::kFusion,
                 "early fusion of different tracks '", ivec.track_id, "' and '",
                 deep.track_id, "'");
  const EmbeddingVector a = tvspace::LengthNormalize(ivec);
  const EmbeddingVector b = tvspace::LengthNormalize(deep);
  Vector fused(a.dim() + b.dim());
  fused << a.values, b.values;
  return EmbeddingVector{std::move(fused), EmbeddingKind::kFused, ivec.track_id};
}

inline double LateFuse(double score_iv, double score_deep) {
  ARTREC_REQUIRE(std::isfinite(score_iv) && std::isfinite(score_deep),
                 ErrorCode::kNumerical, "late fusion of non-finite scores");
  return 0.5 * (score_iv + score_deep);
}

namespace internal {

inline std::vector<double> ZNormalize(std::span<const double> scores) {
  double mean = 0.0, var = 0.0;
  for (double s : scores) mean += s;
  mean /= static_cast<double>(scores.size());
  for (double s : scores) var += (s - mean) * (s - mean);
  var /= static_cast<double>(scores.size());
  const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
  std::vector<double> out;
  out.reserve(scores.size());
  for (double s : scores) out.push_back((s - mean) / sd);
  return out;
}

}  // namespace internal

/// Late fusion over a whole trial list. With `znorm`, each system's scores
/// are first standardized over the trial set.
inline std::vector<double> LateFuseTrials(std::span<const double> scores_iv,
                                          std::span<const double> scores_deep,
                                          bool znorm = false) {
  ARTREC_REQUIRE(scores_iv.size() == scores_deep.size(), ErrorCode::kShape,
                 "late fusion of trial lists of different lengths");
  std::vector<double> a(scores_iv.begin(), scores_iv.end());
  std::vector<double> b(scores_deep.begin(), scores_deep.end());
  if (znorm && !a.empty()) {
    a = internal::ZNormalize(a);
    b = internal::ZNormalize(b);
  }
  std::vector<double> fused(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) fused[i] = LateFuse(a[i], b[i]);
  return fused;
}

}  // namespace backend
}  // namespace artrec
