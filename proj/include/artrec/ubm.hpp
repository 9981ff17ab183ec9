// artrec/ubm.hpp

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

// Diagonal-covariance GMM used as the universal background model, with
// k-means++ initialization, EM training, and Baum-Welch statistics.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "artrec/common.hpp"
#include "artrec/dsp.hpp"
#include "artrec/error.hpp"
#include "artrec/random.hpp"

namespace artrec {
namespace ubm {

class DiagGmm {
 public:
  DiagGmm() = default;
  DiagGmm(Vector weights, Matrix means, Matrix variances)
      : weights_(std::move(weights)),
        means_(std::move(means)),
        variances_(std::move(variances)) {
    Validate();
    ComputeConstants();
  }

  int NumComponents() const { return static_cast<int>(weights_.size()); }
  int Dim() const { return static_cast<int>(means_.cols()); }

  const Vector &weights() const { return weights_; }
  const Matrix &means() const { return means_; }
  const Matrix &variances() const { return variances_; }
  const Matrix &inv_variances() const { return inv_vars_; }

  void Validate() const {
    const auto c = weights_.size();
    ARTREC_REQUIRE(c >= 1, ErrorCode::kConfig, "GMM needs >= 1 component");
    ARTREC_REQUIRE(means_.rows() == c && variances_.rows() == c &&
                       means_.cols() == variances_.cols() && means_.cols() >= 1,
                   ErrorCode::kShape, "inconsistent GMM parameter shapes");
    ARTREC_REQUIRE((weights_.array() > 0.0).all() &&
                       std::abs(weights_.sum() - 1.0) <= 1e-10,
                   ErrorCode::kNumerical,
                   "GMM weights must be positive and sum to 1");
    ARTREC_REQUIRE((variances_.array() > 0.0).all() && means_.allFinite() &&
                       variances_.allFinite(),
                   ErrorCode::kNumerical,
                   "GMM variances must be positive and finite");
  }

  /// log(w_c) + log N(x | m_c, diag(var_c)) for every row of `frames`:
  /// returns n_frames x C.
  Matrix JointLogLikelihoods(const Matrix &frames) const {
    ARTREC_REQUIRE(frames.cols() == Dim(), ErrorCode::kShape,
                   "frame dim ", frames.cols(), " != GMM dim ", Dim());
    Matrix ll = frames.array().square().matrix() * inv_vars_.transpose() * -0.5;
    ll.noalias() += frames * means_invvars_.transpose();
    ll.rowwise() += gconsts_.transpose();
    return ll;
  }

 private:
  void ComputeConstants() {
    inv_vars_ = variances_.cwiseInverse();
    means_invvars_ = means_.cwiseProduct(inv_vars_);
    gconsts_.resize(NumComponents());
    for (int c = 0; c < NumComponents(); ++c) {
      gconsts_(c) = std::log(weights_(c)) -
                    0.5 * (Dim() * std::log(2.0 * std::numbers::pi) +
                           variances_.row(c).array().log().sum() +
                           means_.row(c).cwiseProduct(means_invvars_.row(c)).sum());
    }
  }

  Vector weights_;
  Matrix means_;
  Matrix variances_;
  Matrix inv_vars_;
  Matrix means_invvars_;
  Vector gconsts_;
};

/// Zeroth- and centered first-order statistics of one track against a UBM.
struct BaumWelchStats {
  Vector n;      // C
  Matrix f;      // C x d, F_c = sum_t gamma_t(c) (x_t - m_c)
  double n_frames = 0.0;

  int NumComponents() const { return static_cast<int>(n.size()); }
  int Dim() const { return static_cast<int>(f.cols()); }

  static BaumWelchStats Zero(int num_components, int dim) {
    return BaumWelchStats{Vector::Zero(num_components),
                          Matrix::Zero(num_components, dim), 0.0};
  }

  void Add(const BaumWelchStats &other) {
    ARTREC_REQUIRE(other.n.size() == n.size() && other.f.cols() == f.cols(),
                   ErrorCode::kShape, "cannot add stats of different shapes");
    n += other.n;
    f += other.f;
    n_frames += other.n_frames;
  }
};

struct UbmTrainConfig {
  int n_components = 256;
  int n_iters = 10;
  /// Variance floor, relative to the global per-dimension data variance.
  double var_floor = 1e-3;
  std::uint64_t seed = 0;
  int kmeans_rounds = 10;

  void Validate() const {
    ARTREC_REQUIRE(n_components >= 1, ErrorCode::kConfig,
                   "n_components must be >= 1");
    ARTREC_REQUIRE(n_iters >= 1, ErrorCode::kConfig, "n_iters must be >= 1");
    ARTREC_REQUIRE(var_floor > 0.0, ErrorCode::kConfig,
                   "var_floor must be positive");
    ARTREC_REQUIRE(kmeans_rounds >= 0, ErrorCode::kConfig,
                   "kmeans_rounds must be >= 0");
  }
};

namespace internal {

inline constexpr Eigen::Index kBlockFrames = 4096;

// Row-wise log-sum-exp; converts `ll` to posteriors in place.
inline Vector LogSumExpToPosteriors(Matrix &ll) {
  Vector lse(ll.rows());
  for (Eigen::Index t = 0; t < ll.rows(); ++t) {
    const double mx = ll.row(t).maxCoeff();
    ll.row(t) = (ll.row(t).array() - mx).exp();
    const double s = ll.row(t).sum();
    ll.row(t) /= s;
    lse(t) = mx + std::log(s);
  }
  return lse;
}

struct EmAccumulator {
  Vector occ;
  Matrix s1, s2;
  double total_ll = 0.0;
};

inline EmAccumulator AccumulateEm(const DiagGmm &gmm, const Matrix &data) {
  const int c = gmm.NumComponents(), d = gmm.Dim();
  EmAccumulator acc{Vector::Zero(c), Matrix::Zero(c, d), Matrix::Zero(c, d), 0.0};
  for (Eigen::Index start = 0; start < data.rows(); start += kBlockFrames) {
    const Eigen::Index len = std::min(kBlockFrames, data.rows() - start);
    const Matrix block = data.middleRows(start, len);
    Matrix post = gmm.JointLogLikelihoods(block);
    acc.total_ll += LogSumExpToPosteriors(post).sum();
    acc.occ += post.colwise().sum().transpose();
    acc.s1.noalias() += post.transpose() * block;
    acc.s2.noalias() += post.transpose() * block.array().square().matrix();
  }
  return acc;
}

inline Matrix KMeansPlusPlus(const Matrix &data, int k, int rounds, Rng &rng,
                             std::vector<int> *assignment) {
  const Eigen::Index n = data.rows();
  Matrix centers(k, data.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centers.row(0) = data.row(pick(rng));
  Vector dist2 = (data.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int j = 1; j < k; ++j) {
    const double total = dist2.sum();
    Eigen::Index chosen = n - 1;
    if (total > 0.0) {
      double u = Uniform(rng) * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        u -= dist2(i);
        if (u < 0.0) { chosen = i; break; }
      }
    } else {
      chosen = pick(rng);
    }
    centers.row(j) = data.row(chosen);
    dist2 = dist2.cwiseMin(
        (data.rowwise() - centers.row(j)).rowwise().squaredNorm());
  }

  const Vector data_sq = data.rowwise().squaredNorm();
  assignment->assign(n, 0);
  for (int round = 0; round <= rounds; ++round) {
    const Vector center_sq = centers.rowwise().squaredNorm();
    for (Eigen::Index start = 0; start < n; start += kBlockFrames) {
      const Eigen::Index len = std::min(kBlockFrames, n - start);
      Matrix d2 = data.middleRows(start, len) * centers.transpose() * -2.0;
      d2.colwise() += data_sq.segment(start, len);
      d2.rowwise() += center_sq.transpose();
      for (Eigen::Index t = 0; t < len; ++t) {
        Eigen::Index best;
        d2.row(t).minCoeff(&best);
        (*assignment)[start + t] = static_cast<int>(best);
      }
    }
    if (round == rounds) break;
    Matrix sums = Matrix::Zero(k, data.cols());
    Vector counts = Vector::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row((*assignment)[i]) += data.row(i);
      counts((*assignment)[i]) += 1.0;
    }
    for (int j = 0; j < k; ++j)
      if (counts(j) > 0.0) centers.row(j) = sums.row(j) / counts(j);
  }
  return centers;
}

}  // namespace internal

/// Posterior component occupation probabilities for a single frame.
inline Vector Responsibilities(const DiagGmm &gmm, const Vector &frame) {
  ARTREC_REQUIRE(frame.size() == gmm.Dim(), ErrorCode::kShape,
                 "frame dim ", frame.size(), " != GMM dim ", gmm.Dim());
  Matrix ll = gmm.JointLogLikelihoods(frame.transpose());
  internal::LogSumExpToPosteriors(ll);
  return ll.row(0).transpose();
}

inline BaumWelchStats AccumulateStats(const DiagGmm &gmm,
                                      const dsp::FeatureSequence &seq) {
  ARTREC_REQUIRE(seq.n_frames() >= 1, ErrorCode::kInsufficientFrames,
                 "no frames in '", seq.clip_id, "'");
  ARTREC_REQUIRE(seq.dim() == gmm.Dim(), ErrorCode::kShape, "sequence '",
                 seq.clip_id, "' has dim ", seq.dim(), ", GMM has ", gmm.Dim());
  const internal::EmAccumulator acc = internal::AccumulateEm(gmm, seq.frames);
  BaumWelchStats stats;
  stats.n = acc.occ;
  stats.f = acc.s1 - acc.occ.asDiagonal() * gmm.means();
  stats.n_frames = static_cast<double>(seq.n_frames());
  return stats;
}

/// Mean per-frame log-likelihood.
inline double LogLikelihood(const DiagGmm &gmm, const dsp::FeatureSequence &seq) {
  ARTREC_REQUIRE(seq.n_frames() >= 1, ErrorCode::kInsufficientFrames,
                 "no frames in '", seq.clip_id, "'");
  double total = 0.0;
  for (Eigen::Index start = 0; start < seq.n_frames();
       start += internal::kBlockFrames) {
    const Eigen::Index len =
        std::min(internal::kBlockFrames, seq.n_frames() - start);
    Matrix ll = gmm.JointLogLikelihoods(seq.frames.middleRows(start, len));
    total += internal::LogSumExpToPosteriors(ll).sum();
  }
  return total / static_cast<double>(seq.n_frames());
}

/// Trains a UBM on pooled frames (rows of `data`). If `history` is given it
/// receives the mean log-likelihood of the model entering each EM iteration,
/// followed by that of the final model (n_iters + 1 values).
inline DiagGmm TrainUbm(const Matrix &data, const UbmTrainConfig &config,
                        std::vector<double> *history = nullptr) {
  config.Validate();
  const int k = config.n_components;
  const Eigen::Index n = data.rows(), d = data.cols();
  ARTREC_REQUIRE(d >= 1, ErrorCode::kShape, "frames have zero dimension");
  ARTREC_REQUIRE(n >= 10 * static_cast<Eigen::Index>(k),
                 ErrorCode::kInsufficientData, "UBM with ", k,
                 " components needs >= ", 10 * k, " frames, got ", n);
  ARTREC_REQUIRE(data.allFinite(), ErrorCode::kData,
                 "UBM training frames contain non-finite values");

  const Eigen::RowVectorXd global_mean = data.colwise().mean();
  const Eigen::RowVectorXd global_var =
      (data.rowwise() - global_mean).array().square().colwise().mean();
  const Eigen::RowVectorXd floor =
      (global_var.array().max(1e-12) * config.var_floor).matrix();

  Rng rng(config.seed);
  std::vector<int> assignment;
  const Matrix centers =
      internal::KMeansPlusPlus(data, k, config.kmeans_rounds, rng, &assignment);

  Vector weights = Vector::Zero(k);
  Matrix means = centers, sq = Matrix::Zero(k, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    weights(assignment[i]) += 1.0;
    sq.row(assignment[i]) += (data.row(i) - centers.row(assignment[i]))
                                 .array().square().matrix();
  }
  Matrix variances(k, d);
  for (int c = 0; c < k; ++c) {
    if (weights(c) >= 2.0)
      variances.row(c) = (sq.row(c) / weights(c)).cwiseMax(floor);
    else
      variances.row(c) = global_var.cwiseMax(floor);
    weights(c) = std::max(weights(c), 1.0);
  }
  weights /= weights.sum();
  DiagGmm gmm(weights, means, variances);

  if (history) history->clear();
  for (int iter = 0; iter < config.n_iters; ++iter) {
    const internal::EmAccumulator acc = internal::AccumulateEm(gmm, data);
    if (history) history->push_back(acc.total_ll / static_cast<double>(n));

    Vector new_w = acc.occ / static_cast<double>(n);
    Matrix new_m = means, new_v = variances;
    for (int c = 0; c < k; ++c) {
      if (acc.occ(c) <= 0.0) continue;
      new_m.row(c) = acc.s1.row(c) / acc.occ(c);
      new_v.row(c) = (acc.s2.row(c) / acc.occ(c) -
                      new_m.row(c).array().square().matrix())
                         .cwiseMax(floor);
    }
    // Starved components are replaced by a perturbed half of the heaviest.
    for (int c = 0; c < k; ++c) {
      if (new_w(c) >= 1e-8) continue;
      Eigen::Index heavy;
      new_w.maxCoeff(&heavy);
      const Eigen::RowVectorXd offset = new_v.row(heavy).cwiseSqrt() * 0.1;
      new_m.row(c) = new_m.row(heavy) + offset;
      new_m.row(heavy) -= offset;
      new_v.row(c) = new_v.row(heavy);
      new_w(c) = new_w(heavy) * 0.5;
      new_w(heavy) *= 0.5;
    }
    new_w /= new_w.sum();
    means = new_m;
    variances = new_v;
    gmm = DiagGmm(new_w, new_m, new_v);
  }
  if (history)
    history->push_back(internal::AccumulateEm(gmm, data).total_ll /
                       static_cast<double>(n));
  return gmm;
}

/// Stacks the frames of several sequences into one matrix for TrainUbm.
inline Matrix PoolFrames(std::span<const dsp::FeatureSequence> seqs) {
  Eigen::Index total = 0, dim = -1;
  for (const auto &s : seqs) {
    if (dim < 0) dim = s.dim();
    ARTREC_REQUIRE(s.dim() == dim, ErrorCode::kShape,
                   "sequences have different dims");
    total += s.n_frames();
  }
  Matrix pooled(total, std::max<Eigen::Index>(dim, 0));
  Eigen::Index row = 0;
  for (const auto &s : seqs) {
    pooled.middleRows(row, s.n_frames()) = s.frames;
    row += s.n_frames();
  }
  return pooled;
}

}  // namespace ubm
}  // namespace artrec
