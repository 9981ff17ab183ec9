// artrec/tvspace.hpp

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

// Total-variability model M = m + T w: EM training of T over Baum-Welch
// statistics and posterior-mean i-vector extraction.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "artrec/common.hpp"
#include "artrec/error.hpp"
#include "artrec/random.hpp"
#include "artrec/ubm.hpp"

namespace artrec {
namespace tvspace {

/// FNV-1a over the UBM parameters; identifies the UBM a T matrix belongs to.
inline std::string UbmFingerprint(const ubm::DiagGmm &gmm) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const double *p, Eigen::Index n) {
    const auto *bytes = reinterpret_cast<const unsigned char *>(p);
    for (Eigen::Index i = 0; i < n * static_cast<Eigen::Index>(sizeof(double)); ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  mix(gmm.weights().data(), gmm.weights().size());
  mix(gmm.means().data(), gmm.means().size());
  mix(gmm.variances().data(), gmm.variances().size());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct TotalVariabilityModel {
  Matrix t;  // (C*d) x r; row c*d + j is component c, dimension j
  int num_components = 0;
  int dim = 0;
  std::string ubm_ref;

  int Rank() const { return static_cast<int>(t.cols()); }

  void Validate() const {
    ARTREC_REQUIRE(t.cols() >= 1 && t.cols() <= t.rows(), ErrorCode::kConfig,
                   "need 1 <= r <= C*d (r=", t.cols(), ", C*d=", t.rows(), ")");
    ARTREC_REQUIRE(t.rows() == static_cast<Eigen::Index>(num_components) * dim,
                   ErrorCode::kShape, "T has ", t.rows(), " rows, expected ",
                   num_components, "*", dim);
    ARTREC_REQUIRE(t.allFinite(), ErrorCode::kNumerical,
                   "T contains non-finite entries");
  }
};

/// Per-(T, UBM) precomputation shared by every extraction.
class IvectorExtractor {
 public:
  IvectorExtractor(const TotalVariabilityModel &tv, const ubm::DiagGmm &gmm)
      : c_(tv.num_components), d_(tv.dim), r_(tv.Rank()) {
    tv.Validate();
    ARTREC_REQUIRE(gmm.NumComponents() == c_ && gmm.Dim() == d_,
                   ErrorCode::kShape, "T is for C=", c_, ", d=", d_,
                   " but the UBM has C=", gmm.NumComponents(), ", d=",
                   gmm.Dim());
    tt_sigma_inv_.resize(r_, static_cast<Eigen::Index>(c_) * d_);
    per_component_.resize(c_);
    for (int c = 0; c < c_; ++c) {
      const auto tc = tv.t.middleRows(static_cast<Eigen::Index>(c) * d_, d_);
      const Vector iv = gmm.inv_variances().row(c).transpose();
      tt_sigma_inv_.middleCols(static_cast<Eigen::Index>(c) * d_, d_) =
          tc.transpose() * iv.asDiagonal();
      per_component_[c] = tt_sigma_inv_.middleCols(
                              static_cast<Eigen::Index>(c) * d_, d_) * tc;
    }
  }

  int Rank() const { return r_; }

  /// L = I + sum_c N_c T_c' Sigma_c^-1 T_c.
  Matrix PosteriorPrecision(const ubm::BaumWelchStats &stats) const {
    CheckStats(stats);
    Matrix l = Matrix::Identity(r_, r_);
    for (int c = 0; c < c_; ++c)
      if (stats.n(c) != 0.0) l.noalias() += stats.n(c) * per_component_[c];
    return l;
  }

  /// T' Sigma^-1 F with F flattened component-major.
  Vector Projection(const ubm::BaumWelchStats &stats) const {
    CheckStats(stats);
    Vector b = Vector::Zero(r_);
    for (int c = 0; c < c_; ++c)
      b.noalias() += tt_sigma_inv_.middleCols(static_cast<Eigen::Index>(c) * d_, d_) *
                     stats.f.row(c).transpose();
    return b;
  }

  struct Posterior {
    Vector mean;
    Matrix covariance;  // L^-1
    double log_det_precision = 0.0;
    double linear_term = 0.0;  // mean' * b
  };

  Posterior ComputePosterior(const ubm::BaumWelchStats &stats,
                             bool need_covariance) const {
    const Matrix l = PosteriorPrecision(stats);
    const Vector b = Projection(stats);
    Eigen::LLT<Matrix> llt(l);
    ARTREC_REQUIRE(llt.info() == Eigen::Success, ErrorCode::kNumerical,
                   "posterior precision is not positive definite");
    Posterior post;
    post.mean = llt.solve(b);
    if (need_covariance) post.covariance = llt.solve(Matrix::Identity(r_, r_));
    post.log_det_precision =
        2.0 * llt.matrixLLT().diagonal().array().log().sum();
    post.linear_term = post.mean.dot(b);
    return post;
  }

  EmbeddingVector Extract(const ubm::BaumWelchStats &stats,
                          const std::string &track_id = "") const {
    return EmbeddingVector{ComputePosterior(stats, false).mean,
                           EmbeddingKind::kIvector, track_id};
  }

 private:
  void CheckStats(const ubm::BaumWelchStats &stats) const {
    ARTREC_REQUIRE(stats.NumComponents() == c_ && stats.Dim() == d_,
                   ErrorCode::kShape, "stats are C=", stats.NumComponents(),
                   ", d=", stats.Dim(), "; model is C=", c_, ", d=", d_);
  }

  int c_, d_, r_;
  Matrix tt_sigma_inv_;                // r x (C*d)
  std::vector<Matrix> per_component_;  // C matrices r x r
};

inline EmbeddingVector ExtractIvector(const TotalVariabilityModel &tv,
                                      const ubm::DiagGmm &gmm,
                                      const ubm::BaumWelchStats &stats,
                                      const std::string &track_id = "") {
  return IvectorExtractor(tv, gmm).Extract(stats, track_id);
}

struct TvTrainConfig {
  int rank = 64;
  int n_iters = 10;
  std::uint64_t seed = 0;
};

/// EM training of T. `history`, if given, receives the mean per-track
/// marginal log-likelihood (up to a T-independent constant) of the model
/// entering each iteration and of the final model: n_iters + 1 values.
inline TotalVariabilityModel TrainTv(const ubm::DiagGmm &gmm,
                                     std::span<const ubm::BaumWelchStats> stats_list,
                                     const TvTrainConfig &config,
                                     std::vector<double> *history = nullptr) {
  const int c_count = gmm.NumComponents(), d = gmm.Dim(), r = config.rank;
  const Eigen::Index cd = static_cast<Eigen::Index>(c_count) * d;
  ARTREC_REQUIRE(!stats_list.empty(), ErrorCode::kInsufficientData,
                 "no statistics to train T on");
  ARTREC_REQUIRE(r >= 1 && r <= cd, ErrorCode::kConfig,
                 "i-vector dimension r=", r, " must be in [1, C*d=", cd, "]");
  ARTREC_REQUIRE(config.n_iters >= 0, ErrorCode::kConfig,
                 "n_iters must be >= 0");
  for (const auto &s : stats_list)
    ARTREC_REQUIRE(s.NumComponents() == c_count && s.Dim() == d,
                   ErrorCode::kShape, "stats do not match the UBM dimensions");

  TotalVariabilityModel tv;
  tv.num_components = c_count;
  tv.dim = d;
  tv.ubm_ref = UbmFingerprint(gmm);
  Rng rng(config.seed);
  tv.t = GaussianMatrix(rng, cd, r, 0.1 * std::sqrt(gmm.variances().mean()));

  const Eigen::Index n_tracks = static_cast<Eigen::Index>(stats_list.size());
  Vector occupancy = Vector::Zero(c_count);
  for (const auto &s : stats_list) occupancy += s.n;

  if (history) history->clear();
  const Eigen::Index chunk = 256;
  Matrix moments(static_cast<Eigen::Index>(r) * r, chunk);
  Matrix occ(chunk, c_count);
  Matrix means(r, chunk);
  Matrix flat_f(cd, chunk);
  for (int iter = 0;; ++iter) {
    const IvectorExtractor extractor(tv, gmm);
    double objective = 0.0;
    Matrix a = Matrix::Zero(static_cast<Eigen::Index>(r) * r, c_count);
    Matrix cacc = Matrix::Zero(cd, r);
    for (Eigen::Index start = 0; start < n_tracks; start += chunk) {
      const Eigen::Index len = std::min(chunk, n_tracks - start);
      for (Eigen::Index i = 0; i < len; ++i) {
        const auto &s = stats_list[start + i];
        const auto post = extractor.ComputePosterior(s, iter < config.n_iters);
        objective += -0.5 * post.log_det_precision + 0.5 * post.linear_term;
        if (iter == config.n_iters) continue;
        Matrix ew = post.covariance;
        ew.noalias() += post.mean * post.mean.transpose();
        moments.col(i) = ew.reshaped();
        occ.row(i) = s.n.transpose();
        means.col(i) = post.mean;
        flat_f.col(i) = s.f.transpose().reshaped();
      }
      if (iter == config.n_iters) continue;
      a.noalias() += moments.leftCols(len) * occ.topRows(len);
      cacc.noalias() += flat_f.leftCols(len) * means.leftCols(len).transpose();
    }
    if (history) history->push_back(objective / static_cast<double>(n_tracks));
    if (iter == config.n_iters) break;

    for (int c = 0; c < c_count; ++c) {
      if (occupancy(c) == 0.0) continue;  // no evidence; T_c stays as is
      const Matrix ac = a.col(c).reshaped(r, r);
      Eigen::LLT<Matrix> llt(ac);
      ARTREC_REQUIRE(llt.info() == Eigen::Success, ErrorCode::kNumerical,
                     "singular M-step system for component ", c);
      tv.t.middleRows(static_cast<Eigen::Index>(c) * d, d) =
          llt.solve(cacc.middleRows(static_cast<Eigen::Index>(c) * d, d).transpose())
              .transpose();
    }
    ARTREC_REQUIRE(tv.t.allFinite(), ErrorCode::kNumerical,
                   "T became non-finite at iteration ", iter);
  }
  return tv;
}

inline EmbeddingVector LengthNormalize(const EmbeddingVector &v) {
  const double norm = v.values.norm();
  ARTREC_REQUIRE(norm > 0.0 && std::isfinite(norm), ErrorCode::kDegenerateVector,
                 "cannot length-normalize a zero vector ('", v.track_id, "')");
  return EmbeddingVector{v.values / norm, v.kind, v.track_id};
}

}  // namespace tvspace
}  // namespace artrec
