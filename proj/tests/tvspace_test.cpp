// artrec/tests/tvspace_test.cpp

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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "artrec/random.hpp"
#include "artrec/tvspace.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace artrec {
namespace tvspace {
namespace {

ubm::DiagGmm MakeUbm(Rng &rng, int c, int d) {
  Matrix v(c, d);
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < d; ++j) v(i, j) = Uniform(rng, 0.5, 2.0);
  return ubm::DiagGmm(Vector::Constant(c, 1.0 / c), GaussianMatrix(rng, c, d, 1.0), v);
}

TotalVariabilityModel MakeTv(const Matrix &t, int c, int d) {
  TotalVariabilityModel tv;
  tv.t = t;
  tv.num_components = c;
  tv.dim = d;
  return tv;
}

// Stats of one track drawn from M = m + T w with per-component counts.
ubm::BaumWelchStats SampleStats(Rng &rng, const ubm::DiagGmm &g, const Matrix &t,
                                const Vector &w, double frames_per_component) {
  const int c = g.NumComponents(), d = g.Dim();
  ubm::BaumWelchStats s = ubm::BaumWelchStats::Zero(c, d);
  const Vector shift = t * w;
  for (int k = 0; k < c; ++k) {
    const double n = frames_per_component * Uniform(rng, 0.5, 1.5);
    s.n(k) = n;
    for (int j = 0; j < d; ++j)
      s.f(k, j) = n * shift(k * d + j) +
                  std::sqrt(n * g.variances()(k, j)) * Gaussian(rng);
  }
  s.n_frames = s.n.sum();
  return s;
}

double LargestPrincipalAngleDegrees(const Matrix &a, const Matrix &b) {
  const Matrix qa = a.householderQr().householderQ() * Matrix::Identity(a.rows(), a.cols());
  const Matrix qb = b.householderQr().householderQ() * Matrix::Identity(b.rows(), b.cols());
  Eigen::JacobiSVD<Matrix> svd(qa.transpose() * qb);
  const double smallest = std::min(1.0, svd.singularValues().minCoeff());
  return std::acos(smallest) * 180.0 / std::numbers::pi;
}

TEST(ExtractIvector, ScalarClosedForm) {
  const ubm::DiagGmm g(Vector::Ones(1), Matrix::Zero(1, 1), Matrix::Ones(1, 1));
  const TotalVariabilityModel tv = MakeTv(Matrix::Ones(1, 1), 1, 1);
  for (double x : {0.0, 1.0, -3.25, 17.0, 1e-3}) {
    const dsp::FeatureSequence seq{Matrix::Constant(1, 1, x), "x"};
    const ubm::BaumWelchStats s = ubm::AccumulateStats(g, seq);
    EXPECT_EQ(s.n(0), 1.0);
    EXPECT_EQ(s.f(0, 0), x);
    const EmbeddingVector w = ExtractIvector(tv, g, s, "x");
    EXPECT_EQ(w.kind, EmbeddingKind::kIvector);
    EXPECT_NEAR(w.values(0), x / 2.0, 1e-12);
  }
}

TEST(ExtractIvector, ZeroStatsGiveZero) {
  Rng rng(1);
  const ubm::DiagGmm g = MakeUbm(rng, 3, 2);
  const TotalVariabilityModel tv = MakeTv(GaussianMatrix(rng, 6, 4, 1.0), 3, 2);
  const EmbeddingVector w = ExtractIvector(tv, g, ubm::BaumWelchStats::Zero(3, 2));
  EXPECT_EQ(w.values, Vector::Zero(4));
}

TEST(ExtractIvector, MatchesDenseOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const int c = 2, d = 2, r = 2;
    const ubm::DiagGmm g = MakeUbm(rng, c, d);
    const Matrix t = GaussianMatrix(rng, c * d, r, 1.0);
    const ubm::BaumWelchStats s = SampleStats(rng, g, t, GaussianVector(rng, r), 20.0);
    const Vector w = ExtractIvector(MakeTv(t, c, d), g, s).values;
    EXPECT_LT((w - testing::DenseIvector(t, g, s)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(ExtractIvector, LinearInFirstOrderStats) {
  Rng rng(3);
  const ubm::DiagGmm g = MakeUbm(rng, 4, 3);
  const Matrix t = GaussianMatrix(rng, 12, 5, 1.0);
  const TotalVariabilityModel tv = MakeTv(t, 4, 3);
  ubm::BaumWelchStats s = SampleStats(rng, g, t, GaussianVector(rng, 5), 10.0);
  const Vector w = ExtractIvector(tv, g, s).values;
  s.f *= -2.5;
  EXPECT_LT((ExtractIvector(tv, g, s).values + 2.5 * w).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(ExtractIvector, PrecisionIsPositiveDefinite) {
  Rng rng(4);
  const ubm::DiagGmm g = MakeUbm(rng, 4, 3);
  const IvectorExtractor ex(MakeTv(GaussianMatrix(rng, 12, 6, 2.0), 4, 3), g);
  for (int i = 0; i < 20; ++i) {
    ubm::BaumWelchStats s = ubm::BaumWelchStats::Zero(4, 3);
    for (int k = 0; k < 4; ++k) s.n(k) = i % 2 ? Uniform(rng, 0.0, 100.0) : 0.0;
    const Matrix l = ex.PosteriorPrecision(s);
    EXPECT_LT((l - l.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(Eigen::LLT<Matrix>(l).info(), Eigen::Success);
  }
}

TEST(ExtractIvector, ShapeMismatch) {
  Rng rng(5);
  const ubm::DiagGmm g = MakeUbm(rng, 2, 2);
  const TotalVariabilityModel tv = MakeTv(GaussianMatrix(rng, 4, 2, 1.0), 2, 2);
  EXPECT_ARTREC_ERROR(ExtractIvector(tv, g, ubm::BaumWelchStats::Zero(3, 2)),
                      ErrorCode::kShape);
  EXPECT_ARTREC_ERROR(ExtractIvector(tv, MakeUbm(rng, 3, 2), ubm::BaumWelchStats::Zero(3, 2)),
                      ErrorCode::kShape);
}

TEST(TrainTv, ZeroStatsExtractZero) {
  Rng rng(6);
  const ubm::DiagGmm g = MakeUbm(rng, 2, 3);
  std::vector<ubm::BaumWelchStats> stats(10, ubm::BaumWelchStats::Zero(2, 3));
  TvTrainConfig cfg;
  cfg.rank = 3;
  cfg.n_iters = 3;
  const TotalVariabilityModel tv = TrainTv(g, stats, cfg);
  for (const auto &s : stats) EXPECT_EQ(ExtractIvector(tv, g, s).values, Vector::Zero(3));
}

TEST(TrainTv, RecoversSubspace) {
  Rng rng(7);
  const ubm::DiagGmm g = MakeUbm(rng, 2, 2);
  const Matrix true_t = GaussianMatrix(rng, 4, 4, 1.0);
  std::vector<ubm::BaumWelchStats> stats;
  for (int i = 0; i < 500; ++i)
    stats.push_back(SampleStats(rng, g, true_t, GaussianVector(rng, 4), 50.0));
  TvTrainConfig cfg;
  cfg.rank = 4;
  cfg.n_iters = 20;
  const TotalVariabilityModel tv = TrainTv(g, stats, cfg);
  EXPECT_LT(LargestPrincipalAngleDegrees(tv.t, true_t), 10.0);
}

TEST(TrainTv, RecoversLowRankSubspace) {
  Rng rng(8);
  const ubm::DiagGmm g = MakeUbm(rng, 4, 3);
  const Matrix true_t = GaussianMatrix(rng, 12, 2, 1.0);
  std::vector<ubm::BaumWelchStats> stats;
  for (int i = 0; i < 500; ++i)
    stats.push_back(SampleStats(rng, g, true_t, GaussianVector(rng, 2), 50.0));
  TvTrainConfig cfg;
  cfg.rank = 2;
  cfg.n_iters = 20;
  cfg.seed = 3;
  const TotalVariabilityModel tv = TrainTv(g, stats, cfg);
  EXPECT_LT(LargestPrincipalAngleDegrees(tv.t, true_t), 10.0);
}

TEST(TrainTv, ObjectiveNonDecreasing) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed + 100);
    const ubm::DiagGmm g = MakeUbm(rng, 3, 3);
    const Matrix true_t = GaussianMatrix(rng, 9, 3, 1.0);
    std::vector<ubm::BaumWelchStats> stats;
    for (int i = 0; i < 200; ++i)
      stats.push_back(SampleStats(rng, g, true_t, GaussianVector(rng, 3), 30.0));
    TvTrainConfig cfg;
    cfg.rank = 4;
    cfg.n_iters = 15;
    cfg.seed = seed;
    std::vector<double> h;
    TrainTv(g, stats, cfg, &h);
    ASSERT_EQ(h.size(), 16u);
    for (std::size_t i = 1; i < h.size(); ++i)
      EXPECT_GE(h[i] - h[i - 1], -1e-9 * std::abs(h[i - 1]));
  }
}

TEST(TrainTv, Deterministic) {
  Rng rng(9);
  const ubm::DiagGmm g = MakeUbm(rng, 2, 2);
  const Matrix true_t = GaussianMatrix(rng, 4, 2, 1.0);
  std::vector<ubm::BaumWelchStats> stats;
  for (int i = 0; i < 30; ++i)
    stats.push_back(SampleStats(rng, g, true_t, GaussianVector(rng, 2), 10.0));
  TvTrainConfig cfg;
  cfg.rank = 2;
  cfg.seed = 5;
  const auto a = TrainTv(g, stats, cfg), b = TrainTv(g, stats, cfg);
  EXPECT_EQ(0, std::memcmp(a.t.data(), b.t.data(), sizeof(double) * a.t.size()));
  EXPECT_EQ(a.ubm_ref, UbmFingerprint(g));
}

TEST(TrainTv, Errors) {
  Rng rng(10);
  const ubm::DiagGmm g = MakeUbm(rng, 2, 2);
  std::vector<ubm::BaumWelchStats> stats(3, ubm::BaumWelchStats::Zero(2, 2));
  TvTrainConfig cfg;
  cfg.rank = 5;
  EXPECT_ARTREC_ERROR(TrainTv(g, stats, cfg), ErrorCode::kConfig);
  cfg.rank = 2;
  EXPECT_ARTREC_ERROR(TrainTv(g, std::vector<ubm::BaumWelchStats>{}, cfg),
                      ErrorCode::kInsufficientData);
  stats.push_back(ubm::BaumWelchStats::Zero(3, 2));
  EXPECT_ARTREC_ERROR(TrainTv(g, stats, cfg), ErrorCode::kShape);
}

TEST(LengthNormalize, HandComputed) {
  Vector v(2);
  v << 3.0, 4.0;
  const EmbeddingVector out = LengthNormalize(EmbeddingVector{v, EmbeddingKind::kIvector, "a"});
  EXPECT_NEAR(out.values(0), 0.6, 1e-15);
  EXPECT_NEAR(out.values(1), 0.8, 1e-15);
  EXPECT_EQ(out.track_id, "a");
}

TEST(LengthNormalize, UnitAndScaleInvariance) {
  Rng rng(11);
  for (int i = 0; i < 20; ++i) {
    const EmbeddingVector v{GaussianVector(rng, 7), EmbeddingKind::kDeep, ""};
    const EmbeddingVector u = LengthNormalize(v);
    EXPECT_NEAR(u.values.norm(), 1.0, 1e-12);
    EXPECT_LT((LengthNormalize(u).values - u.values).cwiseAbs().maxCoeff(), 1e-12);
    const EmbeddingVector scaled{10.0 * v.values, v.kind, ""};
    EXPECT_LT((LengthNormalize(scaled).values - u.values).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(LengthNormalize, ZeroVector) {
  EXPECT_ARTREC_ERROR(
      LengthNormalize(EmbeddingVector{Vector::Zero(3), EmbeddingKind::kIvector, "z"}),
      ErrorCode::kDegenerateVector);
}

}  // namespace
}  // namespace tvspace
}  // namespace artrec
