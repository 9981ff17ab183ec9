// artrec/tests/ubm_test.cpp

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
#include "artrec/ubm.hpp"
#include "test_util.hpp"

namespace artrec {
namespace ubm {
namespace {

DiagGmm RandomGmm(Rng &rng, int c, int d) {
  Vector w(c);
  for (int i = 0; i < c; ++i) w(i) = Uniform(rng, 0.2, 1.0);
  w /= w.sum();
  Matrix v(c, d);
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < d; ++j) v(i, j) = Uniform(rng, 0.3, 2.0);
  return DiagGmm(w, GaussianMatrix(rng, c, d, 2.0), v);
}

// log sum_c w_c N(x; m_c, v_c), straight from the definition.
double NaiveLogDensity(const DiagGmm &g, const Vector &x) {
  double p = 0.0;
  for (int c = 0; c < g.NumComponents(); ++c) {
    double dens = g.weights()(c);
    for (int j = 0; j < g.Dim(); ++j) {
      const double v = g.variances()(c, j), diff = x(j) - g.means()(c, j);
      dens *= std::exp(-0.5 * diff * diff / v) / std::sqrt(2.0 * std::numbers::pi * v);
    }
    p += dens;
  }
  return std::log(p);
}

Matrix TwoClusters(Rng &rng, Eigen::Index n) {
  Matrix x = GaussianMatrix(rng, n, 2, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) x.row(i).array() += (i % 2 ? 3.0 : -3.0);
  return x;
}

void ExpectMonotone(const std::vector<double> &h) {
  for (std::size_t i = 1; i < h.size(); ++i)
    EXPECT_GE(h[i] - h[i - 1], -1e-9 * std::abs(h[i - 1])) << "iteration " << i;
}

TEST(TrainUbm, SingleComponentIsSampleMoments) {
  Rng rng(3);
  Matrix x = GaussianMatrix(rng, 400, 3, 1.5);
  x.col(1).array() += 4.0;
  UbmTrainConfig cfg;
  cfg.n_components = 1;
  cfg.n_iters = 1;
  const DiagGmm g = TrainUbm(x, cfg);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::RowVectorXd var = (x.rowwise() - mean).array().square().colwise().mean();
  EXPECT_LT((g.means().row(0) - mean).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((g.variances().row(0) - var).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_DOUBLE_EQ(g.weights()(0), 1.0);
}

TEST(TrainUbm, RecoversTwoClusters) {
  Rng rng(11);
  const Matrix x = TwoClusters(rng, 2000);
  UbmTrainConfig cfg;
  cfg.n_components = 2;
  cfg.seed = 4;
  const DiagGmm g = TrainUbm(x, cfg);
  const int lo = g.means()(0, 0) < g.means()(1, 0) ? 0 : 1;
  for (int j = 0; j < 2; ++j) {
    EXPECT_NEAR(g.means()(lo, j), -3.0, 0.15);
    EXPECT_NEAR(g.means()(1 - lo, j), 3.0, 0.15);
  }
}

TEST(TrainUbm, LogLikelihoodNonDecreasing) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    Matrix y = GaussianMatrix(rng, 3000, 4, 1.0);
    for (Eigen::Index i = 0; i < y.rows(); ++i) y(i, i % 4) += 4.0 * (i % 3);
    UbmTrainConfig cfg;
    cfg.n_components = 8;
    cfg.n_iters = 15;
    cfg.seed = seed;
    std::vector<double> h;
    TrainUbm(y, cfg, &h);
    ASSERT_EQ(h.size(), 16u);
    ExpectMonotone(h);
  }
}

TEST(TrainUbm, VariancesRespectFloor) {
  Rng rng(2);
  Matrix x = GaussianMatrix(rng, 500, 2, 1.0);
  for (Eigen::Index i = 0; i < 250; ++i) x.row(i).setConstant(5.0);  // a point mass
  UbmTrainConfig cfg;
  cfg.n_components = 4;
  cfg.var_floor = 1e-2;
  const DiagGmm g = TrainUbm(x, cfg);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::RowVectorXd var = (x.rowwise() - mean).array().square().colwise().mean();
  for (int c = 0; c < 4; ++c)
    for (int j = 0; j < 2; ++j) EXPECT_GE(g.variances()(c, j), cfg.var_floor * var(j));
  EXPECT_NEAR(g.weights().sum(), 1.0, 1e-10);
  EXPECT_GT(g.weights().minCoeff(), 0.0);
}

TEST(TrainUbm, Deterministic) {
  Rng rng(8);
  const Matrix x = TwoClusters(rng, 1000);
  UbmTrainConfig cfg;
  cfg.n_components = 4;
  cfg.seed = 77;
  const DiagGmm a = TrainUbm(x, cfg), b = TrainUbm(x, cfg);
  EXPECT_EQ(a.means(), b.means());
  EXPECT_EQ(a.variances(), b.variances());
  EXPECT_EQ(a.weights(), b.weights());
}

TEST(TrainUbm, Errors) {
  Rng rng(1);
  UbmTrainConfig cfg;
  cfg.n_components = 10;
  EXPECT_ARTREC_ERROR(TrainUbm(GaussianMatrix(rng, 99, 2, 1.0), cfg),
                      ErrorCode::kInsufficientData);
  Matrix x = GaussianMatrix(rng, 200, 2, 1.0);
  x(5, 1) = std::nan("");
  EXPECT_ARTREC_ERROR(TrainUbm(x, cfg), ErrorCode::kData);
  cfg.n_iters = 0;
  EXPECT_ARTREC_ERROR(TrainUbm(GaussianMatrix(rng, 200, 2, 1.0), cfg),
                      ErrorCode::kConfig);
}

TEST(Responsibilities, EquidistantFrameSplitsEvenly) {
  Vector w(2);
  w << 0.5, 0.5;
  Matrix m(2, 2), v = Matrix::Ones(2, 2);
  m << -1, 0, 1, 0;
  const Vector g = Responsibilities(DiagGmm(w, m, v), Vector::Zero(2));
  EXPECT_NEAR(g(0), 0.5, 1e-15);
  EXPECT_NEAR(g(1), 0.5, 1e-15);
}

TEST(Responsibilities, SumToOne) {
  Rng rng(21);
  const DiagGmm g = RandomGmm(rng, 7, 5);
  for (int t = 0; t < 50; ++t) {
    const Vector r = Responsibilities(g, GaussianVector(rng, 5, 20.0));
    EXPECT_NEAR(r.sum(), 1.0, 1e-12);
    EXPECT_GE(r.minCoeff(), 0.0);
  }
}

TEST(Responsibilities, FarSeparatedComponents) {
  Vector w(2);
  w << 0.5, 0.5;
  Matrix m(2, 1), v = Matrix::Ones(2, 1);
  m << 0.0, 10.0;
  const DiagGmm g(w, m, v);
  const Vector r = Responsibilities(g, Vector::Zero(1));
  // density ratio exp(-50) / (1 + exp(-50))
  EXPECT_GT(r(0), 0.999);
  EXPECT_NEAR(r(1), std::exp(-50.0) / (1.0 + std::exp(-50.0)), 1e-30);
}

TEST(Responsibilities, MatchesNaiveRatio) {
  Rng rng(5);
  const DiagGmm g = RandomGmm(rng, 4, 3);
  const Vector x = GaussianVector(rng, 3);
  const Vector r = Responsibilities(g, x);
  const double total = std::exp(NaiveLogDensity(g, x));
  for (int c = 0; c < 4; ++c) {
    double dens = g.weights()(c);
    for (int j = 0; j < 3; ++j) {
      const double var = g.variances()(c, j), diff = x(j) - g.means()(c, j);
      dens *= std::exp(-0.5 * diff * diff / var) / std::sqrt(2.0 * std::numbers::pi * var);
    }
    EXPECT_NEAR(r(c), dens / total, 1e-12);
  }
}

TEST(Responsibilities, DimensionMismatch) {
  Rng rng(5);
  EXPECT_ARTREC_ERROR(Responsibilities(RandomGmm(rng, 2, 3), Vector::Zero(4)),
                      ErrorCode::kShape);
}

TEST(AccumulateStats, OccupancySumsToFrames) {
  Rng rng(6);
  const DiagGmm g = RandomGmm(rng, 6, 4);
  const dsp::FeatureSequence seq{GaussianMatrix(rng, 321, 4, 2.0), "t"};
  const BaumWelchStats s = AccumulateStats(g, seq);
  EXPECT_NEAR(s.n.sum(), 321.0, 1e-8);
  EXPECT_EQ(s.n_frames, 321.0);
  EXPECT_GE(s.n.minCoeff(), 0.0);
}

TEST(AccumulateStats, SingleComponentIsCenteredSum) {
  Rng rng(7);
  Vector w = Vector::Ones(1);
  Matrix m(1, 3);
  m << 0.5, -1.0, 2.0;
  const DiagGmm g(w, m, Matrix::Ones(1, 3));
  const dsp::FeatureSequence seq{GaussianMatrix(rng, 40, 3, 1.0), "t"};
  const BaumWelchStats s = AccumulateStats(g, seq);
  const Eigen::RowVectorXd expect = (seq.frames.rowwise() - m.row(0)).colwise().sum();
  EXPECT_EQ(s.n(0), 40.0);
  EXPECT_LT((s.f.row(0) - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(AccumulateStats, FramesAtOneMeanGiveZeroRow) {
  Vector w(2);
  w << 0.5, 0.5;
  Matrix m(2, 2);
  m << 0, 0, 20, 20;
  const DiagGmm g(w, m, Matrix::Ones(2, 2));
  const dsp::FeatureSequence seq{Matrix::Zero(10, 2), "t"};
  const BaumWelchStats s = AccumulateStats(g, seq);
  EXPECT_LT(s.f.row(0).cwiseAbs().maxCoeff(), 1e-12);
  // component 1 has negligible occupancy
  EXPECT_LT(s.n(1), 1e-100);
}

TEST(AccumulateStats, MatchesDirectSummation) {
  Rng rng(31);
  const DiagGmm g = RandomGmm(rng, 5, 3);
  const dsp::FeatureSequence seq{GaussianMatrix(rng, 30, 3, 2.0), "t"};
  const BaumWelchStats s = AccumulateStats(g, seq);
  Vector n = Vector::Zero(5);
  Matrix f = Matrix::Zero(5, 3);
  for (Eigen::Index t = 0; t < 30; ++t) {
    const Vector x = seq.frames.row(t).transpose();
    const Vector r = Responsibilities(g, x);
    n += r;
    for (int c = 0; c < 5; ++c) f.row(c) += r(c) * (x.transpose() - g.means().row(c));
  }
  EXPECT_LT((s.n - n).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((s.f - f).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(AccumulateStats, ConcatenationIsSum) {
  Rng rng(12);
  const DiagGmm g = RandomGmm(rng, 5, 3);
  const dsp::FeatureSequence a{GaussianMatrix(rng, 5000, 3, 2.0), "a"};
  const dsp::FeatureSequence b{GaussianMatrix(rng, 77, 3, 2.0), "b"};
  dsp::FeatureSequence ab{Matrix(5077, 3), "ab"};
  ab.frames << a.frames, b.frames;
  BaumWelchStats sum = AccumulateStats(g, a);
  sum.Add(AccumulateStats(g, b));
  const BaumWelchStats joint = AccumulateStats(g, ab);
  EXPECT_LT((sum.n - joint.n).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((sum.f - joint.f).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_EQ(sum.n_frames, joint.n_frames);
}

TEST(AccumulateStats, EmptySequence) {
  Rng rng(12);
  const DiagGmm g = RandomGmm(rng, 2, 3);
  EXPECT_ARTREC_ERROR(AccumulateStats(g, dsp::FeatureSequence{Matrix(0, 3), "e"}),
                      ErrorCode::kInsufficientFrames);
  EXPECT_ARTREC_ERROR(AccumulateStats(g, dsp::FeatureSequence{Matrix(4, 2), "e"}),
                      ErrorCode::kShape);
}

TEST(LogLikelihood, StandardNormalAtZero) {
  const DiagGmm g(Vector::Ones(1), Matrix::Zero(1, 1), Matrix::Ones(1, 1));
  const dsp::FeatureSequence seq{Matrix::Zero(1, 1), "x"};
  EXPECT_NEAR(LogLikelihood(g, seq), -0.5 * std::log(2.0 * std::numbers::pi), 1e-15);
}

TEST(LogLikelihood, DuplicateFrameKeepsMean) {
  Rng rng(4);
  const DiagGmm g = RandomGmm(rng, 3, 2);
  const dsp::FeatureSequence one{GaussianMatrix(rng, 1, 2, 1.0), "x"};
  dsp::FeatureSequence two{Matrix(2, 2), "x"};
  two.frames << one.frames, one.frames;
  EXPECT_NEAR(LogLikelihood(g, one), LogLikelihood(g, two), 1e-14);
}

TEST(LogLikelihood, MatchesNaiveDensity) {
  Rng rng(40);
  for (int trial = 0; trial < 20; ++trial) {
    const int c = 1 + static_cast<int>(rng() % 6), d = 1 + static_cast<int>(rng() % 5);
    const DiagGmm g = RandomGmm(rng, c, d);
    const dsp::FeatureSequence seq{GaussianMatrix(rng, 25, d, 1.5), "x"};
    double naive = 0.0;
    for (Eigen::Index t = 0; t < 25; ++t)
      naive += NaiveLogDensity(g, seq.frames.row(t).transpose());
    EXPECT_NEAR(LogLikelihood(g, seq), naive / 25.0, 1e-10);
  }
}

TEST(DiagGmm, RejectsInvalidParameters) {
  Vector w(2);
  w << 0.6, 0.5;
  EXPECT_ARTREC_ERROR(DiagGmm(w, Matrix::Zero(2, 1), Matrix::Ones(2, 1)),
                      ErrorCode::kNumerical);
  w << 0.5, 0.5;
  Matrix v = Matrix::Ones(2, 1);
  v(1, 0) = 0.0;
  EXPECT_ARTREC_ERROR(DiagGmm(w, Matrix::Zero(2, 1), v), ErrorCode::kNumerical);
  EXPECT_ARTREC_ERROR(DiagGmm(w, Matrix::Zero(3, 1), Matrix::Ones(2, 1)),
                      ErrorCode::kShape);
}

}  // namespace
}  // namespace ubm
}  // namespace artrec
