// artrec/evalkit.hpp

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

// Verification and identification metrics and score matrices.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "artrec/backend.hpp"
#include "artrec/common.hpp"
#include "artrec/error.hpp"

namespace artrec {
namespace evalkit {

struct TrialScore {
  std::string model_id;
  std::string test_track_id;
  double score = 0.0;
  bool is_target = false;
};

struct TrialSet {
  std::vector<TrialScore> trials;
  int n_models = 0;
  int n_tests = 0;

  void Split(std::vector<double> *targets, std::vector<double> *nontargets) const {
    targets->clear();
    nontargets->clear();
    for (const auto &t : trials)
      (t.is_target ? targets : nontargets)->push_back(t.score);
  }
};

/**
   Equal error rate.  For a threshold t, FAR(t) is the fraction of non-target
   scores >= t and FRR(t) the fraction of target scores < t.  Thresholds run
   over the sorted union of all scores followed by +infinity, giving a
   staircase of operating points from (FAR, FRR) = (1, 0) to (0, 1).  The EER
   is where the staircase meets FAR = FRR, linearly interpolated between the
   two bracketing operating points.
*/
inline double ComputeEer(std::span<const double> target_scores,
                         std::span<const double> nontarget_scores) {
  ARTREC_REQUIRE(!target_scores.empty() && !nontarget_scores.empty(),
                 ErrorCode::kInsufficientTrials,
                 "EER needs target and non-target scores (got ",
                 target_scores.size(), " and ", nontarget_scores.size(), ")");
  std::vector<double> tar(target_scores.begin(), target_scores.end());
  std::vector<double> non(nontarget_scores.begin(), nontarget_scores.end());
  for (double s : tar)
    ARTREC_REQUIRE(std::isfinite(s), ErrorCode::kData, "non-finite target score");
  for (double s : non)
    ARTREC_REQUIRE(std::isfinite(s), ErrorCode::kData, "non-finite non-target score");
  std::sort(tar.begin(), tar.end());
  std::sort(non.begin(), non.end());
  std::vector<double> thresholds;
  thresholds.reserve(tar.size() + non.size());
  std::merge(tar.begin(), tar.end(), non.begin(), non.end(),
             std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  const double n_tar = static_cast<double>(tar.size());
  const double n_non = static_cast<double>(non.size());
  std::size_t tar_below = 0, non_below = 0;
  double prev_far = 1.0, prev_frr = 0.0;
  for (std::size_t i = 0; i <= thresholds.size(); ++i) {
    double far = 0.0, frr = 1.0;  // threshold = +inf
    if (i < thresholds.size()) {
      const double t = thresholds[i];
      while (tar_below < tar.size() && tar[tar_below] < t) ++tar_below;
      while (non_below < non.size() && non[non_below] < t) ++non_below;
      far = static_cast<double>(non.size() - non_below) / n_non;
      frr = static_cast<double>(tar_below) / n_tar;
    }
    const double diff = far - frr;
    if (diff <= 0.0) {
      if (i == 0 || diff == 0.0) return far;
      const double prev_diff = prev_far - prev_frr;
      const double alpha = prev_diff / (prev_diff - diff);
      return prev_far + alpha * (far - prev_far);
    }
    prev_far = far;
    prev_frr = frr;
  }
  return 0.0;  // unreachable: the +inf point has FAR - FRR = -1
}

inline double ComputeEer(const TrialSet &trials) {
  std::vector<double> tar, non;
  trials.Split(&tar, &non);
  return ComputeEer(tar, non);
}

/// Index of the best-scoring model; ties go to the smallest artist id.
inline std::size_t ArgmaxModel(std::span<const backend::ArtistModel> models,
                               std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < models.size(); ++i) {
    if (scores[i] > scores[best] ||
        (scores[i] == scores[best] && models[i].artist_id < models[best].artist_id))
      best = i;
  }
  return best;
}

inline std::string Identify(std::span<const backend::ArtistModel> models,
                            const EmbeddingVector &test,
                            const backend::PldaModel &plda) {
  ARTREC_REQUIRE(!models.empty(), ErrorCode::kConfig,
                 "identification needs at least one enrolled model");
  std::vector<double> scores;
  scores.reserve(models.size());
  for (const auto &m : models) scores.push_back(plda.Score(m.vector, test));
  return models[ArgmaxModel(models, scores)].artist_id;
}

inline double Accuracy(std::span<const std::string> predictions,
                       std::span<const std::string> truth) {
  ARTREC_REQUIRE(predictions.size() == truth.size() && !truth.empty(),
                 ErrorCode::kShape, "accuracy needs equal nonzero lengths (",
                 predictions.size(), " vs ", truth.size(), ")");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (predictions[i] == truth[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

/// values(i, j) = S(model_i, test_j).
struct ScoreMatrix {
  std::vector<std::string> ids;
  Matrix values;

  double MeanDiagonal() const { return values.diagonal().mean(); }
  double MeanOffDiagonal() const {
    const auto n = values.rows();
    if (n < 2) return 0.0;
    return (values.sum() - values.diagonal().sum()) / static_cast<double>(n * (n - 1));
  }
};

using PairScorer = std::function<double(const EmbeddingVector &, const EmbeddingVector &)>;

/// Rows follow `models`; `tests` must cover the same artist ids (matched by
/// the vectors' track_id field) and are reordered to align with the rows.
inline ScoreMatrix BuildScoreMatrix(std::span<const backend::ArtistModel> models,
                                    std::span<const EmbeddingVector> tests,
                                    const PairScorer &scorer) {
  std::set<std::string> model_ids, test_ids;
  for (const auto &m : models) model_ids.insert(m.artist_id);
  for (const auto &t : tests) test_ids.insert(t.track_id);
  ARTREC_REQUIRE(model_ids == test_ids && model_ids.size() == models.size() &&
                     test_ids.size() == tests.size(),
                 ErrorCode::kConfig,
                 "score matrix needs the same artist ids on both axes");
  ScoreMatrix sm;
  const auto n = static_cast<Eigen::Index>(models.size());
  sm.values.resize(n, n);
  std::vector<const EmbeddingVector *> aligned;
  for (const auto &m : models) {
    sm.ids.push_back(m.artist_id);
    for (const auto &t : tests)
      if (t.track_id == m.artist_id) aligned.push_back(&t);
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      sm.values(i, j) = scorer(models[i].vector, *aligned[j]);
  return sm;
}

inline ScoreMatrix BuildScoreMatrix(std::span<const backend::ArtistModel> models,
                                    std::span<const EmbeddingVector> tests,
                                    const backend::PldaModel &plda) {
  return BuildScoreMatrix(models, tests,
                          [&plda](const EmbeddingVector &e, const EmbeddingVector &t) {
                            return plda.Score(e, t);
                          });
}

/// Floats are written with 9 significant digits.
inline std::string FormatFloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline void WriteScoreMatrixCsv(const ScoreMatrix &sm, std::ostream &os) {
  os << "id";
  for (const auto &id : sm.ids) os << ',' << id;
  os << '\n';
  for (std::size_t i = 0; i < sm.ids.size(); ++i) {
    os << sm.ids[i];
    for (std::size_t j = 0; j < sm.ids.size(); ++j)
      os << ',' << FormatFloat(sm.values(static_cast<Eigen::Index>(i),
                                          static_cast<Eigen::Index>(j)));
    os << '\n';
  }
}

struct EvalReport {
  std::string system;  // ivec, dcnn, early, late
  double eer = 0.0;
  double accuracy = 0.0;
  int n_train_artists = 0;
  std::uint64_t seed = 0;
};

inline void WriteReportCsv(std::span<const EvalReport> reports, std::ostream &os) {
  os << "n_train,system,eer,accuracy,seed\n";
  for (const auto &r : reports)
    os << r.n_train_artists << ',' << r.system << ',' << FormatFloat(r.eer) << ','
       << FormatFloat(r.accuracy) << ',' << r.seed << '\n';
}

}  // namespace evalkit
}  // namespace artrec
