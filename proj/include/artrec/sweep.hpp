// artrec/sweep.hpp

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

// The end-to-end experiment: train both front ends and the PLDA back ends
// on a set of training artists, enroll the evaluation artists and score
// every (model, test track) trial. The stage functions are shared with the
// command-line tool.

#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "artrec/backend.hpp"
#include "artrec/corpus/dataset.hpp"
#include "artrec/corpus/manifest.hpp"
#include "artrec/deepnet.hpp"
#include "artrec/error.hpp"
#include "artrec/evalkit.hpp"
#include "artrec/random.hpp"
#include "artrec/tvspace.hpp"
#include "artrec/ubm.hpp"

namespace artrec {
namespace evalkit {

enum class System { kIvec, kDcnn, kEarly, kLate };

inline const std::vector<System> &AllSystems() {
  static const std::vector<System> all = {System::kIvec, System::kDcnn,
                                          System::kEarly, System::kLate};
  return all;
}

inline std::string SystemName(System s) {
  switch (s) {
    case System::kIvec: return "ivec";
    case System::kDcnn: return "dcnn";
    case System::kEarly: return "early";
    case System::kLate: return "late";
  }
  return "";
}

inline System ParseSystem(const std::string &s) {
  for (System sys : AllSystems())
    if (SystemName(sys) == s) return sys;
  artrec::internal::Fail(ErrorCode::kConfig, "unknown system '", s,
                 "' (expected ivec, dcnn, early or late)");
}

struct PipelineConfig {
  ubm::UbmTrainConfig ubm;
  int ubm_frames_per_track = -1;  // frames subsampled per track for UBM EM; < 0 = all
  tvspace::TvTrainConfig tv;
  deepnet::NetConfig net;
  int train_segments_per_track = -1;  // < 0 = every segment
  bool late_znorm = false;
  std::function<void(const std::string &)> log;

  void Log(const std::string &msg) const {
    if (log) log(msg);
  }
};

using Artists = std::vector<const corpus::ArtistEntry *>;
using EmbeddingTable = std::map<std::string, EmbeddingVector>;  // by track id
using StatsTable = std::map<std::string, ubm::BaumWelchStats>;

inline void CheckDisjoint(const Artists &train, const Artists &eval) {
  std::set<std::string> ids;
  for (const auto *a : train) ids.insert(a->artist_id);
  for (const auto *a : eval)
    ARTREC_REQUIRE(!ids.count(a->artist_id), ErrorCode::kProtocolViolation,
                   "artist '", a->artist_id,
                   "' is used for both training and evaluation");
}

/// Seeded subset of `count` training artists, kept in manifest order.
inline Artists SubsampleArtists(const Artists &train, int count, std::uint64_t seed) {
  ARTREC_REQUIRE(count >= 2 && count <= static_cast<int>(train.size()),
                 ErrorCode::kConfig, "training artist count ", count,
                 " must be in [2, ", train.size(), "]");
  std::vector<std::size_t> idx(train.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(static_cast<std::size_t>(count));
  std::sort(idx.begin(), idx.end());
  Artists out;
  for (std::size_t i : idx) out.push_back(train[i]);
  return out;
}

inline ubm::DiagGmm TrainUbmStage(const corpus::CorpusData &data, const Artists &artists,
                                  const PipelineConfig &cfg,
                                  std::vector<double> *history = nullptr) {
  std::vector<dsp::FeatureSequence> seqs;
  for (const auto *a : artists) {
    for (const auto &t : a->tracks) {
      dsp::FeatureSequence s = data.Frames(t);
      const auto n = s.frames.rows();
      if (cfg.ubm_frames_per_track > 0 && n > cfg.ubm_frames_per_track) {
        const Eigen::Index keep = cfg.ubm_frames_per_track;
        Matrix sub(keep, s.frames.cols());
        for (Eigen::Index i = 0; i < keep; ++i) sub.row(i) = s.frames.row(i * n / keep);
        s.frames = std::move(sub);
      }
      seqs.push_back(std::move(s));
    }
  }
  const Matrix pooled = ubm::PoolFrames(seqs);
  seqs.clear();
  cfg.Log("training UBM: C=" + std::to_string(cfg.ubm.n_components) + " on " +
          std::to_string(pooled.rows()) + " frames");
  return ubm::TrainUbm(pooled, cfg.ubm, history);
}

inline StatsTable ComputeStats(const corpus::CorpusData &data, const ubm::DiagGmm &gmm,
                               const Artists &artists) {
  StatsTable out;
  for (const auto *a : artists)
    for (const auto &t : a->tracks)
      out.emplace(t.track_id, ubm::AccumulateStats(gmm, data.Frames(t)));
  return out;
}

inline tvspace::TotalVariabilityModel TrainTvStage(const ubm::DiagGmm &gmm,
                                                   const StatsTable &stats,
                                                   const Artists &artists,
                                                   const PipelineConfig &cfg,
                                                   std::vector<double> *history = nullptr) {
  std::vector<ubm::BaumWelchStats> list;
  for (const auto *a : artists)
    for (const auto &t : a->tracks) list.push_back(stats.at(t.track_id));
  cfg.Log("training T: r=" + std::to_string(cfg.tv.rank) + " on " +
          std::to_string(list.size()) + " tracks");
  return tvspace::TrainTv(gmm, list, cfg.tv, history);
}

inline EmbeddingTable ExtractIvectors(const tvspace::TotalVariabilityModel &tv,
                                      const ubm::DiagGmm &gmm, const StatsTable &stats) {
  const tvspace::IvectorExtractor extractor(tv, gmm);
  EmbeddingTable out;
  for (const auto &[id, s] : stats) out.emplace(id, extractor.Extract(s, id));
  return out;
}

inline deepnet::ConvNet TrainDcnnStage(const corpus::CorpusData &data,
                                       const Artists &artists, const PipelineConfig &cfg,
                                       deepnet::TrainHistory *history = nullptr) {
  std::vector<dsp::MelSpectrogram> segments;
  std::vector<int> labels;
  for (std::size_t k = 0; k < artists.size(); ++k) {
    for (const auto &t : artists[k]->tracks) {
      for (auto &s : data.Segments(*artists[k], t, cfg.train_segments_per_track)) {
        segments.push_back(std::move(s));
        labels.push_back(static_cast<int>(k));
      }
    }
  }
  cfg.Log("training DCNN: " + std::to_string(artists.size()) + " classes, " +
          std::to_string(segments.size()) + " segments");
  deepnet::ConvNet net =
      deepnet::BuildNetwork(static_cast<int>(artists.size()), cfg.net, cfg.net.seed);
  deepnet::TrainHistory h = deepnet::TrainNetwork(net, segments, labels);
  if (!h.loss.empty())
    cfg.Log("DCNN final epoch: loss " + FormatFloat(h.loss.back()) + ", accuracy " +
            FormatFloat(h.accuracy.back()));
  if (history) *history = std::move(h);
  return net;
}

inline EmbeddingTable ExtractDeep(const deepnet::ConvNet &net,
                                  const corpus::CorpusData &data, const Artists &artists) {
  EmbeddingTable out;
  for (const auto *a : artists) {
    for (const auto &t : a->tracks) {
      const auto segments = data.Segments(*a, t);
      out.emplace(t.track_id, deepnet::EmbedSegments(net, segments, t.track_id));
    }
  }
  return out;
}

inline EmbeddingTable FuseEarly(const EmbeddingTable &ivec, const EmbeddingTable &deep) {
  EmbeddingTable out;
  for (const auto &[id, v] : ivec) {
    const auto it = deep.find(id);
    ARTREC_REQUIRE(it != deep.end(), ErrorCode::kFusion, "track '", id,
                   "' has an i-vector but no deep feature");
    out.emplace(id, backend::EarlyFuse(v, it->second));
  }
  return out;
}

inline backend::PldaModel TrainPldaStage(const EmbeddingTable &table,
                                         const Artists &artists) {
  std::vector<EmbeddingVector> vectors;
  std::vector<std::string> labels;
  for (const auto *a : artists) {
    for (const auto &t : a->tracks) {
      const auto it = table.find(t.track_id);
      ARTREC_REQUIRE(it != table.end(), ErrorCode::kData, "no embedding for track '",
                     t.track_id, "'");
      vectors.push_back(it->second);
      labels.push_back(a->artist_id);
    }
  }
  return backend::TrainPlda(vectors, labels);
}

namespace internal {

inline std::vector<EmbeddingVector> Gather(const EmbeddingTable &table,
                                           const corpus::ArtistEntry &artist,
                                           corpus::Split split) {
  std::vector<EmbeddingVector> out;
  for (const auto &t : artist.tracks) {
    if (t.split != split) continue;
    const auto it = table.find(t.track_id);
    ARTREC_REQUIRE(it != table.end(), ErrorCode::kData, "no embedding for track '",
                   t.track_id, "'");
    out.push_back(it->second);
  }
  return out;
}

}  // namespace internal

inline std::vector<backend::ArtistModel> EnrollStage(const EmbeddingTable &table,
                                                     const Artists &eval) {
  std::vector<backend::ArtistModel> models;
  for (const auto *a : eval)
    models.push_back(backend::EnrollArtist(
        a->artist_id, internal::Gather(table, *a, corpus::Split::kEnroll)));
  return models;
}

/// Scores of one system on the evaluation set. trial_scores(i, j) is model i
/// against test track j.
struct SystemScores {
  std::vector<std::string> model_ids;
  std::vector<std::string> test_ids;
  std::vector<std::string> test_truth;  // artist of each test track
  Matrix trial_scores;
  ScoreMatrix matrix;

  TrialSet Trials() const {
    TrialSet ts;
    ts.n_models = static_cast<int>(model_ids.size());
    ts.n_tests = static_cast<int>(test_ids.size());
    for (std::size_t i = 0; i < model_ids.size(); ++i)
      for (std::size_t j = 0; j < test_ids.size(); ++j)
        ts.trials.push_back(TrialScore{
            model_ids[i], test_ids[j],
            trial_scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
            test_truth[j] == model_ids[i]});
    return ts;
  }

  double Eer() const { return ComputeEer(Trials()); }

  double IdentificationAccuracy(std::span<const backend::ArtistModel> models) const {
    std::vector<std::string> predictions;
    std::vector<double> column(model_ids.size());
    for (std::size_t j = 0; j < test_ids.size(); ++j) {
      for (std::size_t i = 0; i < model_ids.size(); ++i)
        column[i] = trial_scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      predictions.push_back(model_ids[ArgmaxModel(models, column)]);
    }
    return Accuracy(predictions, test_truth);
  }
};

inline SystemScores ScoreSystem(std::span<const backend::ArtistModel> models,
                                const EmbeddingTable &table, const Artists &eval,
                                const backend::PldaModel &plda) {
  SystemScores out;
  std::vector<EmbeddingVector> tests, aggregated;
  for (const auto &m : models) out.model_ids.push_back(m.artist_id);
  for (const auto *a : eval) {
    auto vs = internal::Gather(table, *a, corpus::Split::kTest);
    for (const auto &v : vs) {
      out.test_ids.push_back(v.track_id);
      out.test_truth.push_back(a->artist_id);
      tests.push_back(v);
    }
    aggregated.push_back(backend::EnrollArtist(a->artist_id, vs).vector);
  }
  // Preprocess once; scoring is then a cheap closed form per pair.
  std::vector<Vector> pm, pt;
  for (const auto &m : models) pm.push_back(plda.Preprocess(m.vector.values));
  for (const auto &t : tests) pt.push_back(plda.Preprocess(t.values));
  out.trial_scores.resize(static_cast<Eigen::Index>(pm.size()),
                          static_cast<Eigen::Index>(pt.size()));
  for (std::size_t i = 0; i < pm.size(); ++i)
    for (std::size_t j = 0; j < pt.size(); ++j)
      out.trial_scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          plda.ScorePreprocessed(pm[i], pt[j]);
  out.matrix = BuildScoreMatrix(models, aggregated, plda);
  return out;
}

/// Late fusion of two systems scored on the same trials.
inline SystemScores FuseLate(const SystemScores &iv, const SystemScores &deep, bool znorm) {
  ARTREC_REQUIRE(iv.model_ids == deep.model_ids && iv.test_ids == deep.test_ids,
                 ErrorCode::kFusion, "late fusion of systems with different trials");
  SystemScores out = iv;
  const auto fuse = [znorm](const Matrix &a, const Matrix &b) {
    const std::vector<double> fa(a.data(), a.data() + a.size());
    const std::vector<double> fb(b.data(), b.data() + b.size());
    const std::vector<double> f = backend::LateFuseTrials(fa, fb, znorm);
    return Matrix(Eigen::Map<const Matrix>(f.data(), a.rows(), a.cols()));
  };
  out.trial_scores = fuse(iv.trial_scores, deep.trial_scores);
  out.matrix.values = fuse(iv.matrix.values, deep.matrix.values);
  return out;
}

/// Trained artifacts of one pipeline run.
struct PipelineArtifacts {
  std::optional<ubm::DiagGmm> gmm;
  std::optional<tvspace::TotalVariabilityModel> tv;
  std::optional<deepnet::ConvNet> net;
  std::map<std::string, backend::PldaModel> plda;  // ivec, deep, early
  std::map<std::string, std::vector<backend::ArtistModel>> models;
};

struct SystemResult {
  EvalReport report;
  ScoreMatrix matrix;
};

/// One full train + evaluate run on the given training artists.
inline std::vector<SystemResult> RunPipeline(const corpus::CorpusData &data,
                                             const Artists &train, const Artists &eval,
                                             std::span<const System> systems,
                                             std::uint64_t seed, const PipelineConfig &cfg,
                                             PipelineArtifacts *artifacts = nullptr) {
  CheckDisjoint(train, eval);
  const std::set<System> want(systems.begin(), systems.end());
  const bool need_ivec = want.count(System::kIvec) || want.count(System::kEarly) ||
                         want.count(System::kLate);
  const bool need_deep = want.count(System::kDcnn) || want.count(System::kEarly) ||
                         want.count(System::kLate);
  Artists all = train;
  all.insert(all.end(), eval.begin(), eval.end());

  EmbeddingTable ivec, deep;
  if (need_ivec) {
    PipelineConfig c = cfg;
    c.ubm.seed = DeriveSeed(seed, 1);
    c.tv.seed = DeriveSeed(seed, 2);
    const ubm::DiagGmm gmm = TrainUbmStage(data, train, c);
    const StatsTable stats = ComputeStats(data, gmm, all);
    const auto tv = TrainTvStage(gmm, stats, train, c);
    ivec = ExtractIvectors(tv, gmm, stats);
    if (artifacts) {
      artifacts->gmm = gmm;
      artifacts->tv = tv;
    }
  }
  if (need_deep) {
    PipelineConfig c = cfg;
    c.net.seed = DeriveSeed(seed, 3);
    const deepnet::ConvNet net = TrainDcnnStage(data, train, c);
    cfg.Log("extracting deep features");
    deep = ExtractDeep(net, data, all);
    if (artifacts) artifacts->net = net;
  }

  std::map<System, SystemScores> scores;
  std::map<System, std::vector<backend::ArtistModel>> models;
  const auto run_branch = [&](System sys, const std::string &key,
                              const EmbeddingTable &table) {
    const backend::PldaModel plda = TrainPldaStage(table, train);
    models[sys] = EnrollStage(table, eval);
    scores.emplace(sys, ScoreSystem(models[sys], table, eval, plda));
    if (artifacts) {
      artifacts->plda.insert_or_assign(key, plda);
      artifacts->models[key] = models[sys];
    }
  };
  if (need_ivec) run_branch(System::kIvec, "ivec", ivec);
  if (need_deep) run_branch(System::kDcnn, "deep", deep);
  if (want.count(System::kEarly)) run_branch(System::kEarly, "early", FuseEarly(ivec, deep));
  if (want.count(System::kLate)) {
    scores.emplace(System::kLate,
                   FuseLate(scores.at(System::kIvec), scores.at(System::kDcnn),
                            cfg.late_znorm));
    models[System::kLate] = models.at(System::kIvec);
  }

  std::vector<SystemResult> out;
  for (System sys : AllSystems()) {
    if (!want.count(sys)) continue;
    const SystemScores &s = scores.at(sys);
    SystemResult r;
    r.report.system = SystemName(sys);
    r.report.eer = s.Eer();
    r.report.accuracy = s.IdentificationAccuracy(models.at(sys));
    r.report.n_train_artists = static_cast<int>(train.size());
    r.matrix = s.matrix;
    cfg.Log(r.report.system + ": EER " + FormatFloat(r.report.eer) + ", accuracy " +
            FormatFloat(r.report.accuracy));
    out.push_back(std::move(r));
  }
  return out;
}

struct SweepResult {
  std::vector<EvalReport> reports;
  std::vector<ScoreMatrix> matrices;  // parallel to reports
};

/// For each training-artist count: subsample, train, evaluate. One report
/// per (count, system), ordered by the requested counts, then by system.
inline SweepResult RunSweep(const corpus::CorpusManifest &manifest,
                            std::span<const int> train_counts,
                            std::span<const System> systems, std::uint64_t seed,
                            const PipelineConfig &cfg = {}) {
  ARTREC_REQUIRE(!train_counts.empty() && !systems.empty(), ErrorCode::kConfig,
                 "sweep needs at least one count and one system");
  const Artists train = manifest.ArtistsWithRole(corpus::Role::kTrain);
  const Artists eval = manifest.ArtistsWithRole(corpus::Role::kEval);
  CheckDisjoint(train, eval);
  corpus::ValidateManifest(manifest);
  const corpus::CorpusData data(manifest);

  SweepResult result;
  for (int count : train_counts) {
    const std::uint64_t run_seed = DeriveSeed(seed, static_cast<std::uint64_t>(count));
    const Artists subset = SubsampleArtists(train, count, DeriveSeed(run_seed, 4));
    cfg.Log("sweep: " + std::to_string(count) + " training artists");
    for (auto &r : RunPipeline(data, subset, eval, systems, run_seed, cfg)) {
      r.report.seed = seed;
      result.reports.push_back(r.report);
      result.matrices.push_back(std::move(r.matrix));
    }
  }
  return result;
}

inline void WriteTextFile(const std::filesystem::path &path, const std::string &text) {
  std::ofstream os(path, std::ios::binary);
  os << text;
  ARTREC_REQUIRE(static_cast<bool>(os), ErrorCode::kIo, "cannot write ", path.string());
}

/// report.csv plus scores-<system>[-<count>].csv per report.
inline void WriteSweepOutputs(const SweepResult &r, const std::filesystem::path &dir,
                              bool count_in_name) {
  std::filesystem::create_directories(dir);
  std::ostringstream report;
  WriteReportCsv(r.reports, report);
  WriteTextFile(dir / "report.csv", report.str());
  for (std::size_t i = 0; i < r.reports.size(); ++i) {
    std::ostringstream os;
    WriteScoreMatrixCsv(r.matrices[i], os);
    std::string name = "scores-" + r.reports[i].system;
    if (count_in_name) name += "-" + std::to_string(r.reports[i].n_train_artists);
    WriteTextFile(dir / (name + ".csv"), os.str());
  }
}

}  // namespace evalkit
}  // namespace artrec
