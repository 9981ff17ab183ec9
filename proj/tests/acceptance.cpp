// artrec/tests/acceptance.cpp

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

// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "artrec/backend.hpp"
#include "artrec/corpus/container.hpp"
#include "artrec/corpus/dataset.hpp"
#include "artrec/corpus/manifest.hpp"
#include "artrec/corpus/synth.hpp"
#include "artrec/deepnet.hpp"
#include "artrec/evalkit.hpp"
#include "artrec/random.hpp"
#include "artrec/sweep.hpp"
#include "artrec/tvspace.hpp"
#include "artrec/ubm.hpp"
#include "oracles.hpp"

namespace artrec {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void Require(bool cond, const std::string &what) {
    if (!cond) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(double v) { return evalkit::FormatFloat(v); }

template <typename Fn>
bool Raises(Fn &&fn, ErrorCode code) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code() == code;
  }
  return false;
}

bool NonDecreasing(const std::vector<double> &h) {
  for (std::size_t i = 1; i < h.size(); ++i)
    if (h[i] - h[i - 1] < -1e-9 * std::abs(h[i - 1])) return false;
  return h.size() >= 2;
}

ubm::DiagGmm RandomGmm(Rng &rng, int c, int d) {
  Matrix v = GaussianMatrix(rng, c, d, 1.0).cwiseAbs().array() + 0.5;
  return ubm::DiagGmm(Vector::Constant(c, 1.0 / c), GaussianMatrix(rng, c, d, 2.0), v);
}

Matrix SampleGmm(Rng &rng, const ubm::DiagGmm &g, int n) {
  Matrix x(n, g.Dim());
  for (int i = 0; i < n; ++i) {
    const int c = static_cast<int>(Uniform(rng, 0.0, g.NumComponents() - 1e-9));
    for (int j = 0; j < g.Dim(); ++j)
      x(i, j) = g.means()(c, j) + std::sqrt(g.variances()(c, j)) * Gaussian(rng);
  }
  return x;
}

ubm::BaumWelchStats SampleStats(Rng &rng, const ubm::DiagGmm &g, const Matrix &t,
                                double frames_per_component) {
  const int c = g.NumComponents(), d = g.Dim();
  ubm::BaumWelchStats s = ubm::BaumWelchStats::Zero(c, d);
  const Vector shift = t * GaussianVector(rng, t.cols());
  for (int k = 0; k < c; ++k) {
    const double n = frames_per_component * Uniform(rng, 0.5, 1.5);
    s.n(k) = n;
    for (int j = 0; j < d; ++j)
      s.f(k, j) = n * shift(k * d + j) + std::sqrt(n * g.variances()(k, j)) * Gaussian(rng);
  }
  s.n_frames = s.n.sum();
  return s;
}

Outcome EmMonotonicity() {
  Outcome o;
  const auto start = Clock::now();
  int ubm_ok = 0, tv_ok = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(DeriveSeed(seed, 100));
    const ubm::DiagGmm truth = RandomGmm(rng, 6, 5);
    ubm::UbmTrainConfig ucfg;
    ucfg.n_components = 8;
    ucfg.n_iters = 15;
    ucfg.seed = seed;
    std::vector<double> uh;
    const ubm::DiagGmm g = ubm::TrainUbm(SampleGmm(rng, truth, 3000), ucfg, &uh);
    ubm_ok += NonDecreasing(uh);

    std::vector<ubm::BaumWelchStats> stats;
    const Matrix t = GaussianMatrix(rng, 8 * 5, 4, 1.0);
    for (int i = 0; i < 150; ++i) stats.push_back(SampleStats(rng, g, t, 20.0));
    tvspace::TvTrainConfig tcfg;
    tcfg.rank = 6;
    tcfg.n_iters = 10;
    tcfg.seed = seed;
    std::vector<double> th;
    tvspace::TrainTv(g, stats, tcfg, &th);
    tv_ok += NonDecreasing(th);
  }
  const double secs = Seconds(start);
  o.Require(ubm_ok == 20, "UBM monotone in " + std::to_string(ubm_ok) + "/20 runs");
  o.Require(tv_ok == 20, "T monotone in " + std::to_string(tv_ok) + "/20 runs");
  o.Require(secs < 60.0, "runtime " + Fmt(secs) + " s");
  if (o.pass)
    o.detail = "UBM 20/20, T 20/20 non-decreasing, " + Fmt(secs) + " s";
  return o;
}

Outcome IvectorClosedForm() {
  Outcome o;
  const ubm::DiagGmm unit(Vector::Ones(1), Matrix::Zero(1, 1), Matrix::Ones(1, 1));
  tvspace::TotalVariabilityModel scalar;
  scalar.t = Matrix::Ones(1, 1);
  scalar.num_components = 1;
  scalar.dim = 1;
  double scalar_err = 0.0;
  for (double x : {-4.0, -0.5, 0.0, 0.3, 1.0, 7.25}) {
    const dsp::FeatureSequence seq{Matrix::Constant(1, 1, x), "x"};
    const auto w = tvspace::ExtractIvector(scalar, unit, ubm::AccumulateStats(unit, seq));
    scalar_err = std::max(scalar_err, std::abs(w.values(0) - x / 2.0));
  }
  Rng rng(7);
  double dense_err = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int c = 1 + trial % 4, d = 1 + trial % 3, r = 1 + trial % std::min(5, c * d);
    const ubm::DiagGmm g = RandomGmm(rng, c, d);
    tvspace::TotalVariabilityModel tv;
    tv.t = GaussianMatrix(rng, c * d, r, 1.0);
    tv.num_components = c;
    tv.dim = d;
    const ubm::BaumWelchStats s = SampleStats(rng, g, tv.t, 15.0);
    const Vector w = tvspace::ExtractIvector(tv, g, s).values;
    dense_err = std::max(dense_err, (w - testing::DenseIvector(tv.t, g, s)).cwiseAbs().maxCoeff());
  }
  o.Require(scalar_err <= 1e-12, "w = x/2 error " + Fmt(scalar_err));
  o.Require(dense_err <= 1e-10, "dense oracle error " + Fmt(dense_err));
  if (o.pass)
    o.detail = "w = x/2 error " + Fmt(scalar_err) + ", dense oracle max error " + Fmt(dense_err) +
               " over 100 instances";
  return o;
}

Outcome ConvnetGradients() {
  Outcome o;
  const auto start = Clock::now();
  double worst = 0.0;
  int checked = 0, skipped = 0;
  Rng rng(3);
  const std::vector<std::array<int, 5>> nets{{2, 2, 2, 2, 2}, {3, 4, 4, 4, 5}};
  for (std::size_t k = 0; k < nets.size(); ++k) {
    deepnet::NetConfig cfg;
    cfg.channels = nets[k];
    const deepnet::ConvNet net = deepnet::BuildNetwork(6, cfg, 40 + k);
    // Small-amplitude input keeps the softmax unsaturated, so every gradient
    // entry is above the finite-difference resolution.
    const dsp::MelSpectrogram x{GaussianMatrix(rng, 128, 128, 0.1), "g"};
    const auto r = deepnet::GradientCheck(net, x, static_cast<int>(k) + 1, 1e-5, k, 400);
    worst = std::max(worst, r.max_relative_error);
    checked += r.n_checked;
    skipped += r.n_skipped;
  }
  const double secs = Seconds(start);
  o.Require(worst <= 1e-4, "max relative error " + Fmt(worst));
  o.Require(checked >= 400, "only " + std::to_string(checked) + " parameters checked");
  o.Require(secs < 120.0, "runtime " + Fmt(secs) + " s");
  if (o.pass)
    o.detail = "max relative error " + Fmt(worst) + " over " + std::to_string(checked) +
               " parameters in all 14 tensors (" + std::to_string(skipped) +
               " kink-adjacent skipped), " + Fmt(secs) + " s";
  return o;
}

Outcome PldaOracle() {
  Outcome o;
  Rng rng(11);
  const Matrix one = Matrix::Ones(1, 1);
  const backend::PldaModel m1(Vector::Zero(1), one, Vector::Zero(1), one, one);
  double oracle_err = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Vector e = GaussianVector(rng, 1, 2.0), t = GaussianVector(rng, 1, 2.0);
    oracle_err = std::max(oracle_err,
                          std::abs(m1.ScorePreprocessed(e, t) - testing::DenseLlr(one, one, e, t)));
  }
  std::vector<EmbeddingVector> vs;
  std::vector<std::string> labels;
  for (int c = 0; c < 12; ++c) {
    const Vector centre = GaussianVector(rng, 6, 2.0);
    for (int i = 0; i < 5; ++i) {
      vs.push_back(EmbeddingVector{centre + GaussianVector(rng, 6, 0.5), EmbeddingKind::kIvector, ""});
      labels.push_back(std::to_string(c));
    }
  }
  const backend::PldaModel trained = backend::TrainPlda(vs, labels);
  double sym_err = 0.0;
  for (int i = 0; i < 200; ++i) {
    const EmbeddingVector a{GaussianVector(rng, 6, 2.0), EmbeddingKind::kIvector, ""};
    const EmbeddingVector b{GaussianVector(rng, 6, 2.0), EmbeddingKind::kIvector, ""};
    sym_err = std::max(sym_err, std::abs(trained.Score(a, b) - trained.Score(b, a)));
  }
  const backend::PldaModel zero(Vector::Zero(3), Matrix::Identity(3, 3), Vector::Zero(3),
                                Matrix::Zero(3, 3), Matrix::Identity(3, 3));
  double zero_err = 0.0;
  for (int i = 0; i < 200; ++i)
    zero_err = std::max(zero_err, std::abs(zero.ScorePreprocessed(GaussianVector(rng, 3),
                                                                  GaussianVector(rng, 3))));
  o.Require(oracle_err <= 1e-10, "1-D oracle error " + Fmt(oracle_err));
  o.Require(sym_err <= 1e-10, "symmetry error " + Fmt(sym_err));
  o.Require(zero_err <= 1e-8, "B = 0 score " + Fmt(zero_err));
  if (o.pass)
    o.detail = "1-D oracle error " + Fmt(oracle_err) + ", symmetry " + Fmt(sym_err) +
               ", B = 0 max |score| " + Fmt(zero_err);
  return o;
}

Outcome EerOracle() {
  Outcome o;
  Rng rng(13);
  double oracle_err = 0.0, transform_err = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int total = 2 + static_cast<int>(Uniform(rng, 0.0, 998.0));
    const int n_tar = 1 + static_cast<int>(Uniform(rng, 0.0, total - 1.0));
    const bool ties = trial % 4 == 0;
    const double shift = Uniform(rng, -1.0, 3.0);
    std::vector<double> tar, non;
    for (int i = 0; i < total; ++i) {
      double s = Gaussian(rng) + (i < n_tar ? shift : 0.0);
      if (ties) s = std::round(4.0 * s) / 4.0;
      (i < n_tar ? tar : non).push_back(s);
    }
    const double eer = evalkit::ComputeEer(tar, non);
    oracle_err = std::max(oracle_err, std::abs(eer - testing::OracleEer(tar, non)));
    std::vector<double> at, an, ct, cn;
    for (double s : tar) {
      at.push_back(2.5 * s + 1.0);
      ct.push_back(s * s * s);
    }
    for (double s : non) {
      an.push_back(2.5 * s + 1.0);
      cn.push_back(s * s * s);
    }
    transform_err = std::max({transform_err, std::abs(evalkit::ComputeEer(at, an) - eer),
                              std::abs(evalkit::ComputeEer(ct, cn) - eer)});
  }
  o.Require(oracle_err <= 1e-9, "oracle error " + Fmt(oracle_err));
  o.Require(transform_err <= 1e-12, "transform error " + Fmt(transform_err));
  if (o.pass)
    o.detail = "200 sets, oracle error " + Fmt(oracle_err) + ", affine/cubic error " +
               Fmt(transform_err);
  return o;
}

// Reduced model sizes that keep the full feature-mode pipeline well inside the
// runtime budget on one core.
evalkit::PipelineConfig AcceptanceConfig() {
  evalkit::PipelineConfig cfg;
  cfg.ubm.n_components = 64;
  cfg.ubm.n_iters = 10;
  cfg.ubm_frames_per_track = 300;
  cfg.tv.rank = 32;
  cfg.tv.n_iters = 5;
  cfg.net.channels = {8, 16, 32, 32, 64};
  cfg.net.epochs = 8;
  cfg.train_segments_per_track = 1;
  return cfg;
}

struct EndToEnd {
  std::vector<evalkit::SystemResult> results;
  double seconds = 0.0;
  std::string error;
};

EndToEnd RunEndToEnd() {
  EndToEnd out;
  const auto start = Clock::now();
  try {
    corpus::SynthSpec spec;
    spec.n_train_artists = 100;
    spec.n_eval_artists = 20;
    spec.within_artist_spread = 0.1;
    spec.between_artist_spread = 1.0;
    const corpus::CorpusManifest m = corpus::GenerateCorpus(spec, 2026);
    const corpus::CorpusData data(m);
    out.results = evalkit::RunPipeline(data, m.ArtistsWithRole(corpus::Role::kTrain),
                                       m.ArtistsWithRole(corpus::Role::kEval),
                                       evalkit::AllSystems(), 2026, AcceptanceConfig());
  } catch (const std::exception &e) {
    out.error = e.what();
  }
  out.seconds = Seconds(start);
  return out;
}

Outcome Recognition(const EndToEnd &e2e) {
  Outcome o;
  if (!e2e.error.empty()) {
    o.Require(false, e2e.error);
    return o;
  }
  std::map<std::string, evalkit::EvalReport> r;
  for (const auto &s : e2e.results) r[s.report.system] = s.report;
  const double best = std::min(r["ivec"].eer, r["dcnn"].eer);
  o.Require(r["ivec"].eer <= 0.10, "ivec EER " + Fmt(r["ivec"].eer));
  o.Require(r["ivec"].accuracy >= 0.80, "ivec accuracy " + Fmt(r["ivec"].accuracy));
  o.Require(r["dcnn"].eer <= 0.15, "dcnn EER " + Fmt(r["dcnn"].eer));
  o.Require(r["late"].eer <= best + 0.01, "late EER " + Fmt(r["late"].eer));
  o.Require(e2e.seconds <= 600.0, "runtime " + Fmt(e2e.seconds) + " s");
  std::ostringstream d;
  for (const char *s : {"ivec", "dcnn", "early", "late"})
    d << s << " EER " << Fmt(r[s].eer) << " acc " << Fmt(r[s].accuracy) << ", ";
  d << Fmt(e2e.seconds) << " s";
  if (o.pass) o.detail = d.str();
  else o.detail += " (" + d.str() + ")";
  return o;
}

Outcome ScoreMatrixStructure(const EndToEnd &e2e) {
  Outcome o;
  if (!e2e.error.empty()) {
    o.Require(false, e2e.error);
    return o;
  }
  std::ostringstream d;
  for (const auto &s : e2e.results) {
    const double diag = s.matrix.MeanDiagonal(), off = s.matrix.MeanOffDiagonal();
    o.Require(s.matrix.values.allFinite() && diag > off, s.report.system + " diagonal " +
                                                             Fmt(diag) + " <= off " + Fmt(off));
    d << s.report.system << " " << Fmt(diag) << " > " << Fmt(off) << ", ";
  }
  o.Require(e2e.results.size() == 4, "expected 4 systems");
  if (o.pass) o.detail = "mean diagonal vs off-diagonal: " + d.str().substr(0, d.str().size() - 2);
  return o;
}

Outcome ProtocolInvariants() {
  Outcome o;
  corpus::SynthSpec spec;
  spec.n_train_artists = 4;
  spec.n_eval_artists = 3;
  spec.track_seconds = 3.0;
  const corpus::CorpusManifest m = corpus::GenerateCorpus(spec, 5);
  bool counts = true;
  for (const auto &a : m.artists) {
    int enroll = 0, test = 0, train = 0;
    for (const auto &t : a.tracks) {
      enroll += t.split == corpus::Split::kEnroll;
      test += t.split == corpus::Split::kTest;
      train += t.split == corpus::Split::kTrain;
    }
    counts = counts && a.tracks.size() == 20 &&
             (a.role == corpus::Role::kTrain ? train == 20 : enroll == 15 && test == 5);
  }
  o.Require(counts, "20 tracks / 15 enroll / 5 test not satisfied");

  corpus::CorpusManifest short_artist = m;
  short_artist.artists.back().tracks.pop_back();
  o.Require(Raises([&] { corpus::SplitCorpus(short_artist); }, ErrorCode::kProtocol),
            "19 tracks not rejected");
  o.Require(Raises([&] { corpus::ValidateManifest(short_artist); }, ErrorCode::kProtocol),
            "manifest with 19 tracks not rejected");

  corpus::CorpusManifest relabeled = m;
  relabeled.artists.back().tracks[0].split = relabeled.artists.back().tracks[0].split ==
                                                     corpus::Split::kEnroll
                                                 ? corpus::Split::kTest
                                                 : corpus::Split::kEnroll;
  o.Require(Raises([&] { corpus::ValidateManifest(relabeled); }, ErrorCode::kProtocol),
            "16/4 split not rejected");

  corpus::CorpusManifest overlap = m;
  overlap.artists.back().artist_id = overlap.artists.front().artist_id;
  o.Require(Raises([&] { corpus::ValidateManifest(overlap); }, ErrorCode::kProtocolViolation),
            "train/eval overlap not rejected by manifest validation");
  const evalkit::Artists train = m.ArtistsWithRole(corpus::Role::kTrain);
  evalkit::Artists eval = m.ArtistsWithRole(corpus::Role::kEval);
  eval.push_back(train.front());
  o.Require(Raises([&] { evalkit::CheckDisjoint(train, eval); }, ErrorCode::kProtocolViolation),
            "train/eval overlap not rejected by the pipeline");
  const std::vector<evalkit::System> systems{evalkit::System::kIvec};
  o.Require(Raises([&] { evalkit::RunSweep(overlap, std::vector<int>{4}, systems, 0); },
                   ErrorCode::kProtocolViolation),
            "train/eval overlap not rejected by the sweep");

  corpus::CorpusManifest shared_track = m;
  shared_track.artists.back().tracks[0].track_id = shared_track.artists.back().tracks[1].track_id;
  o.Require(Raises([&] { corpus::ValidateManifest(shared_track); }, ErrorCode::kProtocol),
            "enroll/test track overlap not rejected");
  if (o.pass)
    o.detail = "20/15/5 holds; 19 tracks, 16/4 split, shared track -> protocol error; "
               "artist overlap -> protocol-violation error (manifest, pipeline, sweep)";
  return o;
}

Outcome Determinism() {
  Outcome o;
  corpus::SynthSpec spec;
  spec.n_train_artists = 20;
  spec.n_eval_artists = 5;
  const corpus::CorpusManifest m = corpus::GenerateCorpus(spec, 77);
  evalkit::PipelineConfig cfg;
  cfg.ubm.n_components = 16;
  cfg.ubm.n_iters = 4;
  cfg.ubm_frames_per_track = 200;
  cfg.tv.rank = 16;
  cfg.tv.n_iters = 3;
  cfg.net.channels = {4, 8, 8, 16, 16};
  cfg.net.epochs = 2;
  cfg.train_segments_per_track = 1;
  const fs::path root = fs::temp_directory_path() / "artrec_acceptance_determinism";
  fs::remove_all(root);
  const std::vector<int> counts{20};
  for (const char *run : {"a", "b"})
    evalkit::WriteSweepOutputs(evalkit::RunSweep(m, counts, evalkit::AllSystems(), 99, cfg),
                               root / run, false);
  int identical = 0, files = 0;
  for (const auto &entry : fs::directory_iterator(root / "a")) {
    ++files;
    const std::string name = entry.path().filename().string();
    identical += corpus::internal::ReadFile(entry.path().string()) ==
                 corpus::internal::ReadFile((root / "b" / name).string());
  }
  const std::string report = corpus::internal::ReadFile((root / "a" / "report.csv").string());
  fs::remove_all(root);
  o.Require(files == 5 && identical == files,
            std::to_string(identical) + "/" + std::to_string(files) + " files identical");
  if (o.pass)
    o.detail = "report.csv and 4 score matrices byte-identical across two runs (" +
               std::to_string(report.size()) + "-byte report)";
  return o;
}

template <typename T>
void CheckKind(Outcome &o, const std::string &name, const T &model) {
  const std::string bytes = corpus::Serialize(model);
  bool ok = corpus::Serialize(corpus::Deserialize<T>(bytes)) == bytes;
  o.Require(ok, name + " round trip not bit-exact");
  for (std::size_t keep : {std::size_t{0}, std::size_t{15}, std::size_t{16}, bytes.size() / 3,
                           bytes.size() - 8, bytes.size() - 1})
    o.Require(Raises([&] { corpus::Deserialize<T>(bytes.substr(0, keep)); },
                     ErrorCode::kCorruption),
              name + " truncated to " + std::to_string(keep) + " bytes accepted");
  std::string extended = bytes + "x";
  o.Require(Raises([&] { corpus::Deserialize<T>(extended); }, ErrorCode::kCorruption),
            name + " with trailing bytes accepted");
  std::string magic = bytes;
  magic[1] = 'Z';
  o.Require(Raises([&] { corpus::Deserialize<T>(magic); }, ErrorCode::kCorruption),
            name + " bad magic accepted");
  std::string version = bytes;
  version[4] = static_cast<char>(version[4] + 1);
  o.Require(Raises([&] { corpus::Deserialize<T>(version); }, ErrorCode::kUnsupportedVersion),
            name + " version bump not rejected");
}

Outcome Persistence() {
  Outcome o;
  Rng rng(21);
  ubm::UbmTrainConfig ucfg;
  ucfg.n_components = 4;
  const ubm::DiagGmm gmm = ubm::TrainUbm(SampleGmm(rng, RandomGmm(rng, 4, 3), 500), ucfg);
  std::vector<ubm::BaumWelchStats> stats;
  const Matrix t = GaussianMatrix(rng, 12, 3, 1.0);
  for (int i = 0; i < 40; ++i) stats.push_back(SampleStats(rng, gmm, t, 10.0));
  tvspace::TvTrainConfig tcfg;
  tcfg.rank = 3;
  tcfg.n_iters = 2;
  const tvspace::TotalVariabilityModel tv = tvspace::TrainTv(gmm, stats, tcfg);
  deepnet::NetConfig ncfg;
  ncfg.channels = {2, 3, 4, 5, 6};
  deepnet::ConvNet net = deepnet::BuildNetwork(4, ncfg, 3);
  net.input_mean = 0.1;
  net.input_scale = 2.0 / 3.0;
  std::vector<EmbeddingVector> ivecs;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    ivecs.push_back(tvspace::ExtractIvector(tv, gmm, stats[i], "t" + std::to_string(i)));
    labels.push_back("a" + std::to_string(i % 8));
  }
  const backend::PldaModel plda = backend::TrainPlda(ivecs, labels);
  corpus::ArtistModelSet models;
  for (int k = 0; k < 8; ++k) {
    std::vector<EmbeddingVector> members;
    for (std::size_t i = k; i < ivecs.size(); i += 8) members.push_back(ivecs[i]);
    models.push_back(backend::EnrollArtist("a" + std::to_string(k), members));
  }
  CheckKind(o, "DiagGmm", gmm);
  CheckKind(o, "TotalVariability", tv);
  CheckKind(o, "ConvNet", net);
  CheckKind(o, "Plda", plda);
  CheckKind(o, "ArtistModels", models);

  const auto back = corpus::Deserialize<backend::PldaModel>(corpus::Serialize(plda));
  o.Require(back.Score(ivecs[0], ivecs[1]) == plda.Score(ivecs[0], ivecs[1]),
            "reloaded PLDA scores differ");
  if (o.pass)
    o.detail = "5 kinds bit-exact; truncation/trailing bytes/bad magic -> corruption; "
               "version bump -> unsupported-version";
  return o;
}

}  // namespace
}  // namespace artrec

int main() {
  using artrec::Outcome;
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"em-monotonicity", artrec::EmMonotonicity},
      {"ivector-closed-form", artrec::IvectorClosedForm},
      {"convnet-gradients", artrec::ConvnetGradients},
      {"plda-oracle", artrec::PldaOracle},
      {"eer-oracle", artrec::EerOracle},
  };
  std::optional<artrec::EndToEnd> e2e;
  const auto shared = [&e2e]() -> const artrec::EndToEnd & {
    if (!e2e) e2e = artrec::RunEndToEnd();
    return *e2e;
  };
  criteria.emplace_back("e2e-recognition", [&] { return artrec::Recognition(shared()); });
  criteria.emplace_back("score-matrix-structure",
                        [&] { return artrec::ScoreMatrixStructure(shared()); });
  criteria.emplace_back("protocol-invariants", artrec::ProtocolInvariants);
  criteria.emplace_back("determinism", artrec::Determinism);
  criteria.emplace_back("persistence", artrec::Persistence);

  int failed = 0;
  for (const auto &[name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception &e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("%s %-24s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
