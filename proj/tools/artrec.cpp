// artrec/tools/artrec.cpp

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

// Command-line front end: one verb per pipeline stage plus the sweep.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

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

namespace artrec {
namespace cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunConfig {
  corpus::SynthSpec synth;
  evalkit::PipelineConfig pipeline;
  std::vector<int> counts;  // empty: every training artist
  std::vector<evalkit::System> systems = evalkit::AllSystems();
  std::uint64_t seed = 0;
};

struct Globals {
  std::uint64_t seed = 0;
  std::string config_path;
  std::string out = ".";
  bool quiet = false;
  std::string manifest;
  std::string kind = "ivec";
  std::string system = "ivec";
  std::string ubm_path, tv_path, net_path;
  double epsilon = 1e-5;
  int grad_classes = 4;
  int grad_params = 200;
};

// Flags bound to temporaries and applied on top of the config file, so the
// precedence is flag > config file > default.
class Overrides {
 public:
  template <typename T>
  CLI::Option *Add(CLI::App *app, const std::string &name, const std::string &desc,
                   std::function<void(RunConfig &, const T &)> apply) {
    auto value = std::make_shared<T>();
    CLI::Option *opt = app->add_option(name, *value, desc);
    fns_.push_back([opt, value, apply](RunConfig &cfg) {
      if (opt->count() > 0) apply(cfg, *value);
    });
    return opt;
  }

  CLI::Option *AddFlag(CLI::App *app, const std::string &name, const std::string &desc,
                       std::function<void(RunConfig &)> apply) {
    CLI::Option *opt = app->add_flag(name, desc);
    fns_.push_back([opt, apply](RunConfig &cfg) {
      if (opt->count() > 0) apply(cfg);
    });
    return opt;
  }

  void Apply(RunConfig &cfg) const {
    for (const auto &fn : fns_) fn(cfg);
  }

 private:
  std::vector<std::function<void(RunConfig &)>> fns_;
};

[[noreturn]] void UsageError(const std::string &msg) {
  artrec::internal::Fail(ErrorCode::kUsage, msg);
}

std::vector<evalkit::System> ParseSystems(const std::vector<std::string> &names) {
  std::vector<evalkit::System> out;
  for (const auto &n : names) {
    try {
      out.push_back(evalkit::ParseSystem(n));
    } catch (const Error &) {
      UsageError("unknown system '" + n + "' (expected ivec, dcnn, early or late)");
    }
  }
  return out;
}

template <typename T>
T Get(const json &j, const std::string &where) {
  try {
    return j.get<T>();
  } catch (const json::exception &) {
    artrec::internal::Fail(ErrorCode::kConfig, "config value '", where, "' has the wrong type");
  }
}

void ApplyConfigFile(const std::string &path, RunConfig &cfg) {
  const std::string text = corpus::internal::ReadFile(path);
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception &e) {
    artrec::internal::Fail(ErrorCode::kConfig, "config '", path, "' is not valid JSON: ", e.what());
  }
  ARTREC_REQUIRE(root.is_object(), ErrorCode::kConfig, "config '", path, "' is not an object");
  using Setter = std::function<void(const json &, const std::string &)>;
  auto &s = cfg.synth;
  auto &p = cfg.pipeline;
  const std::map<std::string, std::map<std::string, Setter>> schema{
      {"synth",
       {{"train_artists", [&](const json &v, const std::string &w) { s.n_train_artists = Get<int>(v, w); }},
        {"eval_artists", [&](const json &v, const std::string &w) { s.n_eval_artists = Get<int>(v, w); }},
        {"tracks_per_artist", [&](const json &v, const std::string &w) { s.tracks_per_artist = Get<int>(v, w); }},
        {"track_seconds", [&](const json &v, const std::string &w) { s.track_seconds = Get<double>(v, w); }},
        {"within_artist_spread", [&](const json &v, const std::string &w) { s.within_artist_spread = Get<double>(v, w); }},
        {"between_artist_spread", [&](const json &v, const std::string &w) { s.between_artist_spread = Get<double>(v, w); }},
        {"vocal_fraction", [&](const json &v, const std::string &w) { s.vocal_fraction = Get<double>(v, w); }},
        {"mode", [&](const json &v, const std::string &w) { s.mode = corpus::ParseMode(Get<std::string>(v, w)); }}}},
      {"ubm",
       {{"components", [&](const json &v, const std::string &w) { p.ubm.n_components = Get<int>(v, w); }},
        {"iters", [&](const json &v, const std::string &w) { p.ubm.n_iters = Get<int>(v, w); }},
        {"var_floor", [&](const json &v, const std::string &w) { p.ubm.var_floor = Get<double>(v, w); }},
        {"kmeans_rounds", [&](const json &v, const std::string &w) { p.ubm.kmeans_rounds = Get<int>(v, w); }},
        {"frames_per_track", [&](const json &v, const std::string &w) { p.ubm_frames_per_track = Get<int>(v, w); }}}},
      {"tv",
       {{"rank", [&](const json &v, const std::string &w) { p.tv.rank = Get<int>(v, w); }},
        {"iters", [&](const json &v, const std::string &w) { p.tv.n_iters = Get<int>(v, w); }}}},
      {"net",
       {{"channels", [&](const json &v, const std::string &w) {
          const auto c = Get<std::vector<int>>(v, w);
          ARTREC_REQUIRE(c.size() == p.net.channels.size(), ErrorCode::kConfig,
                         "config value '", w, "' needs 5 entries");
          std::copy(c.begin(), c.end(), p.net.channels.begin());
        }},
        {"learning_rate", [&](const json &v, const std::string &w) { p.net.learning_rate = Get<double>(v, w); }},
        {"momentum", [&](const json &v, const std::string &w) { p.net.momentum = Get<double>(v, w); }},
        {"batch_size", [&](const json &v, const std::string &w) { p.net.batch_size = Get<int>(v, w); }},
        {"epochs", [&](const json &v, const std::string &w) { p.net.epochs = Get<int>(v, w); }},
        {"segments_per_track", [&](const json &v, const std::string &w) { p.train_segments_per_track = Get<int>(v, w); }}}},
      {"sweep",
       {{"counts", [&](const json &v, const std::string &w) { cfg.counts = Get<std::vector<int>>(v, w); }},
        {"systems", [&](const json &v, const std::string &w) {
          cfg.systems = ParseSystems(Get<std::vector<std::string>>(v, w));
        }}}},
      {"fusion",
       {{"late_znorm", [&](const json &v, const std::string &w) { p.late_znorm = Get<bool>(v, w); }}}},
  };
  for (const auto &[section, body] : root.items()) {
    if (section == "seed") {
      cfg.seed = Get<std::uint64_t>(body, section);
      continue;
    }
    const auto sec = schema.find(section);
    if (sec == schema.end()) UsageError("unknown config section '" + section + "' in " + path);
    ARTREC_REQUIRE(body.is_object(), ErrorCode::kConfig, "config section '", section,
                   "' is not an object");
    for (const auto &[key, value] : body.items()) {
      const auto it = sec->second.find(key);
      if (it == sec->second.end())
        UsageError("unknown config key '" + section + "." + key + "' in " + path);
      it->second(value, section + "." + key);
    }
  }
}

void AddSynthFlags(CLI::App *app, Overrides &o) {
  o.Add<int>(app, "--train-artists", "number of training artists",
             [](RunConfig &c, const int &v) { c.synth.n_train_artists = v; });
  o.Add<int>(app, "--eval-artists", "number of evaluation artists",
             [](RunConfig &c, const int &v) { c.synth.n_eval_artists = v; });
  o.Add<int>(app, "--tracks", "tracks per artist (default 20)",
             [](RunConfig &c, const int &v) { c.synth.tracks_per_artist = v; });
  o.Add<double>(app, "--seconds", "track length in seconds (default 12)",
                [](RunConfig &c, const double &v) { c.synth.track_seconds = v; });
  o.Add<double>(app, "--within", "within-artist spread",
                [](RunConfig &c, const double &v) { c.synth.within_artist_spread = v; });
  o.Add<double>(app, "--between", "between-artist spread",
                [](RunConfig &c, const double &v) { c.synth.between_artist_spread = v; });
  o.Add<double>(app, "--vocal-fraction", "fraction of vocal artists",
                [](RunConfig &c, const double &v) { c.synth.vocal_fraction = v; });
  o.Add<std::string>(app, "--mode", "feature or audio",
                     [](RunConfig &c, const std::string &v) { c.synth.mode = corpus::ParseMode(v); })
      ->check(CLI::IsMember({"feature", "audio"}));
}

void AddUbmFlags(CLI::App *app, Overrides &o) {
  o.Add<int>(app, "--components", "UBM mixture components (default 256)",
             [](RunConfig &c, const int &v) { c.pipeline.ubm.n_components = v; });
  o.Add<int>(app, "--ubm-iters", "UBM EM iterations",
             [](RunConfig &c, const int &v) { c.pipeline.ubm.n_iters = v; });
  o.Add<double>(app, "--var-floor", "variance floor relative to the data variance",
                [](RunConfig &c, const double &v) { c.pipeline.ubm.var_floor = v; });
  o.Add<int>(app, "--frames-per-track", "frames per track used for UBM training (<0: all)",
             [](RunConfig &c, const int &v) { c.pipeline.ubm_frames_per_track = v; });
}

void AddTvFlags(CLI::App *app, Overrides &o) {
  o.Add<int>(app, "--rank", "i-vector dimension r",
             [](RunConfig &c, const int &v) { c.pipeline.tv.rank = v; });
  o.Add<int>(app, "--tv-iters", "T-matrix EM iterations",
             [](RunConfig &c, const int &v) { c.pipeline.tv.n_iters = v; });
}

void AddNetFlags(CLI::App *app, Overrides &o) {
  o.Add<std::vector<int>>(app, "--channels", "five conv channel counts, comma separated",
                          [](RunConfig &c, const std::vector<int> &v) {
                            if (v.size() != c.pipeline.net.channels.size())
                              UsageError("--channels needs 5 values");
                            std::copy(v.begin(), v.end(), c.pipeline.net.channels.begin());
                          })
      ->delimiter(',');
  o.Add<double>(app, "--lr", "learning rate",
                [](RunConfig &c, const double &v) { c.pipeline.net.learning_rate = v; });
  o.Add<double>(app, "--momentum", "SGD momentum",
                [](RunConfig &c, const double &v) { c.pipeline.net.momentum = v; });
  o.Add<int>(app, "--batch-size", "mini-batch size",
             [](RunConfig &c, const int &v) { c.pipeline.net.batch_size = v; });
  o.Add<int>(app, "--epochs", "training epochs",
             [](RunConfig &c, const int &v) { c.pipeline.net.epochs = v; });
  o.Add<int>(app, "--segments-per-track", "training segments per track (<0: all)",
             [](RunConfig &c, const int &v) { c.pipeline.train_segments_per_track = v; });
}

void AddFusionFlags(CLI::App *app, Overrides &o) {
  o.AddFlag(app, "--late-znorm", "z-normalize each system before late fusion",
            [](RunConfig &c) { c.pipeline.late_znorm = true; });
}

void AddManifest(CLI::App *app, Globals &g) {
  app->add_option("--manifest", g.manifest, "corpus manifest (JSON)")->required();
}

// Session state shared by the verbs.
class Session {
 public:
  Session(const Globals &g, RunConfig cfg) : g_(g), cfg_(std::move(cfg)) {
    fs::create_directories(g_.out);
    if (!g_.quiet)
      cfg_.pipeline.log = [](const std::string &m) { std::cerr << "[artrec] " << m << "\n"; };
  }

  const RunConfig &cfg() const { return cfg_; }
  void Log(const std::string &m) const { cfg_.pipeline.Log(m); }
  std::string Out(const std::string &name) const { return (fs::path(g_.out) / name).string(); }
  std::string Or(const std::string &path, const std::string &name) const {
    return path.empty() ? Out(name) : path;
  }

  const corpus::CorpusManifest &manifest() {
    if (!manifest_) manifest_ = corpus::LoadManifest(g_.manifest);
    return *manifest_;
  }
  const corpus::CorpusData &data() {
    if (!data_) data_ = std::make_unique<corpus::CorpusData>(manifest());
    return *data_;
  }
  evalkit::Artists Train() { return manifest().ArtistsWithRole(corpus::Role::kTrain); }
  evalkit::Artists Eval() { return manifest().ArtistsWithRole(corpus::Role::kEval); }
  evalkit::Artists All() {
    evalkit::Artists a = Train();
    const evalkit::Artists e = Eval();
    a.insert(a.end(), e.begin(), e.end());
    return a;
  }

  evalkit::PipelineConfig StageConfig() const {
    evalkit::PipelineConfig c = cfg_.pipeline;
    c.ubm.seed = DeriveSeed(cfg_.seed, 1);
    c.tv.seed = DeriveSeed(cfg_.seed, 2);
    c.net.seed = DeriveSeed(cfg_.seed, 3);
    return c;
  }

  void Wrote(const std::string &path) const { Log("wrote " + path); }

 private:
  const Globals &g_;
  RunConfig cfg_;
  std::optional<corpus::CorpusManifest> manifest_;
  std::unique_ptr<corpus::CorpusData> data_;
};

std::string KindFile(const std::string &prefix, const std::string &kind) {
  return prefix + "-" + kind + ".ivxm";
}

void CheckKind(const std::string &kind) {
  if (kind != "ivec" && kind != "deep" && kind != "early")
    UsageError("unknown embedding kind '" + kind + "' (expected ivec, deep or early)");
}

std::string KindOf(evalkit::System s) {
  switch (s) {
    case evalkit::System::kIvec: return "ivec";
    case evalkit::System::kDcnn: return "deep";
    case evalkit::System::kEarly: return "early";
    case evalkit::System::kLate: break;
  }
  return "";
}

int RunSynth(Session &s, const Globals &g) {
  const std::string path = s.Out("manifest.json");
  corpus::CorpusManifest m = corpus::GenerateCorpus(s.cfg().synth, s.cfg().seed, g.out);
  corpus::SaveManifest(path, m);
  s.Log("generated " + std::to_string(m.artists.size()) + " artists (" +
        corpus::ToString(m.mode) + " mode)");
  s.Wrote(path);
  return 0;
}

int RunTrainUbm(Session &s) {
  std::vector<double> history;
  const ubm::DiagGmm gmm = evalkit::TrainUbmStage(s.data(), s.Train(), s.StageConfig(), &history);
  for (std::size_t i = 0; i < history.size(); ++i)
    s.Log("UBM iteration " + std::to_string(i) + ": mean log-likelihood " +
          evalkit::FormatFloat(history[i]));
  corpus::SaveModel(s.Out("ubm.ivxm"), gmm);
  s.Wrote(s.Out("ubm.ivxm"));
  return 0;
}

int RunTrainTv(Session &s, const Globals &g) {
  const auto gmm = corpus::LoadModel<ubm::DiagGmm>(s.Or(g.ubm_path, "ubm.ivxm"));
  const evalkit::StatsTable stats = evalkit::ComputeStats(s.data(), gmm, s.Train());
  std::vector<double> history;
  const auto tv = evalkit::TrainTvStage(gmm, stats, s.Train(), s.StageConfig(), &history);
  for (std::size_t i = 0; i < history.size(); ++i)
    s.Log("T iteration " + std::to_string(i) + ": objective " + evalkit::FormatFloat(history[i]));
  corpus::SaveModel(s.Out("tv.ivxm"), tv);
  s.Wrote(s.Out("tv.ivxm"));
  return 0;
}

int RunTrainDcnn(Session &s) {
  deepnet::TrainHistory h;
  const deepnet::ConvNet net = evalkit::TrainDcnnStage(s.data(), s.Train(), s.StageConfig(), &h);
  for (std::size_t i = 0; i < h.loss.size(); ++i)
    s.Log("epoch " + std::to_string(i + 1) + ": loss " + evalkit::FormatFloat(h.loss[i]) +
          ", accuracy " + evalkit::FormatFloat(h.accuracy[i]));
  corpus::SaveModel(s.Out("dcnn.ivxm"), net);
  s.Wrote(s.Out("dcnn.ivxm"));
  return 0;
}

evalkit::EmbeddingTable ExtractKind(Session &s, const Globals &g, const std::string &kind) {
  const evalkit::Artists all = s.All();
  const auto ivec = [&] {
    const auto gmm = corpus::LoadModel<ubm::DiagGmm>(s.Or(g.ubm_path, "ubm.ivxm"));
    const auto tv = corpus::LoadModel<tvspace::TotalVariabilityModel>(s.Or(g.tv_path, "tv.ivxm"));
    return evalkit::ExtractIvectors(tv, gmm, evalkit::ComputeStats(s.data(), gmm, all));
  };
  const auto deep = [&] {
    const auto net = corpus::LoadModel<deepnet::ConvNet>(s.Or(g.net_path, "dcnn.ivxm"));
    return evalkit::ExtractDeep(net, s.data(), all);
  };
  if (kind == "ivec") return ivec();
  if (kind == "deep") return deep();
  return evalkit::FuseEarly(ivec(), deep());
}

int RunExtract(Session &s, const Globals &g) {
  CheckKind(g.kind);
  const evalkit::EmbeddingTable table = ExtractKind(s, g, g.kind);
  corpus::EmbeddingSet set;
  for (const auto *a : s.All())
    for (const auto &t : a->tracks) {
      set.vectors.push_back(table.at(t.track_id));
      set.labels.push_back(a->artist_id);
    }
  const std::string path = s.Out(KindFile("embeddings", g.kind));
  corpus::SaveModel(path, set);
  s.Wrote(path);
  return 0;
}

evalkit::EmbeddingTable LoadTable(Session &s, const std::string &kind) {
  const auto set = corpus::LoadModel<corpus::EmbeddingSet>(s.Out(KindFile("embeddings", kind)));
  evalkit::EmbeddingTable table;
  for (const auto &v : set.vectors) table.emplace(v.track_id, v);
  return table;
}

int RunTrainPlda(Session &s, const Globals &g) {
  CheckKind(g.kind);
  const auto plda = evalkit::TrainPldaStage(LoadTable(s, g.kind), s.Train());
  const std::string path = s.Out(KindFile("plda", g.kind));
  corpus::SaveModel(path, plda);
  s.Log("PLDA: dim " + std::to_string(plda.Dim()) + ", whitened dim " +
        std::to_string(plda.ReducedDim()));
  s.Wrote(path);
  return 0;
}

int RunEnroll(Session &s, const Globals &g) {
  CheckKind(g.kind);
  const corpus::ArtistModelSet models = evalkit::EnrollStage(LoadTable(s, g.kind), s.Eval());
  const std::string path = s.Out(KindFile("models", g.kind));
  corpus::SaveModel(path, models);
  s.Log("enrolled " + std::to_string(models.size()) + " artists");
  s.Wrote(path);
  return 0;
}

struct Scored {
  evalkit::SystemScores scores;
  corpus::ArtistModelSet models;
};

Scored ScoreFromArtifacts(Session &s, evalkit::System system) {
  if (system == evalkit::System::kLate) {
    const Scored iv = ScoreFromArtifacts(s, evalkit::System::kIvec);
    const Scored deep = ScoreFromArtifacts(s, evalkit::System::kDcnn);
    return Scored{evalkit::FuseLate(iv.scores, deep.scores, s.cfg().pipeline.late_znorm),
                  iv.models};
  }
  const std::string kind = KindOf(system);
  Scored out;
  out.models = corpus::LoadModel<corpus::ArtistModelSet>(s.Out(KindFile("models", kind)));
  const auto plda = corpus::LoadModel<backend::PldaModel>(s.Out(KindFile("plda", kind)));
  out.scores = evalkit::ScoreSystem(out.models, LoadTable(s, kind), s.Eval(), plda);
  return out;
}

void WriteMatrix(Session &s, const std::string &system, const evalkit::ScoreMatrix &m) {
  std::ostringstream os;
  evalkit::WriteScoreMatrixCsv(m, os);
  const std::string path = s.Out("scores-" + system + ".csv");
  evalkit::WriteTextFile(path, os.str());
  s.Wrote(path);
}

int RunScore(Session &s, const Globals &g) {
  const evalkit::System system = ParseSystems({g.system}).front();
  const Scored r = ScoreFromArtifacts(s, system);
  WriteMatrix(s, g.system, r.scores.matrix);
  s.Log(g.system + ": mean diagonal " + evalkit::FormatFloat(r.scores.matrix.MeanDiagonal()) +
        ", mean off-diagonal " + evalkit::FormatFloat(r.scores.matrix.MeanOffDiagonal()));
  return 0;
}

int RunEval(Session &s) {
  std::vector<evalkit::EvalReport> reports;
  for (evalkit::System system : s.cfg().systems) {
    const Scored r = ScoreFromArtifacts(s, system);
    evalkit::EvalReport rep;
    rep.system = evalkit::SystemName(system);
    rep.eer = r.scores.Eer();
    rep.accuracy = r.scores.IdentificationAccuracy(r.models);
    rep.n_train_artists = static_cast<int>(s.Train().size());
    rep.seed = s.cfg().seed;
    s.Log(rep.system + ": EER " + evalkit::FormatFloat(rep.eer) + ", accuracy " +
          evalkit::FormatFloat(rep.accuracy));
    WriteMatrix(s, rep.system, r.scores.matrix);
    reports.push_back(rep);
  }
  std::ostringstream os;
  evalkit::WriteReportCsv(reports, os);
  evalkit::WriteTextFile(s.Out("report.csv"), os.str());
  s.Wrote(s.Out("report.csv"));
  return 0;
}

int RunSweepVerb(Session &s, const Globals &g) {
  std::vector<int> counts = s.cfg().counts;
  if (counts.empty()) counts.push_back(static_cast<int>(s.Train().size()));
  const evalkit::SweepResult r =
      evalkit::RunSweep(s.manifest(), counts, s.cfg().systems, s.cfg().seed, s.cfg().pipeline);
  evalkit::WriteSweepOutputs(r, g.out, counts.size() > 1);
  s.Wrote(s.Out("report.csv"));
  return 0;
}

int RunGradCheck(Session &s, const Globals &g) {
  const deepnet::ConvNet net =
      deepnet::BuildNetwork(g.grad_classes, s.cfg().pipeline.net, DeriveSeed(s.cfg().seed, 5));
  Rng rng(DeriveSeed(s.cfg().seed, 6));
  // Small-amplitude input keeps the softmax of a fresh net unsaturated.
  const dsp::MelSpectrogram x{GaussianMatrix(rng, net.config.input_rows, net.config.input_cols, 0.1),
                              "grad-check"};
  const auto r = deepnet::GradientCheck(net, x, 0, g.epsilon, s.cfg().seed, g.grad_params);
  for (const auto &[name, err] : r.per_tensor)
    s.Log(name + ": max relative error " + evalkit::FormatFloat(err));
  const bool ok = r.max_relative_error <= 1e-4;
  std::printf("max relative error %s (%d checked, %d skipped) %s\n",
              evalkit::FormatFloat(r.max_relative_error).c_str(), r.n_checked, r.n_skipped,
              ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}

int Main(int argc, char **argv) {
  CLI::App app{"artrec: artist recognition with i-vectors, a convnet and PLDA"};
  app.require_subcommand(1);
  Globals g;
  Overrides o;
  auto *seed_opt = app.add_option("--seed", g.seed, "master seed (fallback: IVX_SEED)");
  app.add_option("--config", g.config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "output directory (default .)");
  app.add_flag("--quiet", g.quiet, "suppress progress lines");

  const auto verb = [&app](const std::string &name, const std::string &desc) {
    CLI::App *sub = app.add_subcommand(name, desc);
    sub->fallthrough();
    return sub;
  };
  CLI::App *synth = verb("synth", "generate a synthetic corpus and manifest.json");
  AddSynthFlags(synth, o);
  CLI::App *train_ubm = verb("train-ubm", "train the UBM on training artists -> ubm.ivxm");
  AddManifest(train_ubm, g);
  AddUbmFlags(train_ubm, o);
  CLI::App *train_tv = verb("train-tv", "train the total variability matrix -> tv.ivxm");
  AddManifest(train_tv, g);
  AddTvFlags(train_tv, o);
  train_tv->add_option("--ubm", g.ubm_path, "UBM (default <out>/ubm.ivxm)");
  CLI::App *train_dcnn = verb("train-dcnn", "train the convnet -> dcnn.ivxm");
  AddManifest(train_dcnn, g);
  AddNetFlags(train_dcnn, o);
  CLI::App *extract = verb("extract", "embed every track -> embeddings-<kind>.ivxm");
  AddManifest(extract, g);
  extract->add_option("--kind", g.kind, "ivec, deep or early");
  extract->add_option("--ubm", g.ubm_path, "UBM (default <out>/ubm.ivxm)");
  extract->add_option("--tv", g.tv_path, "T matrix (default <out>/tv.ivxm)");
  extract->add_option("--dcnn", g.net_path, "convnet (default <out>/dcnn.ivxm)");
  CLI::App *train_plda = verb("train-plda", "train PLDA on training artists -> plda-<kind>.ivxm");
  AddManifest(train_plda, g);
  train_plda->add_option("--kind", g.kind, "ivec, deep or early");
  CLI::App *enroll = verb("enroll", "enroll evaluation artists -> models-<kind>.ivxm");
  AddManifest(enroll, g);
  enroll->add_option("--kind", g.kind, "ivec, deep or early");
  CLI::App *score = verb("score", "score matrix of one system -> scores-<system>.csv");
  AddManifest(score, g);
  score->add_option("--system", g.system, "ivec, dcnn, early or late");
  AddFusionFlags(score, o);
  CLI::App *eval = verb("eval", "EER and accuracy -> report.csv, scores-<system>.csv");
  AddManifest(eval, g);
  AddFusionFlags(eval, o);
  o.Add<std::vector<std::string>>(eval, "--systems", "comma-separated systems",
                                  [](RunConfig &c, const std::vector<std::string> &v) {
                                    c.systems = ParseSystems(v);
                                  })
      ->delimiter(',');
  CLI::App *sweep = verb("sweep", "train and evaluate per training-artist count -> report.csv");
  AddManifest(sweep, g);
  o.Add<std::vector<int>>(sweep, "--counts", "comma-separated training-artist counts",
                          [](RunConfig &c, const std::vector<int> &v) { c.counts = v; })
      ->delimiter(',');
  o.Add<std::vector<std::string>>(sweep, "--systems", "comma-separated systems",
                                  [](RunConfig &c, const std::vector<std::string> &v) {
                                    c.systems = ParseSystems(v);
                                  })
      ->delimiter(',');
  AddUbmFlags(sweep, o);
  AddTvFlags(sweep, o);
  AddNetFlags(sweep, o);
  AddFusionFlags(sweep, o);
  CLI::App *grad = verb("grad-check", "finite-difference check of a fresh small convnet");
  AddNetFlags(grad, o);
  grad->add_option("--epsilon", g.epsilon, "finite-difference step (default 1e-5)");
  grad->add_option("--classes", g.grad_classes, "output classes (default 4)");
  grad->add_option("--params", g.grad_params, "minimum parameters to check (default 200)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    if (app.get_subcommands().empty() && !app.remaining().empty()) {
      std::cerr << "artrec: unknown verb '" << app.remaining().front()
                << "'\nRun with --help for more information.\n";
      return 2;
    }
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg;
    if (grad->parsed()) cfg.pipeline.net.channels = {2, 2, 2, 2, 2};
    if (const char *env = std::getenv("IVX_SEED")) {
      try {
        std::size_t used = 0;
        cfg.seed = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument(env);
      } catch (const std::exception &) {
        UsageError(std::string("IVX_SEED='") + env + "' is not an unsigned integer");
      }
    }
    if (!g.config_path.empty()) ApplyConfigFile(g.config_path, cfg);
    o.Apply(cfg);
    if (seed_opt->count() > 0) cfg.seed = g.seed;

    Session s(g, std::move(cfg));
    if (synth->parsed()) return RunSynth(s, g);
    if (train_ubm->parsed()) return RunTrainUbm(s);
    if (train_tv->parsed()) return RunTrainTv(s, g);
    if (train_dcnn->parsed()) return RunTrainDcnn(s);
    if (extract->parsed()) return RunExtract(s, g);
    if (train_plda->parsed()) return RunTrainPlda(s, g);
    if (enroll->parsed()) return RunEnroll(s, g);
    if (score->parsed()) return RunScore(s, g);
    if (eval->parsed()) return RunEval(s);
    if (sweep->parsed()) return RunSweepVerb(s, g);
    if (grad->parsed()) return RunGradCheck(s, g);
    return 2;
  } catch (const Error &e) {
    std::cerr << "artrec: " << e.what() << "\n";
    return e.code() == ErrorCode::kUsage ? 2 : 1;
  } catch (const std::exception &e) {
    std::cerr << "artrec: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace
}  // namespace cli
}  // namespace artrec

int main(int argc, char **argv) { return artrec::cli::Main(argc, argv); }
