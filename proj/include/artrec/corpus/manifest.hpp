// artrec/corpus/manifest.hpp

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

// Corpus manifest: artists, their tracks, roles and protocol splits.
// Persisted as JSON.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "artrec/corpus/wav.hpp"
#include "artrec/error.hpp"
#include "artrec/random.hpp"

namespace artrec {
namespace corpus {

inline constexpr int kTracksPerEvalArtist = 20;
inline constexpr int kEnrollTracks = 15;
inline constexpr int kTestTracks = 5;

enum class CorpusMode { kFeature, kAudio };
enum class Role { kTrain, kEval };
enum class Split { kNone, kTrain, kEnroll, kTest };

struct SynthSpec {
  int n_train_artists = 100;
  int n_eval_artists = 20;
  int tracks_per_artist = 20;
  double track_seconds = 12.0;
  double within_artist_spread = 0.1;
  double between_artist_spread = 1.0;
  double vocal_fraction = 0.5;
  CorpusMode mode = CorpusMode::kFeature;

  void Validate() const {
    ARTREC_REQUIRE(n_train_artists >= 0 && n_eval_artists >= 1,
                   ErrorCode::kConfig, "need >= 0 train and >= 1 eval artists");
    ARTREC_REQUIRE(tracks_per_artist >= 1, ErrorCode::kConfig,
                   "tracks_per_artist must be >= 1");
    ARTREC_REQUIRE(track_seconds >= 3.0, ErrorCode::kConfig,
                   "track_seconds must be >= 3 (one convnet segment)");
    ARTREC_REQUIRE(within_artist_spread > 0.0 && between_artist_spread > 0.0,
                   ErrorCode::kConfig, "spreads must be positive");
    ARTREC_REQUIRE(between_artist_spread > within_artist_spread,
                   ErrorCode::kConfig,
                   "between_artist_spread must exceed within_artist_spread");
    ARTREC_REQUIRE(vocal_fraction >= 0.0 && vocal_fraction <= 1.0,
                   ErrorCode::kConfig, "vocal_fraction must be in [0, 1]");
  }
};

struct TrackEntry {
  std::string track_id;
  Split split = Split::kNone;
  std::string path;            // audio mode, relative to the manifest
  std::uint64_t seed = 0;      // feature mode generator stream
  std::vector<double> latent;  // feature mode identity vector of the track
};

struct ArtistEntry {
  std::string artist_id;
  bool is_vocal = false;
  Role role = Role::kTrain;
  std::vector<TrackEntry> tracks;
};

struct CorpusManifest {
  std::vector<ArtistEntry> artists;
  std::uint64_t seed = 0;
  CorpusMode mode = CorpusMode::kFeature;
  SynthSpec synth;
  std::string base_dir = ".";  // not serialized

  std::vector<const ArtistEntry *> ArtistsWithRole(Role role) const {
    std::vector<const ArtistEntry *> out;
    for (const auto &a : artists)
      if (a.role == role) out.push_back(&a);
    return out;
  }

  std::string ResolvePath(const TrackEntry &t) const {
    return (std::filesystem::path(base_dir) / t.path).string();
  }
};

inline std::string ToString(CorpusMode m) {
  return m == CorpusMode::kFeature ? "feature" : "audio";
}
inline std::string ToString(Role r) { return r == Role::kTrain ? "train" : "eval"; }
inline std::string ToString(Split s) {
  switch (s) {
    case Split::kNone: return "none";
    case Split::kTrain: return "train";
    case Split::kEnroll: return "enroll";
    case Split::kTest: return "test";
  }
  return "none";
}

inline CorpusMode ParseMode(const std::string &s) {
  if (s == "feature") return CorpusMode::kFeature;
  if (s == "audio") return CorpusMode::kAudio;
  artrec::internal::Fail(ErrorCode::kConfig, "unknown corpus mode '", s, "'");
}
inline Role ParseRole(const std::string &s) {
  if (s == "train") return Role::kTrain;
  if (s == "eval") return Role::kEval;
  artrec::internal::Fail(ErrorCode::kConfig, "unknown artist role '", s, "'");
}
inline Split ParseSplit(const std::string &s) {
  if (s == "none") return Split::kNone;
  if (s == "train") return Split::kTrain;
  if (s == "enroll") return Split::kEnroll;
  if (s == "test") return Split::kTest;
  artrec::internal::Fail(ErrorCode::kConfig, "unknown split '", s, "'");
}

/// Checks the evaluation protocol: train and eval artist sets are disjoint,
/// every eval artist has exactly 15 enroll + 5 test tracks, every train
/// artist's tracks are all split=train, and ids are unique.
inline void ValidateManifest(const CorpusManifest &m) {
  std::set<std::string> train_ids, eval_ids;
  for (const auto &a : m.artists)
    (a.role == Role::kTrain ? train_ids : eval_ids).insert(a.artist_id);
  for (const auto &id : train_ids)
    ARTREC_REQUIRE(!eval_ids.count(id), ErrorCode::kProtocolViolation,
                   "artist '", id, "' is both a training and an evaluation artist");
  ARTREC_REQUIRE(train_ids.size() + eval_ids.size() == m.artists.size(),
                 ErrorCode::kProtocol, "duplicate artist ids in manifest");
  std::set<std::string> track_ids;
  for (const auto &a : m.artists) {
    int enroll = 0, test = 0;
    for (const auto &t : a.tracks) {
      ARTREC_REQUIRE(track_ids.insert(t.track_id).second, ErrorCode::kProtocol,
                     "duplicate track id '", t.track_id, "'");
      if (m.mode == CorpusMode::kAudio)
        ARTREC_REQUIRE(!t.path.empty(), ErrorCode::kProtocol, "track '",
                       t.track_id, "' has no audio path");
      else
        ARTREC_REQUIRE(!t.latent.empty(), ErrorCode::kProtocol, "track '",
                       t.track_id, "' has no inline features");
      if (a.role == Role::kTrain) {
        ARTREC_REQUIRE(t.split == Split::kTrain, ErrorCode::kProtocol,
                       "training artist '", a.artist_id, "' has track '",
                       t.track_id, "' with split ", ToString(t.split));
      } else {
        ARTREC_REQUIRE(t.split == Split::kEnroll || t.split == Split::kTest,
                       ErrorCode::kProtocol, "evaluation artist '", a.artist_id,
                       "' has track '", t.track_id, "' with split ",
                       ToString(t.split));
        (t.split == Split::kEnroll ? enroll : test)++;
      }
    }
    if (a.role == Role::kEval)
      ARTREC_REQUIRE(enroll == kEnrollTracks && test == kTestTracks &&
                         static_cast<int>(a.tracks.size()) == kTracksPerEvalArtist,
                     ErrorCode::kProtocol, "evaluation artist '", a.artist_id,
                     "' has ", enroll, " enroll / ", test,
                     " test tracks; the protocol needs 15 / 5 of 20");
  }
}

/// Seeded per-artist shuffle: the first 15 tracks enroll, the next 5 test;
/// tracks beyond 20 are dropped. Training artists' tracks become split=train.
inline CorpusManifest SplitCorpus(CorpusManifest m) {
  for (std::size_t ai = 0; ai < m.artists.size(); ++ai) {
    auto &a = m.artists[ai];
    if (a.role == Role::kTrain) {
      for (auto &t : a.tracks) t.split = Split::kTrain;
      continue;
    }
    ARTREC_REQUIRE(static_cast<int>(a.tracks.size()) >= kTracksPerEvalArtist,
                   ErrorCode::kProtocol, "evaluation artist '", a.artist_id,
                   "' has ", a.tracks.size(), " tracks; the protocol needs ",
                   kTracksPerEvalArtist);
    std::vector<std::size_t> order(a.tracks.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(DeriveSeed(m.seed, 0x51u + ai));
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Split> split(a.tracks.size(), Split::kNone);
    for (int k = 0; k < kTracksPerEvalArtist; ++k)
      split[order[k]] = k < kEnrollTracks ? Split::kEnroll : Split::kTest;
    std::vector<TrackEntry> kept;
    for (std::size_t i = 0; i < a.tracks.size(); ++i) {
      if (split[i] == Split::kNone) continue;
      a.tracks[i].split = split[i];
      kept.push_back(std::move(a.tracks[i]));
    }
    a.tracks = std::move(kept);
  }
  ValidateManifest(m);
  return m;
}

inline nlohmann::json ToJson(const SynthSpec &s) {
  return nlohmann::json{{"n_train_artists", s.n_train_artists},
                        {"n_eval_artists", s.n_eval_artists},
                        {"tracks_per_artist", s.tracks_per_artist},
                        {"track_seconds", s.track_seconds},
                        {"within_artist_spread", s.within_artist_spread},
                        {"between_artist_spread", s.between_artist_spread},
                        {"vocal_fraction", s.vocal_fraction},
                        {"mode", ToString(s.mode)}};
}

inline SynthSpec SynthSpecFromJson(const nlohmann::json &j) {
  SynthSpec s;
  s.n_train_artists = j.value("n_train_artists", s.n_train_artists);
  s.n_eval_artists = j.value("n_eval_artists", s.n_eval_artists);
  s.tracks_per_artist = j.value("tracks_per_artist", s.tracks_per_artist);
  s.track_seconds = j.value("track_seconds", s.track_seconds);
  s.within_artist_spread = j.value("within_artist_spread", s.within_artist_spread);
  s.between_artist_spread = j.value("between_artist_spread", s.between_artist_spread);
  s.vocal_fraction = j.value("vocal_fraction", s.vocal_fraction);
  s.mode = ParseMode(j.value("mode", ToString(s.mode)));
  return s;
}

inline nlohmann::json ToJson(const CorpusManifest &m) {
  nlohmann::json artists = nlohmann::json::array();
  for (const auto &a : m.artists) {
    nlohmann::json tracks = nlohmann::json::array();
    for (const auto &t : a.tracks) {
      nlohmann::json jt{{"track_id", t.track_id}, {"split", ToString(t.split)}};
      if (m.mode == CorpusMode::kAudio)
        jt["path"] = t.path;
      else
        jt["inline"] = nlohmann::json{{"seed", t.seed}, {"latent", t.latent}};
      tracks.push_back(std::move(jt));
    }
    artists.push_back(nlohmann::json{{"artist_id", a.artist_id},
                                     {"is_vocal", a.is_vocal},
                                     {"role", ToString(a.role)},
                                     {"tracks", std::move(tracks)}});
  }
  return nlohmann::json{{"mode", ToString(m.mode)},
                        {"seed", m.seed},
                        {"synth", ToJson(m.synth)},
                        {"artists", std::move(artists)}};
}

inline CorpusManifest ManifestFromJson(const nlohmann::json &j) {
  CorpusManifest m;
  try {
    m.mode = ParseMode(j.at("mode").get<std::string>());
    m.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("synth")) m.synth = SynthSpecFromJson(j.at("synth"));
    for (const auto &ja : j.at("artists")) {
      ArtistEntry a;
      a.artist_id = ja.at("artist_id").get<std::string>();
      a.is_vocal = ja.value("is_vocal", false);
      a.role = ParseRole(ja.at("role").get<std::string>());
      for (const auto &jt : ja.at("tracks")) {
        TrackEntry t;
        t.track_id = jt.at("track_id").get<std::string>();
        t.split = ParseSplit(jt.value("split", std::string("none")));
        t.path = jt.value("path", std::string());
        if (jt.contains("inline")) {
          t.seed = jt.at("inline").at("seed").get<std::uint64_t>();
          t.latent = jt.at("inline").at("latent").get<std::vector<double>>();
        }
        a.tracks.push_back(std::move(t));
      }
      m.artists.push_back(std::move(a));
    }
  } catch (const nlohmann::json::exception &e) {
    artrec::internal::Fail(ErrorCode::kFormat, "malformed manifest: ", e.what());
  }
  return m;
}

inline void SaveManifest(const std::string &path, const CorpusManifest &m) {
  internal::WriteFile(path, ToJson(m).dump(1) + "\n");
}

/// Parses and validates; relative track paths resolve against the
/// manifest's directory.
inline CorpusManifest LoadManifest(const std::string &path) {
  const std::string text = internal::ReadFile(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    artrec::internal::Fail(ErrorCode::kFormat, "manifest '", path, "' is not valid JSON: ",
                   e.what());
  }
  CorpusManifest m = ManifestFromJson(j);
  m.base_dir = std::filesystem::path(path).parent_path().string();
  if (m.base_dir.empty()) m.base_dir = ".";
  ValidateManifest(m);
  return m;
}

}  // namespace corpus
}  // namespace artrec
