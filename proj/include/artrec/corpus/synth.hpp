// artrec/corpus/synth.hpp

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

// Synthetic corpus generator standing in for a real music collection.
//
// Every artist gets a latent identity vector z_a ~ N(0, between^2 I); each
// track perturbs it, z = z_a + N(0, within^2 I).  The latent drives
//   - MFCC-like frames: a fixed 16-component background GMM whose component
//     means are shifted by component-specific loadings A_k z,
//   - 128x128 log-mel-like segments: a spectral envelope plus a bank of
//     2-D gratings whose log-amplitudes are linear in z, with random phase
//     per segment and white noise,
//   - (audio mode) harmonic tone sequences whose timbre envelope and pitch
//     register are linear in z, written as WAV files.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "artrec/common.hpp"
#include "artrec/corpus/manifest.hpp"
#include "artrec/corpus/wav.hpp"
#include "artrec/dsp.hpp"
#include "artrec/random.hpp"

namespace artrec {
namespace corpus {

inline constexpr int kLatentDim = 8;
inline constexpr int kFrameDim = 20;
inline constexpr int kFramesPerSecond = 100;
inline constexpr int kMelSize = 128;

/// Fixed (seed-derived) generative parameters shared by all artists.
struct FeatureWorld {
  Vector weights;               // K
  Matrix means;                 // K x d
  Matrix stddevs;               // K x d
  std::vector<Matrix> loadings; // K matrices d x q

  struct Grating {
    double rows_cycles, cols_cycles;
  };
  std::vector<Grating> gratings;
  Matrix grating_gain;   // J x q, log-amplitude per unit latent
  Matrix envelope_gain;  // n_env x q
  double mel_noise = 0.5;

  Matrix timbre_gain;    // audio: n_timbre x q
  Vector pitch_gain;     // audio: q
};

inline FeatureWorld MakeWorld(std::uint64_t seed) {
  Rng rng(DeriveSeed(seed, 0x3017d));
  constexpr int k = 16, d = kFrameDim, q = kLatentDim;
  FeatureWorld w;
  w.weights.resize(k);
  for (int i = 0; i < k; ++i) w.weights(i) = Uniform(rng, 0.5, 1.5);
  w.weights /= w.weights.sum();
  w.means = GaussianMatrix(rng, k, d, 2.0);
  w.stddevs.resize(k, d);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < d; ++j) w.stddevs(i, j) = Uniform(rng, 0.6, 1.2);
  for (int i = 0; i < k; ++i)
    w.loadings.push_back(GaussianMatrix(rng, d, q, 0.6 / std::sqrt(double(q))));

  w.gratings = {{4, 0}, {0, 4}, {8, 8}, {16, 0}, {0, 16}, {32, 8}, {8, 32}, {24, 24}};
  w.grating_gain = GaussianMatrix(rng, static_cast<Eigen::Index>(w.gratings.size()),
                                  q, 1.0 / std::sqrt(double(q)));
  w.envelope_gain = GaussianMatrix(rng, 4, q, 0.5 / std::sqrt(double(q)));
  w.timbre_gain = GaussianMatrix(rng, 6, q, 1.0 / std::sqrt(double(q)));
  w.pitch_gain = GaussianVector(rng, q, 0.5 / std::sqrt(double(q)));
  return w;
}

inline int NumFrames(const SynthSpec &spec) {
  return static_cast<int>(std::lround(spec.track_seconds * kFramesPerSecond));
}

inline int NumSegments(const SynthSpec &spec) {
  return 1 + static_cast<int>(std::floor((spec.track_seconds - 3.0) / 1.5 + 1e-9));
}

/// MFCC-like frames of one feature-mode track (before CMVN).
inline dsp::FeatureSequence SynthFrames(const FeatureWorld &w, const SynthSpec &spec,
                                        const TrackEntry &track) {
  const Vector z = Eigen::Map<const Vector>(track.latent.data(),
                                            static_cast<Eigen::Index>(track.latent.size()));
  const auto k = w.weights.size();
  Matrix shifted = w.means;
  for (Eigen::Index c = 0; c < k; ++c)
    shifted.row(c) += (w.loadings[c] * z).transpose();
  Rng rng(DeriveSeed(track.seed, 1));
  std::discrete_distribution<int> pick(w.weights.data(), w.weights.data() + k);
  const int n = NumFrames(spec);
  dsp::FeatureSequence seq{Matrix(n, kFrameDim), track.track_id};
  for (int t = 0; t < n; ++t) {
    const int c = pick(rng);
    for (int j = 0; j < kFrameDim; ++j)
      seq.frames(t, j) = shifted(c, j) + w.stddevs(c, j) * Gaussian(rng);
  }
  return seq;
}

/// 128x128 log-mel-like segment `index` of one feature-mode track.
inline dsp::MelSpectrogram SynthSegment(const FeatureWorld &w, const TrackEntry &track,
                                        bool is_vocal, int index) {
  const Vector z = Eigen::Map<const Vector>(track.latent.data(),
                                            static_cast<Eigen::Index>(track.latent.size()));
  Rng rng(DeriveSeed(track.seed, 100 + static_cast<std::uint64_t>(index)));
  const int n = kMelSize;
  Matrix mel(n, n);
  for (int t = 0; t < n; ++t)
    for (int b = 0; b < n; ++b) mel(b, t) = w.mel_noise * Gaussian(rng);

  const Vector env = w.envelope_gain * z;
  for (int b = 0; b < n; ++b) {
    double e = 0.0;
    for (Eigen::Index m = 0; m < env.size(); ++m)
      e += env(m) * std::cos(std::numbers::pi * (m + 1) * (b + 0.5) / n);
    mel.row(b).array() += e;
  }

  auto add_grating = [&](double rows_cycles, double cols_cycles, double amp) {
    const double phase = Uniform(rng, 0.0, 2.0 * std::numbers::pi);
    Vector rc(n), rs(n), cc(n), cs(n);
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * std::numbers::pi * rows_cycles * i / n + phase;
      const double c = 2.0 * std::numbers::pi * cols_cycles * i / n;
      rc(i) = std::cos(a);
      rs(i) = std::sin(a);
      cc(i) = std::cos(c);
      cs(i) = std::sin(c);
    }
    // cos(a + c) = cos a cos c - sin a sin c
    mel.noalias() += amp * (rc * cc.transpose() - rs * cs.transpose());
  };
  const Vector log_amp = w.grating_gain * z;
  for (std::size_t j = 0; j < w.gratings.size(); ++j)
    add_grating(w.gratings[j].rows_cycles, w.gratings[j].cols_cycles,
                std::exp(0.5 * log_amp(static_cast<Eigen::Index>(j))));
  if (is_vocal) add_grating(40, 12, 1.0);
  return dsp::MelSpectrogram{std::move(mel), track.track_id};
}

/// Harmonic tone sequence of one audio-mode track.
inline dsp::AudioClip SynthAudio(const FeatureWorld &w, const SynthSpec &spec,
                                 const TrackEntry &track,
                                 const std::vector<double> &latent, bool is_vocal) {
  const Vector z = Eigen::Map<const Vector>(latent.data(),
                                            static_cast<Eigen::Index>(latent.size()));
  Rng rng(DeriveSeed(track.seed, 2));
  const int rate = dsp::kSampleRate;
  const auto n = static_cast<std::size_t>(std::lround(spec.track_seconds * rate));
  const Vector timbre = w.timbre_gain * z;
  const double base_f0 = 110.0 * std::pow(2.0, w.pitch_gain.dot(z));
  const double mel_top = dsp::HzToMel(8000.0);
  auto log_amp = [&](double f) {
    const double u = dsp::HzToMel(f) / mel_top;
    double a = 0.0;
    for (Eigen::Index m = 0; m < timbre.size(); ++m)
      a += timbre(m) * std::cos(std::numbers::pi * (m + 1) * u);
    if (is_vocal) a += 1.5 * std::exp(-std::pow((f - 3000.0) / 500.0, 2));
    return a;
  };

  dsp::AudioClip clip;
  clip.id = track.track_id;
  clip.samples.assign(n, 0.0);
  const auto note_len = static_cast<std::size_t>(0.25 * rate);
  const auto fade = static_cast<std::size_t>(0.01 * rate);
  for (std::size_t start = 0; start < n; start += note_len) {
    const std::size_t len = std::min(note_len, n - start);
    const int semitone = std::uniform_int_distribution<int>(0, 11)(rng);
    const double f0 = base_f0 * std::pow(2.0, semitone / 12.0);
    const int n_harm = std::max(1, static_cast<int>(7500.0 / f0));
    std::vector<double> amps(n_harm);
    for (int h = 0; h < n_harm; ++h)
      amps[h] = std::exp(log_amp(f0 * (h + 1))) / std::sqrt(h + 1.0);
    double phase = Uniform(rng, 0.0, 2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < len; ++i) {
      const double t = static_cast<double>(start + i) / rate;
      const double vib = is_vocal ? 1.0 + 0.01 * std::sin(2.0 * std::numbers::pi * 5.5 * t) : 1.0;
      phase += 2.0 * std::numbers::pi * f0 * vib / rate;
      const std::complex<double> step = std::polar(1.0, phase);
      std::complex<double> rot = step;
      double s = 0.0;
      for (int h = 0; h < n_harm; ++h) {
        s += amps[h] * rot.imag();
        rot *= step;
      }
      const double env = std::min({1.0, double(i) / fade, double(len - i) / fade});
      clip.samples[start + i] = env * s;
    }
  }
  double peak = 0.0;
  for (double &s : clip.samples) {
    s += 1e-3 * Gaussian(rng);
    peak = std::max(peak, std::abs(s));
  }
  for (double &s : clip.samples) s *= 0.5 / peak;
  return clip;
}

/// Builds (and in audio mode writes under `out_dir`) a split corpus.
inline CorpusManifest GenerateCorpus(const SynthSpec &spec, std::uint64_t seed,
                                     const std::string &out_dir = "") {
  spec.Validate();
  CorpusManifest m;
  m.seed = seed;
  m.mode = spec.mode;
  m.synth = spec;
  m.base_dir = out_dir.empty() ? "." : out_dir;
  if (spec.mode == CorpusMode::kAudio) {
    ARTREC_REQUIRE(!out_dir.empty(), ErrorCode::kConfig,
                   "audio-mode corpus generation needs an output directory");
    std::error_code ec;
    std::filesystem::create_directories(std::filesystem::path(out_dir) / "audio", ec);
    ARTREC_REQUIRE(!ec, ErrorCode::kIo, "cannot create ", out_dir, "/audio: ",
                   ec.message());
  }
  const FeatureWorld world = MakeWorld(seed);
  const int n_artists = spec.n_train_artists + spec.n_eval_artists;
  for (int ai = 0; ai < n_artists; ++ai) {
    Rng rng(DeriveSeed(seed, 1000000u + static_cast<std::uint64_t>(ai)));
    ArtistEntry a;
    char id[32];
    std::snprintf(id, sizeof(id), "artist%04d", ai);
    a.artist_id = id;
    a.role = ai < spec.n_train_artists ? Role::kTrain : Role::kEval;
    a.is_vocal = Uniform(rng) < spec.vocal_fraction;
    const Vector center = GaussianVector(rng, kLatentDim, spec.between_artist_spread);
    for (int ti = 0; ti < spec.tracks_per_artist; ++ti) {
      TrackEntry t;
      std::snprintf(id, sizeof(id), "%s_t%02d", a.artist_id.c_str(), ti);
      t.track_id = id;
      t.seed = DeriveSeed(seed, 2000000u + static_cast<std::uint64_t>(ai) * 1000u + ti);
      const Vector z = center + GaussianVector(rng, kLatentDim, spec.within_artist_spread);
      t.latent.assign(z.data(), z.data() + z.size());
      if (spec.mode == CorpusMode::kAudio) {
        t.path = "audio/" + t.track_id + ".wav";
        WriteWav(m.ResolvePath(t), SynthAudio(world, spec, t, t.latent, a.is_vocal));
      }
      a.tracks.push_back(std::move(t));
    }
    m.artists.push_back(std::move(a));
  }
  return SplitCorpus(std::move(m));
}

}  // namespace corpus
}  // namespace artrec
