// artrec/dsp.hpp

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

// Frame-level audio features: log-mel spectrograms for the convnet branch and
// MFCCs (+ per-track CMVN) for the UBM / i-vector branch.

#pragma once

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "artrec/common.hpp"
#include "artrec/error.hpp"

namespace artrec {
namespace dsp {

inline constexpr int kSampleRate = 16000;

struct AudioClip {
  std::vector<double> samples;
  int sample_rate = kSampleRate;
  std::string id;

  double seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }

  void Validate() const {
    ARTREC_REQUIRE(!samples.empty(), ErrorCode::kEmptyInput, "clip '", id,
                   "' has no samples");
    ARTREC_REQUIRE(sample_rate == kSampleRate, ErrorCode::kConfig, "clip '",
                   id, "' has sample rate ", sample_rate, ", only ",
                   kSampleRate, " Hz is supported");
    for (double s : samples)
      ARTREC_REQUIRE(std::isfinite(s), ErrorCode::kData, "clip '", id,
                     "' contains a non-finite sample");
  }
};

struct DspConfig {
  int frame_len = 1024;
  int hop = 375;
  int n_fft = 1024;
  int n_mels = 128;
  int n_mfcc = 20;
  double fmin = 0.0;
  double fmax = 8000.0;
  double log_floor = 1e-10;

  /// 3 s at 16 kHz gives exactly 128 frames of 128 bands.
  static DspConfig MelDefaults() { return DspConfig{}; }

  /// 25 ms / 10 ms frames, 40 bands, 20 cepstra.
  static DspConfig MfccDefaults() {
    DspConfig c;
    c.frame_len = 400;
    c.hop = 160;
    c.n_fft = 512;
    c.n_mels = 40;
    c.n_mfcc = 20;
    return c;
  }

  int n_bins() const { return n_fft / 2 + 1; }

  void Validate() const {
    ARTREC_REQUIRE(hop > 0 && hop <= frame_len && frame_len <= n_fft,
                   ErrorCode::kConfig,
                   "need 0 < hop <= frame_len <= n_fft (hop=", hop,
                   ", frame_len=", frame_len, ", n_fft=", n_fft, ")");
    ARTREC_REQUIRE(fmin >= 0.0 && fmin < fmax && fmax <= kSampleRate / 2.0,
                   ErrorCode::kConfig, "need 0 <= fmin < fmax <= ",
                   kSampleRate / 2, " (fmin=", fmin, ", fmax=", fmax, ")");
    ARTREC_REQUIRE(n_mels >= 1, ErrorCode::kConfig, "n_mels must be >= 1");
    ARTREC_REQUIRE(n_mfcc >= 1 && n_mfcc <= n_mels, ErrorCode::kConfig,
                   "need 1 <= n_mfcc <= n_mels (n_mfcc=", n_mfcc, ")");
    ARTREC_REQUIRE(log_floor > 0.0, ErrorCode::kConfig,
                   "log_floor must be positive");
  }
};

struct MelSpectrogram {
  Matrix values;  // n_mels x n_frames
  std::string clip_id;

  Eigen::Index n_mels() const { return values.rows(); }
  Eigen::Index n_frames() const { return values.cols(); }
};

struct FeatureSequence {
  Matrix frames;  // n_frames x dim
  std::string clip_id;

  Eigen::Index n_frames() const { return frames.rows(); }
  Eigen::Index dim() const { return frames.cols(); }
};

inline double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

/// Center frequencies (Hz) of the n_mels triangular filters, plus the two
/// outer edges: n_mels + 2 points equally spaced on the mel scale.
inline std::vector<double> MelEdgeFrequencies(const DspConfig &config) {
  const double lo = HzToMel(config.fmin), hi = HzToMel(config.fmax);
  std::vector<double> edges(config.n_mels + 2);
  for (int i = 0; i < config.n_mels + 2; ++i)
    edges[i] = MelToHz(lo + (hi - lo) * i / (config.n_mels + 1));
  return edges;
}

/// Triangular filters over power-spectrum bins, peak value 1 at each center.
inline Matrix MelFilterbank(const DspConfig &config) {
  config.Validate();
  const std::vector<double> edges = MelEdgeFrequencies(config);
  const int n_bins = config.n_bins();
  Matrix fb = Matrix::Zero(config.n_mels, n_bins);
  for (int k = 0; k < config.n_mels; ++k) {
    const double left = edges[k], center = edges[k + 1], right = edges[k + 2];
    for (int b = 0; b < n_bins; ++b) {
      const double f = static_cast<double>(b) * kSampleRate / config.n_fft;
      if (f <= left || f >= right) continue;
      fb(k, b) = f <= center ? (f - left) / (center - left)
                             : (right - f) / (right - center);
    }
  }
  return fb;
}

/// Orthonormal DCT-II basis, n_out x n_in. Row k is coefficient k.
inline Matrix DctMatrix(int n_out, int n_in) {
  Matrix d(n_out, n_in);
  for (int k = 0; k < n_out; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n_in);
    for (int n = 0; n < n_in; ++n)
      d(k, n) = scale * std::cos(std::numbers::pi * k * (2.0 * n + 1.0) /
                                 (2.0 * n_in));
  }
  return d;
}

inline int NumFrames(std::size_t n_samples, int hop) {
  return static_cast<int>(n_samples / static_cast<std::size_t>(hop));
}

namespace internal {

// numpy-style "reflect" padding index (edge sample not repeated).
inline std::ptrdiff_t ReflectIndex(std::ptrdiff_t i, std::ptrdiff_t n) {
  if (n == 1) return 0;
  const std::ptrdiff_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

// Power spectra of the center-padded, Hann-windowed frames:
// n_bins x n_frames.
inline Matrix PowerSpectra(const AudioClip &clip, const DspConfig &config) {
  config.Validate();
  clip.Validate();
  const int n_frames = NumFrames(clip.samples.size(), config.hop);
  ARTREC_REQUIRE(n_frames >= 1, ErrorCode::kEmptyInput, "clip '", clip.id,
                 "' is shorter than one hop (", clip.samples.size(), " < ",
                 config.hop, " samples)");

  const int n_fft = config.n_fft, n_bins = config.n_bins();
  const int win_offset = (n_fft - config.frame_len) / 2;
  std::vector<double> window(config.frame_len);
  for (int i = 0; i < config.frame_len; ++i)
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / config.frame_len);

  const auto n = static_cast<std::ptrdiff_t>(clip.samples.size());
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> buf(n_fft);
  std::vector<std::complex<double>> spec;
  Matrix power(n_bins, n_frames);
  for (int t = 0; t < n_frames; ++t) {
    std::fill(buf.begin(), buf.end(), 0.0);
    const std::ptrdiff_t start =
        static_cast<std::ptrdiff_t>(t) * config.hop - n_fft / 2 + win_offset;
    for (int i = 0; i < config.frame_len; ++i)
      buf[win_offset + i] = window[i] * clip.samples[ReflectIndex(start + i, n)];
    fft.fwd(spec, buf);
    for (int b = 0; b < n_bins; ++b) power(b, t) = std::norm(spec[b]);
  }
  return power;
}

inline Matrix LogMel(const Matrix &power, const Matrix &filterbank,
                     double log_floor) {
  return (filterbank * power).unaryExpr([log_floor](double v) {
    return std::log(std::max(v, log_floor));
  });
}

}  // namespace internal

inline MelSpectrogram LogMelSpectrogram(const AudioClip &clip,
                                        const DspConfig &config) {
  const Matrix power = internal::PowerSpectra(clip, config);
  return MelSpectrogram{
      internal::LogMel(power, MelFilterbank(config), config.log_floor), clip.id};
}

inline FeatureSequence Mfcc(const AudioClip &clip, const DspConfig &config) {
  const Matrix power = internal::PowerSpectra(clip, config);
  const Matrix log_mel =
      internal::LogMel(power, MelFilterbank(config), config.log_floor);
  const Matrix dct = DctMatrix(config.n_mfcc, config.n_mels);
  return FeatureSequence{(dct * log_mel).transpose(), clip.id};
}

/// Per-track mean and variance normalization. A dimension whose variance is
/// below 1e-12 is only centered.
inline FeatureSequence Cmvn(const FeatureSequence &seq) {
  ARTREC_REQUIRE(seq.n_frames() >= 2, ErrorCode::kInsufficientFrames,
                 "CMVN on '", seq.clip_id, "' needs >= 2 frames, got ",
                 seq.n_frames());
  FeatureSequence out{seq.frames, seq.clip_id};
  const double n = static_cast<double>(seq.n_frames());
  for (Eigen::Index j = 0; j < seq.dim(); ++j) {
    auto col = out.frames.col(j);
    const double mean = col.sum() / n;
    col.array() -= mean;
    const double var = col.squaredNorm() / n;
    if (var >= 1e-12) col /= std::sqrt(var);
  }
  return out;
}

}  // namespace dsp
}  // namespace artrec
