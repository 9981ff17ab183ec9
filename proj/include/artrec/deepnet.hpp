// artrec/deepnet.hpp

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

// Convolutional artist classifier over 128x128 log-mel segments:
//   5 x {conv 3x3 same -> ReLU -> max-pool 2x2} -> global average pool
//   -> FC 256 + ReLU (the deep audio feature) -> linear -> softmax.
// Double precision, CPU only; im2col + GEMM for the convolutions.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "artrec/common.hpp"
#include "artrec/dsp.hpp"
#include "artrec/error.hpp"
#include "artrec/random.hpp"
#include "artrec/tvspace.hpp"

namespace artrec {
namespace deepnet {

inline constexpr int kNumConv = 5;
inline constexpr int kHiddenWidth = 256;
inline constexpr int kKernel = 3;
inline constexpr int kKernelArea = kKernel * kKernel;
inline constexpr double kSegmentSeconds = 3.0;
inline constexpr double kSegmentHopSeconds = 1.5;

using Act = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct NetConfig {
  int input_rows = 128;  // mel bins
  int input_cols = 128;  // frames
  std::array<int, kNumConv> channels{16, 32, 64, 128, 256};
  double learning_rate = 0.001;
  double momentum = 0.9;
  int batch_size = 16;
  int epochs = 10;
  std::uint64_t seed = 0;

  void Validate() const {
    constexpr int kDiv = 1 << kNumConv;
    ARTREC_REQUIRE(input_rows > 0 && input_cols > 0 && input_rows % kDiv == 0 &&
                       input_cols % kDiv == 0,
                   ErrorCode::kConfig, "input ", input_rows, "x", input_cols,
                   " is not divisible by ", kDiv);
    for (int c : channels)
      ARTREC_REQUIRE(c > 0, ErrorCode::kConfig, "channel counts must be positive");
    ARTREC_REQUIRE(learning_rate >= 0.0 && momentum >= 0.0 && momentum < 1.0,
                   ErrorCode::kConfig, "need lr >= 0 and momentum in [0, 1)");
    ARTREC_REQUIRE(batch_size >= 1 && epochs >= 0, ErrorCode::kConfig,
                   "need batch_size >= 1 and epochs >= 0");
  }
};

/// Every trainable tensor of the network. Also used for gradients and
/// momentum buffers, which share the shapes.
struct Parameters {
  std::array<Matrix, kNumConv> conv_w;  // C_out x (C_in * 9)
  std::array<Vector, kNumConv> conv_b;
  Matrix fc_w;   // 256 x C_5
  Vector fc_b;
  Matrix out_w;  // n_classes x 256
  Vector out_b;

  template <typename Fn>
  void ForEachTensor(Fn &&fn) {
    for (int l = 0; l < kNumConv; ++l) {
      fn("conv" + std::to_string(l + 1) + ".weight",
         std::span<double>(conv_w[l].data(), conv_w[l].size()));
      fn("conv" + std::to_string(l + 1) + ".bias",
         std::span<double>(conv_b[l].data(), conv_b[l].size()));
    }
    fn(std::string("fc.weight"), std::span<double>(fc_w.data(), fc_w.size()));
    fn(std::string("fc.bias"), std::span<double>(fc_b.data(), fc_b.size()));
    fn(std::string("out.weight"), std::span<double>(out_w.data(), out_w.size()));
    fn(std::string("out.bias"), std::span<double>(out_b.data(), out_b.size()));
  }

  template <typename Fn>
  void ForEachTensor(Fn &&fn) const {
    const_cast<Parameters *>(this)->ForEachTensor(
        [&](const std::string &name, std::span<double> s) {
          fn(name, std::span<const double>(s.data(), s.size()));
        });
  }

  Parameters ZerosLike() const {
    Parameters z = *this;
    z.ForEachTensor([](const std::string &, std::span<double> s) {
      std::fill(s.begin(), s.end(), 0.0);
    });
    return z;
  }

  std::size_t Count() const {
    std::size_t n = 0;
    ForEachTensor([&n](const std::string &, std::span<const double> s) { n += s.size(); });
    return n;
  }

  bool AllFinite() const {
    bool ok = true;
    ForEachTensor([&ok](const std::string &, std::span<const double> s) {
      for (double v : s) ok = ok && std::isfinite(v);
    });
    return ok;
  }
};

struct ConvNet {
  NetConfig config;
  int n_classes = 0;
  /// Global input standardization, fitted on the training segments.
  double input_mean = 0.0;
  double input_scale = 1.0;
  Parameters params;

  void Validate() const {
    config.Validate();
    ARTREC_REQUIRE(n_classes >= 2, ErrorCode::kConfig, "need >= 2 classes");
    const auto &p = params;
    int c_in = 1;
    for (int l = 0; l < kNumConv; ++l) {
      ARTREC_REQUIRE(p.conv_w[l].rows() == config.channels[l] &&
                         p.conv_w[l].cols() == c_in * kKernelArea &&
                         p.conv_b[l].size() == config.channels[l],
                     ErrorCode::kShape, "conv layer ", l + 1, " has wrong shape");
      c_in = config.channels[l];
    }
    ARTREC_REQUIRE(p.fc_w.rows() == kHiddenWidth && p.fc_w.cols() == c_in &&
                       p.fc_b.size() == kHiddenWidth &&
                       p.out_w.rows() == n_classes &&
                       p.out_w.cols() == kHiddenWidth &&
                       p.out_b.size() == n_classes,
                   ErrorCode::kShape, "fully-connected layers have wrong shape");
    ARTREC_REQUIRE(p.AllFinite() && std::isfinite(input_mean) &&
                       std::isfinite(input_scale) && input_scale > 0.0,
                   ErrorCode::kNumerical, "network parameters are not finite");
  }
};

/// He-initialized network (std = sqrt(2 / fan_in)); biases start at zero.
inline ConvNet BuildNetwork(int n_classes, const NetConfig &config,
                            std::uint64_t seed) {
  config.Validate();
  ARTREC_REQUIRE(n_classes >= 2, ErrorCode::kConfig,
                 "a classifier needs >= 2 classes, got ", n_classes);
  ConvNet net;
  net.config = config;
  net.n_classes = n_classes;
  Rng rng(seed);
  int c_in = 1;
  for (int l = 0; l < kNumConv; ++l) {
    const int fan_in = c_in * kKernelArea;
    net.params.conv_w[l] =
        GaussianMatrix(rng, config.channels[l], fan_in, std::sqrt(2.0 / fan_in));
    net.params.conv_b[l] = Vector::Zero(config.channels[l]);
    c_in = config.channels[l];
  }
  net.params.fc_w = GaussianMatrix(rng, kHiddenWidth, c_in, std::sqrt(2.0 / c_in));
  net.params.fc_b = Vector::Zero(kHiddenWidth);
  net.params.out_w =
      GaussianMatrix(rng, n_classes, kHiddenWidth, std::sqrt(2.0 / kHiddenWidth));
  net.params.out_b = Vector::Zero(n_classes);
  return net;
}

namespace internal {

// Rows: c_in * 9 (kernel offset), cols: h * w output pixels. Zero padding.
inline void Im2Col(const Act &in, int h, int w, Act &col) {
  const auto c_in = in.rows();
  col.resize(c_in * kKernelArea, static_cast<Eigen::Index>(h) * w);
  for (Eigen::Index c = 0; c < c_in; ++c) {
    const double *src = in.row(c).data();
    for (int ky = 0; ky < kKernel; ++ky) {
      for (int kx = 0; kx < kKernel; ++kx) {
        double *dst = col.row(c * kKernelArea + ky * kKernel + kx).data();
        const int dy = ky - 1, dx = kx - 1;
        for (int y = 0; y < h; ++y) {
          double *d = dst + static_cast<std::ptrdiff_t>(y) * w;
          const int sy = y + dy;
          if (sy < 0 || sy >= h) {
            std::fill(d, d + w, 0.0);
            continue;
          }
          const double *s = src + static_cast<std::ptrdiff_t>(sy) * w;
          const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
          std::fill(d, d + x0, 0.0);
          std::memcpy(d + x0, s + x0 + dx, sizeof(double) * (x1 - x0));
          std::fill(d + x1, d + w, 0.0);
        }
      }
    }
  }
}

inline void Col2Im(const Act &col, int c_in, int h, int w, Act &out) {
  out.setZero(c_in, static_cast<Eigen::Index>(h) * w);
  for (int c = 0; c < c_in; ++c) {
    double *dst = out.row(c).data();
    for (int ky = 0; ky < kKernel; ++ky) {
      for (int kx = 0; kx < kKernel; ++kx) {
        const double *src = col.row(c * kKernelArea + ky * kKernel + kx).data();
        const int dy = ky - 1, dx = kx - 1;
        for (int y = 0; y < h; ++y) {
          const int sy = y + dy;
          if (sy < 0 || sy >= h) continue;
          const double *s = src + static_cast<std::ptrdiff_t>(y) * w;
          double *d = dst + static_cast<std::ptrdiff_t>(sy) * w;
          const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
          for (int x = x0; x < x1; ++x) d[x + dx] += s[x];
        }
      }
    }
  }
}

struct ConvCache {
  int h = 0, w = 0;
  Act col;                   // im2col of the layer input
  Act pre;                   // conv output before ReLU, C x (h*w)
  std::vector<int> argmax;   // pooled position -> input pixel, per channel
};

}  // namespace internal

/// Full forward pass with every intermediate kept for backprop.
struct ForwardTrace {
  std::array<internal::ConvCache, kNumConv> conv;
  Vector pooled;     // global average pool output, C_5
  Vector hidden_pre; // FC pre-activation
  Vector hidden;     // deep feature, post-ReLU
  Vector logits;
  Vector probs;
};

inline ForwardTrace ForwardWithTrace(const ConvNet &net,
                                     const dsp::MelSpectrogram &input) {
  const NetConfig &cfg = net.config;
  ARTREC_REQUIRE(input.n_mels() == cfg.input_rows &&
                     input.n_frames() == cfg.input_cols,
                 ErrorCode::kShape, "input '", input.clip_id, "' is ",
                 input.n_mels(), "x", input.n_frames(), ", network expects ",
                 cfg.input_rows, "x", cfg.input_cols);
  const Parameters &p = net.params;
  ForwardTrace tr;
  int h = cfg.input_rows, w = cfg.input_cols;
  Act act(1, static_cast<Eigen::Index>(h) * w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      act(0, static_cast<Eigen::Index>(y) * w + x) =
          (input.values(y, x) - net.input_mean) / net.input_scale;

  for (int l = 0; l < kNumConv; ++l) {
    auto &cache = tr.conv[l];
    cache.h = h;
    cache.w = w;
    internal::Im2Col(act, h, w, cache.col);
    cache.pre.noalias() = p.conv_w[l] * cache.col;
    cache.pre.colwise() += p.conv_b[l];
    const int ho = h / 2, wo = w / 2;
    const auto c = cache.pre.rows();
    Act pooled(c, static_cast<Eigen::Index>(ho) * wo);
    cache.argmax.assign(static_cast<std::size_t>(c) * ho * wo, 0);
    for (Eigen::Index ch = 0; ch < c; ++ch) {
      const double *src = cache.pre.row(ch).data();
      for (int y = 0; y < ho; ++y) {
        for (int x = 0; x < wo; ++x) {
          int best = (2 * y) * w + 2 * x;
          for (int k : {(2 * y) * w + 2 * x + 1, (2 * y + 1) * w + 2 * x,
                        (2 * y + 1) * w + 2 * x + 1})
            if (src[k] > src[best]) best = k;
          const auto idx = static_cast<std::size_t>(ch) * ho * wo +
                           static_cast<std::size_t>(y) * wo + x;
          cache.argmax[idx] = best;
          // max-pool and ReLU commute
          pooled(ch, static_cast<Eigen::Index>(y) * wo + x) = std::max(src[best], 0.0);
        }
      }
    }
    act = std::move(pooled);
    h = ho;
    w = wo;
  }
  tr.pooled = act.rowwise().mean();
  tr.hidden_pre = p.fc_w * tr.pooled + p.fc_b;
  tr.hidden = tr.hidden_pre.cwiseMax(0.0);
  tr.logits = p.out_w * tr.hidden + p.out_b;
  const double mx = tr.logits.maxCoeff();
  tr.probs = (tr.logits.array() - mx).exp();
  tr.probs /= tr.probs.sum();
  return tr;
}

struct ForwardResult {
  Vector logits;
  EmbeddingVector hidden;  // kind = deep, post-ReLU, 256-dim
};

inline ForwardResult Forward(const ConvNet &net, const dsp::MelSpectrogram &input) {
  ForwardTrace tr = ForwardWithTrace(net, input);
  return ForwardResult{std::move(tr.logits),
                       EmbeddingVector{std::move(tr.hidden), EmbeddingKind::kDeep,
                                       input.clip_id}};
}

inline Vector Softmax(const Vector &logits) {
  Vector p = (logits.array() - logits.maxCoeff()).exp();
  return p / p.sum();
}

inline double CrossEntropy(const ForwardTrace &tr, int label) {
  const double mx = tr.logits.maxCoeff();
  const double lse = mx + std::log((tr.logits.array() - mx).exp().sum());
  return lse - tr.logits(label);
}

/// Adds d(cross-entropy)/d(params) for one sample into `grad`.
inline void Backward(const ConvNet &net, const ForwardTrace &tr, int label,
                     Parameters &grad) {
  const Parameters &p = net.params;
  Vector dlogits = tr.probs;
  dlogits(label) -= 1.0;
  grad.out_w.noalias() += dlogits * tr.hidden.transpose();
  grad.out_b += dlogits;
  Vector dhidden = p.out_w.transpose() * dlogits;
  for (Eigen::Index i = 0; i < dhidden.size(); ++i)
    if (tr.hidden_pre(i) <= 0.0) dhidden(i) = 0.0;
  grad.fc_w.noalias() += dhidden * tr.pooled.transpose();
  grad.fc_b += dhidden;
  const Vector dpooled = p.fc_w.transpose() * dhidden;

  const auto &last = tr.conv[kNumConv - 1];
  const int area = (last.h / 2) * (last.w / 2);
  Act dout = (dpooled / static_cast<double>(area)).replicate(1, area);

  Act dpre, dcol, din;
  for (int l = kNumConv - 1; l >= 0; --l) {
    const auto &cache = tr.conv[l];
    const auto c = cache.pre.rows();
    const int out_area = (cache.h / 2) * (cache.w / 2);
    dpre.setZero(c, static_cast<Eigen::Index>(cache.h) * cache.w);
    for (Eigen::Index ch = 0; ch < c; ++ch) {
      const double *pre = cache.pre.row(ch).data();
      double *dst = dpre.row(ch).data();
      const double *g = dout.row(ch).data();
      const int *arg = cache.argmax.data() + static_cast<std::size_t>(ch) * out_area;
      for (int k = 0; k < out_area; ++k)
        if (pre[arg[k]] > 0.0) dst[arg[k]] += g[k];
    }
    grad.conv_w[l].noalias() += dpre * cache.col.transpose();
    grad.conv_b[l] += dpre.rowwise().sum();
    if (l == 0) break;
    dcol.noalias() = p.conv_w[l].transpose() * dpre;
    internal::Col2Im(dcol, static_cast<int>(p.conv_w[l].cols() / kKernelArea),
                     cache.h, cache.w, din);
    dout = std::move(din);
  }
}

struct TrainHistory {
  std::vector<double> loss;      // mean cross-entropy over each epoch
  std::vector<double> accuracy;  // segment classification accuracy per epoch
};

/// Mini-batch SGD with momentum on cross-entropy. The reported per-epoch loss
/// and accuracy are accumulated during the epoch, before each batch update.
inline TrainHistory TrainNetwork(ConvNet &net,
                                 std::span<const dsp::MelSpectrogram> segments,
                                 std::span<const int> labels) {
  net.Validate();
  const NetConfig &cfg = net.config;
  ARTREC_REQUIRE(segments.size() == labels.size(), ErrorCode::kShape,
                 segments.size(), " segments but ", labels.size(), " labels");
  std::vector<int> per_class(net.n_classes, 0);
  for (int y : labels) {
    ARTREC_REQUIRE(y >= 0 && y < net.n_classes, ErrorCode::kData, "label ", y,
                   " outside [0, ", net.n_classes, ")");
    ++per_class[y];
  }
  for (int k = 0; k < net.n_classes; ++k)
    ARTREC_REQUIRE(per_class[k] > 0, ErrorCode::kData, "class ", k,
                   " has no training segments");

  double sum = 0.0, sum_sq = 0.0, count = 0.0;
  for (const auto &s : segments) {
    sum += s.values.sum();
    sum_sq += s.values.squaredNorm();
    count += static_cast<double>(s.values.size());
  }
  net.input_mean = sum / count;
  const double var = sum_sq / count - net.input_mean * net.input_mean;
  net.input_scale = var > 1e-12 ? std::sqrt(var) : 1.0;

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(segments.size());
  std::iota(order.begin(), order.end(), 0);
  Parameters velocity = net.params.ZerosLike();
  Parameters grad = velocity;
  TrainHistory history;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    int correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      grad = velocity.ZerosLike();
      for (std::size_t i = start; i < end; ++i) {
        const auto &seg = segments[order[i]];
        const int y = labels[order[i]];
        const ForwardTrace tr = ForwardWithTrace(net, seg);
        const double loss = CrossEntropy(tr, y);
        ARTREC_REQUIRE(std::isfinite(loss), ErrorCode::kNumerical,
                       "training diverged (loss is not finite) at epoch ", epoch);
        loss_sum += loss;
        Eigen::Index pred;
        tr.logits.maxCoeff(&pred);
        if (pred == y) ++correct;
        Backward(net, tr, y, grad);
      }
      const double scale = -cfg.learning_rate / static_cast<double>(end - start);
      std::vector<std::span<double>> v_tensors, g_tensors, p_tensors;
      velocity.ForEachTensor([&](const std::string &, std::span<double> s) { v_tensors.push_back(s); });
      grad.ForEachTensor([&](const std::string &, std::span<double> s) { g_tensors.push_back(s); });
      net.params.ForEachTensor([&](const std::string &, std::span<double> s) { p_tensors.push_back(s); });
      for (std::size_t t = 0; t < p_tensors.size(); ++t) {
        for (std::size_t i = 0; i < p_tensors[t].size(); ++i) {
          v_tensors[t][i] = cfg.momentum * v_tensors[t][i] + scale * g_tensors[t][i];
          p_tensors[t][i] += v_tensors[t][i];
        }
      }
    }
    history.loss.push_back(loss_sum / static_cast<double>(segments.size()));
    history.accuracy.push_back(static_cast<double>(correct) /
                               static_cast<double>(segments.size()));
  }
  ARTREC_REQUIRE(net.params.AllFinite(), ErrorCode::kNumerical,
                 "training produced non-finite parameters");
  return history;
}

struct GradientCheckResult {
  double max_relative_error = 0.0;
  int n_checked = 0;
  int n_skipped = 0;
  std::vector<std::pair<std::string, double>> per_tensor;  // max error each
};

namespace internal {

// True when the ReLU / max-pool routing of two passes is identical.
inline bool SameRouting(const ForwardTrace &a, const ForwardTrace &b) {
  for (int l = 0; l < kNumConv; ++l) {
    if (a.conv[l].argmax != b.conv[l].argmax) return false;
    const auto &pa = a.conv[l].pre, &pb = b.conv[l].pre;
    for (std::size_t k = 0; k < a.conv[l].argmax.size(); ++k) {
      const auto ch = static_cast<Eigen::Index>(k / ((a.conv[l].h / 2) * (a.conv[l].w / 2)));
      const int pix = a.conv[l].argmax[k];
      if ((pa(ch, pix) > 0.0) != (pb(ch, pix) > 0.0)) return false;
    }
  }
  for (Eigen::Index i = 0; i < a.hidden_pre.size(); ++i)
    if ((a.hidden_pre(i) > 0.0) != (b.hidden_pre(i) > 0.0)) return false;
  return true;
}

}  // namespace internal

/// Compares backprop gradients of the cross-entropy against central finite
/// differences on at least `min_params` seeded random parameters, spread over
/// every tensor. Parameters whose perturbation changes the ReLU or pooling
/// routing (i.e. sit within epsilon of a kink) are skipped.
inline GradientCheckResult GradientCheck(const ConvNet &net,
                                         const dsp::MelSpectrogram &sample,
                                         int label, double epsilon,
                                         std::uint64_t seed = 0,
                                         int min_params = 200) {
  ARTREC_REQUIRE(epsilon >= 1e-5 && epsilon <= 1e-2, ErrorCode::kConfig,
                 "epsilon ", epsilon, " outside [1e-5, 1e-2]");
  ARTREC_REQUIRE(label >= 0 && label < net.n_classes, ErrorCode::kData,
                 "label ", label, " out of range");
  ConvNet probe = net;
  const ForwardTrace base = ForwardWithTrace(probe, sample);
  Parameters grad = probe.params.ZerosLike();
  Backward(probe, base, label, grad);

  std::vector<std::pair<std::string, std::span<double>>> tensors;
  probe.params.ForEachTensor([&](const std::string &name, std::span<double> s) {
    tensors.emplace_back(name, s);
  });
  std::vector<std::span<double>> grads;
  grad.ForEachTensor([&](const std::string &, std::span<double> s) { grads.push_back(s); });

  const int per_tensor = (min_params + static_cast<int>(tensors.size()) - 1) /
                         static_cast<int>(tensors.size());
  Rng rng(seed);
  GradientCheckResult result;
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    auto &[name, values] = tensors[t];
    std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
    double tensor_max = 0.0;
    for (int k = 0; k < per_tensor; ++k) {
      const std::size_t i = pick(rng);
      const double saved = values[i];
      values[i] = saved + epsilon;
      const ForwardTrace plus = ForwardWithTrace(probe, sample);
      values[i] = saved - epsilon;
      const ForwardTrace minus = ForwardWithTrace(probe, sample);
      values[i] = saved;
      if (!internal::SameRouting(base, plus) || !internal::SameRouting(base, minus)) {
        ++result.n_skipped;
        continue;
      }
      const double numeric =
          (CrossEntropy(plus, label) - CrossEntropy(minus, label)) / (2.0 * epsilon);
      const double analytic = grads[t][i];
      const double err = std::abs(analytic - numeric) /
                         std::max(1e-8, std::abs(analytic) + std::abs(numeric));
      tensor_max = std::max(tensor_max, err);
      ++result.n_checked;
    }
    result.per_tensor.emplace_back(name, tensor_max);
    result.max_relative_error = std::max(result.max_relative_error, tensor_max);
  }
  return result;
}

/// Cuts a clip into 3 s segments with a 1.5 s hop (right-padding with silence
/// to at least 3 s) and returns their log-mel spectrograms.
inline std::vector<dsp::MelSpectrogram> SegmentClip(const dsp::AudioClip &clip,
                                                    const dsp::DspConfig &dsp_config) {
  ARTREC_REQUIRE(!clip.samples.empty(), ErrorCode::kEmptyInput, "clip '",
                 clip.id, "' is empty");
  const auto seg_len = static_cast<std::size_t>(kSegmentSeconds * clip.sample_rate);
  const auto hop = static_cast<std::size_t>(kSegmentHopSeconds * clip.sample_rate);
  std::vector<double> samples = clip.samples;
  if (samples.size() < seg_len) samples.resize(seg_len, 0.0);
  std::vector<dsp::MelSpectrogram> out;
  for (std::size_t start = 0; start + seg_len <= samples.size(); start += hop) {
    dsp::AudioClip seg;
    seg.samples.assign(samples.begin() + static_cast<std::ptrdiff_t>(start),
                       samples.begin() + static_cast<std::ptrdiff_t>(start + seg_len));
    seg.sample_rate = clip.sample_rate;
    seg.id = clip.id;
    out.push_back(dsp::LogMelSpectrogram(seg, dsp_config));
  }
  return out;
}

/// Mean of the segments' deep features, length-normalized.
inline EmbeddingVector EmbedSegments(const ConvNet &net,
                                     std::span<const dsp::MelSpectrogram> segments,
                                     const std::string &track_id) {
  ARTREC_REQUIRE(!segments.empty(), ErrorCode::kEmptyInput, "track '",
                 track_id, "' has no segments");
  Vector sum = Vector::Zero(kHiddenWidth);
  for (const auto &s : segments) sum += ForwardWithTrace(net, s).hidden;
  EmbeddingVector mean{sum / static_cast<double>(segments.size()),
                       EmbeddingKind::kDeep, track_id};
  if (mean.values.norm() == 0.0) {
    // Every hidden unit silent: fall back to a fixed direction so the track
    // still has a finite, comparable embedding.
    mean.values = Vector::Constant(kHiddenWidth, 1.0);
  }
  return tvspace::LengthNormalize(mean);
}

inline EmbeddingVector TrackEmbedding(const ConvNet &net, const dsp::AudioClip &clip,
                                      const dsp::DspConfig &dsp_config) {
  const auto segments = SegmentClip(clip, dsp_config);
  return EmbedSegments(net, segments, clip.id);
}

}  // namespace deepnet
}  // namespace artrec
