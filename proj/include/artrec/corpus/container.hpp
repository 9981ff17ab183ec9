// artrec/corpus/container.hpp

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

// Binary model container.
//
//   offset 0   magic "IVXM"
//   offset 4   format version, u16 LE
//   offset 6   model kind, u16 LE
//   offset 8   payload length in bytes, u64 LE
//   offset 16  payload: a text metadata block of "key value" lines, one
//              "array <name> <rows> <cols>" line per array, and "end";
//              then the arrays as raw LE float64 in declaration order
//              (Eigen column-major element order).

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "artrec/backend.hpp"
#include "artrec/corpus/wav.hpp"
#include "artrec/deepnet.hpp"
#include "artrec/error.hpp"
#include "artrec/tvspace.hpp"
#include "artrec/ubm.hpp"

namespace artrec {
namespace corpus {

inline constexpr char kContainerMagic[4] = {'I', 'V', 'X', 'M'};
inline constexpr std::uint16_t kContainerVersion = 1;
inline constexpr std::size_t kContainerHeaderSize = 16;

enum class ModelKind : std::uint16_t {
  kDiagGmm = 1,
  kTotalVariability = 2,
  kConvNet = 3,
  kPlda = 4,
  kArtistModels = 5,
  kEmbeddings = 6,
};

/// Track (or artist) embeddings with their identity labels.
struct EmbeddingSet {
  std::vector<EmbeddingVector> vectors;
  std::vector<std::string> labels;
};

using ArtistModelSet = std::vector<backend::ArtistModel>;

namespace internal {

inline void CheckToken(const std::string &s) {
  ARTREC_REQUIRE(!s.empty() && s.find_first_of(" \t\r\n") == std::string::npos,
                 ErrorCode::kConfig, "identifier '", s,
                 "' cannot be stored (empty or contains whitespace)");
}

class ContainerWriter {
 public:
  template <typename T>
  void Field(const std::string &key, const T &value) {
    std::ostringstream os;
    os << key << ' ' << value << '\n';
    meta_ += os.str();
  }

  void Array(const std::string &name, const double *data, Eigen::Index rows,
             Eigen::Index cols) {
    std::ostringstream os;
    os << "array " << name << ' ' << rows << ' ' << cols << '\n';
    meta_ += os.str();
    blob_.append(reinterpret_cast<const char *>(data),
                 static_cast<std::size_t>(rows * cols) * sizeof(double));
  }
  void Array(const std::string &name, const Matrix &m) {
    Array(name, m.data(), m.rows(), m.cols());
  }
  void Array(const std::string &name, const Vector &v) {
    Array(name, v.data(), v.size(), 1);
  }

  std::string Finish(ModelKind kind) const {
    const std::string payload = meta_ + "end\n" + blob_;
    std::string out(kContainerMagic, 4);
    Append<std::uint16_t>(out, kContainerVersion);
    Append<std::uint16_t>(out, static_cast<std::uint16_t>(kind));
    Append<std::uint64_t>(out, payload.size());
    return out + payload;
  }

 private:
  std::string meta_;
  std::string blob_;
};

class ContainerReader {
 public:
  ContainerReader(std::string_view bytes, ModelKind expected) {
    ARTREC_REQUIRE(bytes.size() >= kContainerHeaderSize &&
                       std::memcmp(bytes.data(), kContainerMagic, 4) == 0,
                   ErrorCode::kCorruption, "bad magic (not an IVXM container)");
    const auto *p = reinterpret_cast<const unsigned char *>(bytes.data());
    const std::uint16_t version = ReadU16(p + 4);
    ARTREC_REQUIRE(version == kContainerVersion, ErrorCode::kUnsupportedVersion,
                   "container version ", version, " (this build reads version ",
                   kContainerVersion, ")");
    const std::uint16_t kind = ReadU16(p + 6);
    ARTREC_REQUIRE(kind == static_cast<std::uint16_t>(expected),
                   ErrorCode::kCorruption, "container holds model kind ", kind,
                   ", expected ", static_cast<int>(expected));
    std::uint64_t length;
    std::memcpy(&length, p + 8, 8);
    ARTREC_REQUIRE(length == bytes.size() - kContainerHeaderSize,
                   ErrorCode::kCorruption, "payload length ", length,
                   " does not match the ", bytes.size() - kContainerHeaderSize,
                   " bytes present (truncated?)");
    const std::string_view payload = bytes.substr(kContainerHeaderSize);

    std::size_t pos = 0;
    bool ended = false;
    std::size_t blob_bytes = 0;
    while (pos < payload.size()) {
      const std::size_t nl = payload.find('\n', pos);
      ARTREC_REQUIRE(nl != std::string_view::npos, ErrorCode::kCorruption,
                     "unterminated metadata block");
      const std::string line(payload.substr(pos, nl - pos));
      pos = nl + 1;
      if (line == "end") {
        ended = true;
        break;
      }
      const std::size_t sp = line.find(' ');
      ARTREC_REQUIRE(sp != std::string::npos, ErrorCode::kCorruption,
                     "malformed metadata line '", line, "'");
      const std::string key = line.substr(0, sp), value = line.substr(sp + 1);
      if (key == "array") {
        std::istringstream is(value);
        ArrayInfo info;
        ARTREC_REQUIRE(static_cast<bool>(is >> info.name >> info.rows >> info.cols) &&
                           info.rows >= 0 && info.cols >= 0,
                       ErrorCode::kCorruption, "malformed array line '", line, "'");
        info.offset = blob_bytes;
        blob_bytes += static_cast<std::size_t>(info.rows * info.cols) * sizeof(double);
        arrays_.push_back(info);
      } else {
        fields_.emplace_back(key, value);
      }
    }
    ARTREC_REQUIRE(ended, ErrorCode::kCorruption, "metadata block has no end marker");
    blob_ = payload.substr(pos);
    ARTREC_REQUIRE(blob_.size() == blob_bytes, ErrorCode::kCorruption,
                   "array data is ", blob_.size(), " bytes, metadata declares ",
                   blob_bytes);
  }

  std::string Get(const std::string &key) const {
    for (const auto &[k, v] : fields_)
      if (k == key) return v;
    artrec::internal::Fail(ErrorCode::kCorruption, "missing metadata field '", key, "'");
  }

  std::vector<std::string> GetAll(const std::string &key) const {
    std::vector<std::string> out;
    for (const auto &[k, v] : fields_)
      if (k == key) out.push_back(v);
    return out;
  }

  long long GetInt(const std::string &key) const {
    const std::string v = Get(key);
    try {
      std::size_t used = 0;
      const long long x = std::stoll(v, &used);
      if (used == v.size()) return x;
    } catch (const std::exception &) {
    }
    artrec::internal::Fail(ErrorCode::kCorruption, "field '", key, "' is not an integer");
  }

  std::uint64_t GetU64(const std::string &key) const {
    const std::string v = Get(key);
    try {
      std::size_t used = 0;
      const unsigned long long x = std::stoull(v, &used);
      if (used == v.size()) return x;
    } catch (const std::exception &) {
    }
    artrec::internal::Fail(ErrorCode::kCorruption, "field '", key, "' is not an integer");
  }

  Matrix GetMatrix(const std::string &name, Eigen::Index rows, Eigen::Index cols) const {
    for (const auto &a : arrays_) {
      if (a.name != name) continue;
      ARTREC_REQUIRE(a.rows == rows && a.cols == cols, ErrorCode::kCorruption,
                     "array '", name, "' is ", a.rows, "x", a.cols,
                     ", expected ", rows, "x", cols);
      Matrix m(rows, cols);
      std::memcpy(m.data(), blob_.data() + a.offset,
                  static_cast<std::size_t>(rows * cols) * sizeof(double));
      return m;
    }
    artrec::internal::Fail(ErrorCode::kCorruption, "missing array '", name, "'");
  }

  Vector GetVector(const std::string &name, Eigen::Index size) const {
    return GetMatrix(name, size, 1).col(0);
  }

 private:
  struct ArrayInfo {
    std::string name;
    Eigen::Index rows = 0, cols = 0;
    std::size_t offset = 0;
  };
  std::vector<std::pair<std::string, std::string>> fields_;
  std::vector<ArrayInfo> arrays_;
  std::string_view blob_;
};

inline void RequirePositive(long long v, const char *what) {
  ARTREC_REQUIRE(v > 0 && v < (1LL << 31), ErrorCode::kCorruption, "field '",
                 what, "' has implausible value ", v);
}

}  // namespace internal

// --- DiagGmm ---------------------------------------------------------------

inline std::string Serialize(const ubm::DiagGmm &gmm) {
  internal::ContainerWriter w;
  w.Field("components", gmm.NumComponents());
  w.Field("dim", gmm.Dim());
  w.Array("weights", gmm.weights());
  w.Array("means", gmm.means());
  w.Array("variances", gmm.variances());
  return w.Finish(ModelKind::kDiagGmm);
}

// --- TotalVariabilityModel --------------------------------------------------

inline std::string Serialize(const tvspace::TotalVariabilityModel &tv) {
  tv.Validate();
  internal::CheckToken(tv.ubm_ref);
  internal::ContainerWriter w;
  w.Field("components", tv.num_components);
  w.Field("dim", tv.dim);
  w.Field("rank", tv.Rank());
  w.Field("ubm_ref", tv.ubm_ref);
  w.Array("t", tv.t);
  return w.Finish(ModelKind::kTotalVariability);
}

// --- ConvNet ----------------------------------------------------------------

inline std::string Serialize(const deepnet::ConvNet &net) {
  net.Validate();
  internal::ContainerWriter w;
  w.Field("classes", net.n_classes);
  w.Field("input_rows", net.config.input_rows);
  w.Field("input_cols", net.config.input_cols);
  std::ostringstream ch;
  for (int l = 0; l < deepnet::kNumConv; ++l) ch << (l ? " " : "") << net.config.channels[l];
  w.Field("channels", ch.str());
  w.Field("batch_size", net.config.batch_size);
  w.Field("epochs", net.config.epochs);
  w.Field("seed", net.config.seed);
  Vector scalars(4);
  scalars << net.config.learning_rate, net.config.momentum, net.input_mean,
      net.input_scale;
  w.Array("scalars", scalars);
  net.params.ForEachTensor([&w](const std::string &name, std::span<const double> s) {
    w.Array(name, s.data(), static_cast<Eigen::Index>(s.size()), 1);
  });
  return w.Finish(ModelKind::kConvNet);
}

// --- PldaModel --------------------------------------------------------------

inline std::string Serialize(const backend::PldaModel &plda) {
  internal::ContainerWriter w;
  w.Field("dim", plda.Dim());
  w.Field("reduced_dim", plda.ReducedDim());
  w.Array("mean", plda.mean());
  w.Array("whitener", plda.whitener());
  w.Array("offset", plda.offset());
  w.Array("between", plda.between());
  w.Array("within", plda.within());
  return w.Finish(ModelKind::kPlda);
}

// --- ArtistModel set --------------------------------------------------------

inline std::string Serialize(const ArtistModelSet &models) {
  internal::ContainerWriter w;
  const Eigen::Index dim = models.empty() ? 0 : models[0].vector.dim();
  w.Field("count", models.size());
  w.Field("dim", dim);
  Matrix values(dim, static_cast<Eigen::Index>(models.size()));
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto &m = models[i];
    internal::CheckToken(m.artist_id);
    ARTREC_REQUIRE(m.vector.dim() == dim, ErrorCode::kShape,
                   "artist models have different dims");
    w.Field("model", m.artist_id + " " + std::to_string(m.n_enrolled) + " " +
                         EmbeddingKindName(m.vector.kind));
    values.col(static_cast<Eigen::Index>(i)) = m.vector.values;
  }
  w.Array("vectors", values);
  return w.Finish(ModelKind::kArtistModels);
}

// --- EmbeddingSet -----------------------------------------------------------

inline std::string Serialize(const EmbeddingSet &set) {
  ARTREC_REQUIRE(set.vectors.size() == set.labels.size(), ErrorCode::kShape,
                 "embedding set has ", set.vectors.size(), " vectors but ",
                 set.labels.size(), " labels");
  internal::ContainerWriter w;
  const Eigen::Index dim = set.vectors.empty() ? 0 : set.vectors[0].dim();
  w.Field("count", set.vectors.size());
  w.Field("dim", dim);
  Matrix values(dim, static_cast<Eigen::Index>(set.vectors.size()));
  for (std::size_t i = 0; i < set.vectors.size(); ++i) {
    const auto &v = set.vectors[i];
    internal::CheckToken(v.track_id);
    internal::CheckToken(set.labels[i]);
    ARTREC_REQUIRE(v.dim() == dim, ErrorCode::kShape,
                   "embeddings have different dims");
    w.Field("item", v.track_id + " " + EmbeddingKindName(v.kind) + " " + set.labels[i]);
    values.col(static_cast<Eigen::Index>(i)) = v.values;
  }
  w.Array("vectors", values);
  return w.Finish(ModelKind::kEmbeddings);
}

template <typename T>
T Deserialize(std::string_view bytes);

template <>
inline ubm::DiagGmm Deserialize<ubm::DiagGmm>(std::string_view bytes) {
  const internal::ContainerReader r(bytes, ModelKind::kDiagGmm);
  const long long c = r.GetInt("components"), d = r.GetInt("dim");
  internal::RequirePositive(c, "components");
  internal::RequirePositive(d, "dim");
  try {
    return ubm::DiagGmm(r.GetVector("weights", c), r.GetMatrix("means", c, d),
                        r.GetMatrix("variances", c, d));
  } catch (const Error &e) {
    if (e.code() == ErrorCode::kCorruption) throw;
    artrec::internal::Fail(ErrorCode::kCorruption, "inconsistent GMM: ", e.what());
  }
}

template <>
inline tvspace::TotalVariabilityModel Deserialize<tvspace::TotalVariabilityModel>(
    std::string_view bytes) {
  const internal::ContainerReader r(bytes, ModelKind::kTotalVariability);
  tvspace::TotalVariabilityModel tv;
  const long long c = r.GetInt("components"), d = r.GetInt("dim"),
                  rank = r.GetInt("rank");
  internal::RequirePositive(c, "components");
  internal::RequirePositive(d, "dim");
  internal::RequirePositive(rank, "rank");
  tv.num_components = static_cast<int>(c);
  tv.dim = static_cast<int>(d);
  tv.ubm_ref = r.Get("ubm_ref");
  tv.t = r.GetMatrix("t", c * d, rank);
  try {
    tv.Validate();
  } catch (const Error &e) {
    artrec::internal::Fail(ErrorCode::kCorruption, "inconsistent T matrix: ", e.what());
  }
  return tv;
}

template <>
inline deepnet::ConvNet Deserialize<deepnet::ConvNet>(std::string_view bytes) {
  const internal::ContainerReader r(bytes, ModelKind::kConvNet);
  deepnet::ConvNet net;
  net.n_classes = static_cast<int>(r.GetInt("classes"));
  net.config.input_rows = static_cast<int>(r.GetInt("input_rows"));
  net.config.input_cols = static_cast<int>(r.GetInt("input_cols"));
  {
    std::istringstream is(r.Get("channels"));
    for (int l = 0; l < deepnet::kNumConv; ++l)
      ARTREC_REQUIRE(static_cast<bool>(is >> net.config.channels[l]) &&
                         net.config.channels[l] > 0 && net.config.channels[l] < 65536,
                     ErrorCode::kCorruption, "malformed channel list");
  }
  net.config.batch_size = static_cast<int>(r.GetInt("batch_size"));
  net.config.epochs = static_cast<int>(r.GetInt("epochs"));
  net.config.seed = r.GetU64("seed");
  internal::RequirePositive(net.n_classes, "classes");
  const Vector scalars = r.GetVector("scalars", 4);
  net.config.learning_rate = scalars(0);
  net.config.momentum = scalars(1);
  net.input_mean = scalars(2);
  net.input_scale = scalars(3);

  // Shapes follow from the config; allocate, then fill tensor by tensor.
  int c_in = 1;
  for (int l = 0; l < deepnet::kNumConv; ++l) {
    net.params.conv_w[l].resize(net.config.channels[l], c_in * deepnet::kKernelArea);
    net.params.conv_b[l].resize(net.config.channels[l]);
    c_in = net.config.channels[l];
  }
  net.params.fc_w.resize(deepnet::kHiddenWidth, c_in);
  net.params.fc_b.resize(deepnet::kHiddenWidth);
  net.params.out_w.resize(net.n_classes, deepnet::kHiddenWidth);
  net.params.out_b.resize(net.n_classes);
  net.params.ForEachTensor([&r](const std::string &name, std::span<double> s) {
    const Vector v = r.GetVector(name, static_cast<Eigen::Index>(s.size()));
    std::copy(v.data(), v.data() + v.size(), s.begin());
  });
  try {
    net.Validate();
  } catch (const Error &e) {
    artrec::internal::Fail(ErrorCode::kCorruption, "inconsistent network: ", e.what());
  }
  return net;
}

template <>
inline backend::PldaModel Deserialize<backend::PldaModel>(std::string_view bytes) {
  const internal::ContainerReader r(bytes, ModelKind::kPlda);
  const long long p = r.GetInt("dim"), q = r.GetInt("reduced_dim");
  internal::RequirePositive(p, "dim");
  internal::RequirePositive(q, "reduced_dim");
  try {
    return backend::PldaModel(r.GetVector("mean", p), r.GetMatrix("whitener", q, p),
                              r.GetVector("offset", q), r.GetMatrix("between", q, q),
                              r.GetMatrix("within", q, q));
  } catch (const Error &e) {
    if (e.code() == ErrorCode::kCorruption) throw;
    artrec::internal::Fail(ErrorCode::kCorruption, "inconsistent PLDA model: ", e.what());
  }
}

template <>
inline ArtistModelSet Deserialize<ArtistModelSet>(std::string_view bytes) {
  const internal::ContainerReader r(bytes, ModelKind::kArtistModels);
  const long long count = r.GetInt("count"), dim = r.GetInt("dim");
  const auto lines = r.GetAll("model");
  ARTREC_REQUIRE(count >= 0 && dim >= 0 && static_cast<long long>(lines.size()) == count,
                 ErrorCode::kCorruption, "model count ", count, " does not match ",
                 lines.size(), " model lines");
  const Matrix values = r.GetMatrix("vectors", dim, count);
  ArtistModelSet out;
  for (long long i = 0; i < count; ++i) {
    std::istringstream is(lines[static_cast<std::size_t>(i)]);
    backend::ArtistModel m;
    std::string kind;
    ARTREC_REQUIRE(static_cast<bool>(is >> m.artist_id >> m.n_enrolled >> kind) &&
                       m.n_enrolled >= 1,
                   ErrorCode::kCorruption, "malformed model line");
    try {
      m.vector = EmbeddingVector{values.col(i), ParseEmbeddingKind(kind), m.artist_id};
    } catch (const Error &) {
      artrec::internal::Fail(ErrorCode::kCorruption, "unknown embedding kind '", kind, "'");
    }
    out.push_back(std::move(m));
  }
  return out;
}

template <>
inline EmbeddingSet Deserialize<EmbeddingSet>(std::string_view bytes) {
  const internal::ContainerReader r(bytes, ModelKind::kEmbeddings);
  const long long count = r.GetInt("count"), dim = r.GetInt("dim");
  const auto lines = r.GetAll("item");
  ARTREC_REQUIRE(count >= 0 && dim >= 0 && static_cast<long long>(lines.size()) == count,
                 ErrorCode::kCorruption, "item count ", count, " does not match ",
                 lines.size(), " item lines");
  const Matrix values = r.GetMatrix("vectors", dim, count);
  EmbeddingSet out;
  for (long long i = 0; i < count; ++i) {
    std::istringstream is(lines[static_cast<std::size_t>(i)]);
    std::string track, kind, label;
    ARTREC_REQUIRE(static_cast<bool>(is >> track >> kind >> label),
                   ErrorCode::kCorruption, "malformed item line");
    EmbeddingKind k;
    try {
      k = ParseEmbeddingKind(kind);
    } catch (const Error &) {
      artrec::internal::Fail(ErrorCode::kCorruption, "unknown embedding kind '", kind, "'");
    }
    out.vectors.push_back(EmbeddingVector{values.col(i), k, track});
    out.labels.push_back(label);
  }
  return out;
}

template <typename T>
void SaveModel(const std::string &path, const T &model) {
  internal::WriteFile(path, Serialize(model));
}

template <typename T>
T LoadModel(const std::string &path) {
  return Deserialize<T>(internal::ReadFile(path));
}

}  // namespace corpus
}  // namespace artrec
