// artrec/corpus/wav.hpp

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

// RIFF/WAVE PCM16 mono 16 kHz reader and writer.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "artrec/dsp.hpp"
#include "artrec/error.hpp"

namespace artrec {
namespace corpus {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

namespace internal {

inline std::uint32_t ReadU32(const unsigned char *p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}
inline std::uint16_t ReadU16(const unsigned char *p) {
  std::uint16_t v;
  std::memcpy(&v, p, 2);
  return v;
}
template <typename T>
void Append(std::string &out, T v) {
  out.append(reinterpret_cast<const char *>(&v), sizeof(T));
}

inline std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  ARTREC_REQUIRE(in.good(), ErrorCode::kIo, "file not found or unreadable: ", path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void WriteFile(const std::string &path, const std::string &bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  ARTREC_REQUIRE(out.good(), ErrorCode::kIo, "cannot open for writing: ", path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  ARTREC_REQUIRE(out.good(), ErrorCode::kIo, "write failed: ", path);
}

}  // namespace internal

inline dsp::AudioClip ParseWav(const std::string &bytes, const std::string &id) {
  const auto *p = reinterpret_cast<const unsigned char *>(bytes.data());
  const std::size_t n = bytes.size();
  ARTREC_REQUIRE(n >= 12 && std::memcmp(p, "RIFF", 4) == 0 &&
                     std::memcmp(p + 8, "WAVE", 4) == 0,
                 ErrorCode::kFormat, "'", id, "': header is not RIFF/WAVE");
  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= n) {
    const std::uint32_t size = internal::ReadU32(p + pos + 4);
    const unsigned char *body = p + pos + 8;
    ARTREC_REQUIRE(pos + 8 + size <= n, ErrorCode::kFormat, "'", id,
                   "': chunk size runs past end of file");
    if (std::memcmp(p + pos, "fmt ", 4) == 0) {
      ARTREC_REQUIRE(size >= 16, ErrorCode::kFormat, "'", id,
                     "': fmt chunk too short");
      format = internal::ReadU16(body);
      channels = internal::ReadU16(body + 2);
      rate = internal::ReadU32(body + 4);
      bits = internal::ReadU16(body + 14);
      have_fmt = true;
    } else if (std::memcmp(p + pos, "data", 4) == 0) {
      ARTREC_REQUIRE(have_fmt, ErrorCode::kFormat, "'", id,
                     "': data chunk before fmt chunk");
      ARTREC_REQUIRE(format == 1, ErrorCode::kFormat, "'", id,
                     "': audio format ", format, " is not PCM");
      ARTREC_REQUIRE(channels == 1, ErrorCode::kFormat, "'", id,
                     "': channel count ", channels, " is not mono");
      ARTREC_REQUIRE(bits == 16, ErrorCode::kFormat, "'", id, "': bit depth ",
                     bits, " is not 16");
      ARTREC_REQUIRE(rate == static_cast<std::uint32_t>(dsp::kSampleRate),
                     ErrorCode::kFormat, "'", id, "': sample rate ", rate,
                     " is not ", dsp::kSampleRate);
      ARTREC_REQUIRE(size % 2 == 0, ErrorCode::kFormat, "'", id,
                     "': data size is not a whole number of samples");
      dsp::AudioClip clip;
      clip.id = id;
      clip.samples.resize(size / 2);
      for (std::size_t i = 0; i < clip.samples.size(); ++i) {
        std::int16_t s;
        std::memcpy(&s, body + 2 * i, 2);
        clip.samples[i] = static_cast<double>(s) / 32768.0;
      }
      return clip;
    }
    pos += 8 + size + (size & 1);
  }
  artrec::internal::Fail(ErrorCode::kFormat, "'", id, "': no data chunk");
}

inline dsp::AudioClip LoadWav(const std::string &path, const std::string &id = "") {
  return ParseWav(internal::ReadFile(path), id.empty() ? path : id);
}

/// Quantizes to PCM16 (round to nearest, clamped to [-32768, 32767]).
inline std::string EncodeWav(const dsp::AudioClip &clip) {
  ARTREC_REQUIRE(clip.sample_rate == dsp::kSampleRate, ErrorCode::kConfig,
                 "can only write ", dsp::kSampleRate, " Hz audio");
  const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  internal::Append<std::uint32_t>(out, 36 + data_bytes);
  out += "WAVEfmt ";
  internal::Append<std::uint32_t>(out, 16);
  internal::Append<std::uint16_t>(out, 1);
  internal::Append<std::uint16_t>(out, 1);
  internal::Append<std::uint32_t>(out, dsp::kSampleRate);
  internal::Append<std::uint32_t>(out, dsp::kSampleRate * 2);
  internal::Append<std::uint16_t>(out, 2);
  internal::Append<std::uint16_t>(out, 16);
  out += "data";
  internal::Append<std::uint32_t>(out, data_bytes);
  for (double s : clip.samples) {
    const double q = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    internal::Append<std::int16_t>(out, static_cast<std::int16_t>(q));
  }
  return out;
}

inline void WriteWav(const std::string &path, const dsp::AudioClip &clip) {
  internal::WriteFile(path, EncodeWav(clip));
}

}  // namespace corpus
}  // namespace artrec
