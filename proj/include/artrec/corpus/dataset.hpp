// artrec/corpus/dataset.hpp

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

// Materializes per-track front-end inputs from a manifest: procedurally in
// feature mode, through WAV decoding and the DSP chain in audio mode.

#pragma once

#include <string>
#include <vector>

#include "artrec/corpus/manifest.hpp"
#include "artrec/corpus/synth.hpp"
#include "artrec/corpus/wav.hpp"
#include "artrec/deepnet.hpp"
#include "artrec/dsp.hpp"

namespace artrec {
namespace corpus {

class CorpusData {
 public:
  explicit CorpusData(const CorpusManifest &manifest)
      : manifest_(manifest), world_(MakeWorld(manifest.seed)) {}

  const CorpusManifest &manifest() const { return manifest_; }

  /// Frame-level features for the UBM, CMVN-normalized.
  dsp::FeatureSequence Frames(const TrackEntry &track) const {
    if (manifest_.mode == CorpusMode::kFeature)
      return dsp::Cmvn(SynthFrames(world_, manifest_.synth, track));
    const dsp::AudioClip clip = LoadWav(manifest_.ResolvePath(track), track.track_id);
    return dsp::Cmvn(dsp::Mfcc(clip, dsp::DspConfig::MfccDefaults()));
  }

  /// 128x128 convnet input segments; `max_segments` < 0 means all of them.
  std::vector<dsp::MelSpectrogram> Segments(const ArtistEntry &artist,
                                            const TrackEntry &track,
                                            int max_segments = -1) const {
    std::vector<dsp::MelSpectrogram> out;
    if (manifest_.mode == CorpusMode::kFeature) {
      int n = NumSegments(manifest_.synth);
      if (max_segments >= 0) n = std::min(n, max_segments);
      for (int i = 0; i < n; ++i)
        out.push_back(SynthSegment(world_, track, artist.is_vocal, i));
      return out;
    }
    const dsp::AudioClip clip = LoadWav(manifest_.ResolvePath(track), track.track_id);
    out = deepnet::SegmentClip(clip, dsp::DspConfig::MelDefaults());
    if (max_segments >= 0 && static_cast<int>(out.size()) > max_segments)
      out.resize(max_segments);
    return out;
  }

 private:
  CorpusManifest manifest_;
  FeatureWorld world_;
};

}  // namespace corpus
}  // namespace artrec
