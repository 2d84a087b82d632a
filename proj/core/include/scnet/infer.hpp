#pragma once

#include <vector>

#include "scnet/model.hpp"
#include "scnet/spectral.hpp"

namespace scnet {

// One-shot separation of a whole clip: stft, model forward, per-source
// inverse stft. Outputs keep the input's length and channel count (mono
// inputs are duplicated for the model and averaged back down).
std::vector<AudioBuffer> separate_clip(const Model& model, const AudioBuffer& audio);

// Overlap-add of hop-spaced windows with complementary linear cross-fades in
// each overlap region; the weights sum to one at every sample.
std::vector<double> crossfade_stitch(const std::vector<std::vector<double>>& windows,
                                     std::int64_t hop, std::int64_t total_len);

struct ChunkingConfig {
  double window_seconds = 11.0;
  double overlap = 0.5;  // fraction of the window shared with its neighbor

  void validate() const;
};

// Windowed separation for arbitrarily long audio; per-source outputs match
// the input length exactly.
std::vector<AudioBuffer> separate_long(const Model& model, const AudioBuffer& audio,
                                       const ChunkingConfig& cfg = {});

}  // namespace scnet
