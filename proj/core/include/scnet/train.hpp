#pragma once

#include <string>
#include <utility>
#include <vector>

#include "scnet/model.hpp"
#include "scnet/rng.hpp"
#include "scnet/spectral.hpp"
#include "scnet/tensor.hpp"

namespace scnet {

// Mean over every re/im pair of sqrt((dr)^2 + (di)^2 + eps); est and ref are
// per-source lists of [B, F, T, 2*channels] tensors.
TensorPtr rmse_loss(const std::vector<TensorPtr>& est,
                    const std::vector<TensorPtr>& ref);

// Aligned stems plus their mixture. `names[i]` labels `stems[i]`.
struct StemSet {
  std::vector<std::string> names;
  std::vector<AudioBuffer> stems;
  AudioBuffer mixture;

  // Throws on structural problems; returns false (without throwing) when the
  // mixture is not the stem sum within 1e-4 relative L2.
  bool validate() const;
};

// Recompute the mixture as the exact stem sum.
void remix_in_place(StemSet& set);

struct TrainConfig {
  double segment_seconds = 11.0;
  double segment_hop_seconds = 1.0;
  double lr = 5e-4;
  int batch_size = 1;
  int steps = 200;
  std::uint64_t seed = 0;
  double scale_min = 0.25;
  double scale_max = 1.25;
  bool remix = true;

  void validate() const;
};

struct SegmentSpan {
  std::int64_t start = 0;   // sample index
  std::int64_t length = 0;  // samples; may run past the track (zero-padded)
};

// Segment starts at 0, hop, 2*hop, ...; a track shorter than one segment
// yields a single zero-padded span.
std::vector<SegmentSpan> segment(std::int64_t track_samples, int sample_rate,
                                 const TrainConfig& cfg);

// Copy `span` out of the track, zero-padding past the end.
StemSet extract_segment(const StemSet& track, const SegmentSpan& span);

// Per source, shuffle stems across batch items independently, then recompute
// mixtures. A batch of one is returned unchanged.
std::vector<StemSet> augment_remix(const std::vector<StemSet>& batch, RngState& rng);

// Scale every stem by an independent uniform gain in [lo, hi).
std::vector<StemSet> augment_scale(const std::vector<StemSet>& batch, RngState& rng,
                                   double lo, double hi);

struct AdamConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::int64_t step = 0;
  std::vector<std::vector<double>> m, v;  // per parameter tensor
};

// Bias-corrected adaptive-moment update over the store's parameters, reading
// each tensor's accumulated gradient. An empty gradient counts as zero.
void adam_step(const std::vector<std::pair<std::string, TensorPtr>>& params,
               AdamState& state, const AdamConfig& cfg);

struct TrainResult {
  std::vector<double> losses;  // one per step
  AdamState adam;
};

// Deterministic toy loop: sample a segment batch, augment, stft, forward,
// rmse loss, backward, adam. Aborts with a NumericError diagnostic if the
// loss ever leaves the finite range. The model must be initialized already.
TrainResult fit_toy(Model& model, const std::vector<StemSet>& tracks,
                    const TrainConfig& cfg);

}  // namespace scnet
