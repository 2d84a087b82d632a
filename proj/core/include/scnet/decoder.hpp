#pragma once

#include <array>
#include <string>
#include <vector>

#include "scnet/bandplan.hpp"
#include "scnet/encoder.hpp"
#include "scnet/tensor.hpp"

namespace scnet {

// Skip fusion: s = skip + up, s duplicated along features, 3x3 same-padded
// conv over (F, T) at 2C->2C, then GLU back down to C.
struct FusionParams {
  TensorPtr kernel;  // [3, 3, 2C, 2C]
  TensorPtr bias;    // [2C]
};

TensorPtr fusion_forward(TensorPtr skip, TensorPtr up, const FusionParams& params);

// Per-band transposed convolution undoing an SD layer's geometry; band
// kernels are [stride, C_target, C_in].
struct SuLayerParams {
  std::array<SdBandParams, 3> bands;
};

TensorPtr su_layer_forward(TensorPtr x, const BandPlan& plan,
                           const SuLayerParams& params, std::int64_t c_target);

struct DecoderConfig {
  std::vector<std::string> sources{"drums", "bass", "other", "vocals"};
  int features_per_source = 4;

  void validate() const;
};

// Stages run deep -> shallow: su[0] inverts the deepest band plan and is
// fused with the deepest skip, su[2] restores full resolution and splits
// into per-source spectrograms (no fusion at the bottom).
struct DecoderParams {
  std::array<SuLayerParams, 3> su;
  std::array<FusionParams, 2> fusion;
};

std::vector<TensorPtr> decoder_forward(TensorPtr latent,
                                       const std::vector<TensorPtr>& skips,
                                       const std::vector<BandPlan>& plans,
                                       const DecoderConfig& cfg,
                                       const DecoderParams& params);

}  // namespace scnet
