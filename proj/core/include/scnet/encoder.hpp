#pragma once

#include <array>
#include <utility>
#include <vector>

#include "scnet/bandplan.hpp"
#include "scnet/tensor.hpp"

namespace scnet {

// Residual convolution module applied along the frequency axis of
// [B, F, T, C]: group_norm -> conv k3 C->C/4 -> GELU -> conv k3 -> GELU ->
// conv k1 C/4->C -> + input.
struct ConvModuleParams {
  TensorPtr gamma, beta;  // [C]
  TensorPtr k1, b1;       // [3, C, C/4], [C/4]
  TensorPtr k2, b2;       // [3, C/4, C/4], [C/4]
  TensorPtr k3, b3;       // [1, C/4, C], [C]
};

TensorPtr conv_module_forward(TensorPtr x, const ConvModuleParams& params,
                              int norm_groups);

// One band of the strided down-sampling layer: non-overlapping convolution
// with kernel_size == stride.
struct SdBandParams {
  TensorPtr kernel;  // [stride, C_in, C_out]
  TensorPtr bias;    // [C_out]
};

struct SdLayerParams {
  std::array<SdBandParams, 3> bands;
};

// [B, F_in, T, C_in] -> [B, F_out, T, C_out]: each band sliced, right-padded
// per the plan, convolved along frequency, concatenated low|mid|high, then
// GELU.
TensorPtr sd_layer_forward(TensorPtr x, const BandPlan& plan,
                           const SdLayerParams& params, std::int64_t c_out);

// A full sparse down-sampling block: per-band conv modules at the input
// width, then the SD layer. Returns (downsampled, skip) where skip is the
// full-resolution tensor after the conv modules.
struct SdBlockParams {
  std::array<std::vector<ConvModuleParams>, 3> band_modules;
  SdLayerParams sd;
};

std::pair<TensorPtr, TensorPtr> sd_block_forward(TensorPtr x,
                                                 const BandPlan& plan,
                                                 const SdBlockParams& params,
                                                 std::int64_t c_out,
                                                 int norm_groups);

struct EncoderConfig {
  BandSplitSpec bands;
  std::array<int, 3> channel_ladder{32, 64, 128};
  std::array<int, 3> conv_module_counts{3, 2, 1};  // low, mid, high
  int in_channels = 4;
  int norm_groups = 4;

  void validate() const;
};

struct EncoderParams {
  std::array<SdBlockParams, 3> blocks;
};

struct EncoderOut {
  TensorPtr latent;              // [B, F3, T, ladder[2]]
  std::vector<TensorPtr> skips;  // shallow -> deep
};

// Three SD blocks in sequence; `plans` must hold the per-block BandPlans for
// the cascading frequency widths.
EncoderOut encoder_forward(TensorPtr y, const EncoderConfig& cfg,
                           const EncoderParams& params,
                           const std::vector<BandPlan>& plans);

}  // namespace scnet
