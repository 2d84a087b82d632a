#include "scnet/encoder.hpp"

#include <string>

#include "scnet/ops.hpp"

namespace scnet {

namespace {

// Expects x as [B, F, T, C]; returns it with frequency in the conv position,
// [B, T, F, C].
TensorPtr freq_to_conv_axis(TensorPtr x) { return permute(x, {0, 2, 1, 3}); }
TensorPtr conv_axis_to_freq(TensorPtr x) { return permute(x, {0, 2, 1, 3}); }

void check_rank4(const TensorPtr& x, const char* who) {
  if (x->rank() != 4) {
    throw ShapeError(std::string(who) + ": expected a rank-4 [B, F, T, C] input, got " +
                     shape_str(x->shape));
  }
}

}  // namespace

TensorPtr conv_module_forward(TensorPtr x, const ConvModuleParams& params,
                              int norm_groups) {
  check_rank4(x, "conv_module_forward");
  const std::int64_t c = x->dim(3);
  if (params.k1->rank() != 3 || params.k1->dim(1) != c) {
    throw ShapeError("conv_module_forward: first kernel expects " +
                     std::to_string(params.k1->dim(1)) + " input channels, tensor has " +
                     std::to_string(c));
  }

  TensorPtr h = group_norm(x, norm_groups, params.gamma, params.beta, 1e-5);
  h = freq_to_conv_axis(h);
  h = pad_axis(h, 2, 1, 1);
  h = conv1d_strided(h, params.k1, 1, 0);
  h = gelu(add_channel(h, params.b1));
  h = pad_axis(h, 2, 1, 1);
  h = conv1d_strided(h, params.k2, 1, 0);
  h = gelu(add_channel(h, params.b2));
  h = conv1d_strided(h, params.k3, 1, 0);
  h = add_channel(h, params.b3);
  h = conv_axis_to_freq(h);
  return add(x, h);
}

TensorPtr sd_layer_forward(TensorPtr x, const BandPlan& plan,
                           const SdLayerParams& params, std::int64_t c_out) {
  check_rank4(x, "sd_layer_forward");
  if (x->dim(1) != plan.input_width) {
    throw DimensionError("sd_layer_forward: input has " + std::to_string(x->dim(1)) +
                         " frequency bins, plan expects " +
                         std::to_string(plan.input_width));
  }

  TensorPtr h = freq_to_conv_axis(x);  // [B, T, F, C]
  std::vector<TensorPtr> outs;
  for (int i = 0; i < 3; ++i) {
    const BandExtent& band = plan.bands[i];
    const TensorPtr& kernel = params.bands[i].kernel;
    const int stride = static_cast<int>(kernel->dim(0));
    if (kernel->dim(2) != c_out) {
      throw ShapeError("sd_layer_forward: band " + std::to_string(i) + " kernel emits " +
                       std::to_string(kernel->dim(2)) + " channels, expected " +
                       std::to_string(c_out));
    }
    TensorPtr slice = slice_axis(h, 2, band.start, band.width);
    TensorPtr down = conv1d_strided(slice, kernel, stride, band.right_pad);
    if (down->dim(2) != band.out_width) {
      throw DimensionError("sd_layer_forward: band " + std::to_string(i) + " produced " +
                           std::to_string(down->dim(2)) + " bins, plan expects " +
                           std::to_string(band.out_width));
    }
    outs.push_back(add_channel(down, params.bands[i].bias));
  }
  TensorPtr joined = gelu(concat_axis(outs, 2));
  return conv_axis_to_freq(joined);
}

std::pair<TensorPtr, TensorPtr> sd_block_forward(TensorPtr x,
                                                 const BandPlan& plan,
                                                 const SdBlockParams& params,
                                                 std::int64_t c_out,
                                                 int norm_groups) {
  check_rank4(x, "sd_block_forward");
  std::vector<TensorPtr> refined;
  for (int i = 0; i < 3; ++i) {
    const BandExtent& band = plan.bands[i];
    TensorPtr slice = slice_axis(x, 1, band.start, band.width);
    for (const ConvModuleParams& mod : params.band_modules[i]) {
      slice = conv_module_forward(slice, mod, norm_groups);
    }
    refined.push_back(slice);
  }
  TensorPtr skip = concat_axis(refined, 1);
  TensorPtr down = sd_layer_forward(skip, plan, params.sd, c_out);
  return {down, skip};
}

void EncoderConfig::validate() const {
  bands.validate();
  if (in_channels <= 0) {
    throw ConfigError("EncoderConfig.in_channels must be positive, got " +
                      std::to_string(in_channels));
  }
  if (norm_groups <= 0) {
    throw ConfigError("EncoderConfig.norm_groups must be positive, got " +
                      std::to_string(norm_groups));
  }
  const bool has_modules =
      conv_module_counts[0] > 0 || conv_module_counts[1] > 0 || conv_module_counts[2] > 0;
  int prev = in_channels;
  for (int i = 0; i < 3; ++i) {
    if (channel_ladder[i] <= prev && i > 0) {
      throw ConfigError("EncoderConfig.channel_ladder must be strictly increasing, got " +
                        std::to_string(channel_ladder[i]) + " after " + std::to_string(prev));
    }
    if (channel_ladder[i] <= 0) {
      throw ConfigError("EncoderConfig.channel_ladder[" + std::to_string(i) +
                        "] must be positive, got " + std::to_string(channel_ladder[i]));
    }
    if (conv_module_counts[i] < 0) {
      throw ConfigError("EncoderConfig.conv_module_counts[" + std::to_string(i) +
                        "] must be non-negative, got " +
                        std::to_string(conv_module_counts[i]));
    }
    if (i > 0 && conv_module_counts[i] > conv_module_counts[i - 1]) {
      throw ConfigError(
          "EncoderConfig.conv_module_counts must be non-increasing low->high, got " +
          std::to_string(conv_module_counts[i - 1]) + " then " +
          std::to_string(conv_module_counts[i]));
    }
    if (has_modules && (prev % 4 != 0 || prev % norm_groups != 0)) {
      throw ConfigError("EncoderConfig.channel_ladder: block " + std::to_string(i) +
                        " input channels " + std::to_string(prev) +
                        " must be divisible by 4 and by norm_groups");
    }
    prev = channel_ladder[i];
  }
}

EncoderOut encoder_forward(TensorPtr y, const EncoderConfig& cfg,
                           const EncoderParams& params,
                           const std::vector<BandPlan>& plans) {
  check_rank4(y, "encoder_forward");
  cfg.validate();
  if (plans.size() != 3) {
    throw DimensionError("encoder_forward: expected 3 band plans, got " +
                         std::to_string(plans.size()));
  }
  if (y->dim(3) != cfg.in_channels) {
    throw ShapeError("encoder_forward: input has " + std::to_string(y->dim(3)) +
                     " channels, config expects " + std::to_string(cfg.in_channels));
  }

  EncoderOut out;
  TensorPtr h = std::move(y);
  for (int i = 0; i < 3; ++i) {
    auto [down, skip] =
        sd_block_forward(h, plans[i], params.blocks[i], cfg.channel_ladder[i],
                         cfg.norm_groups);
    out.skips.push_back(skip);
    h = down;
  }
  out.latent = h;
  return out;
}

}  // namespace scnet
