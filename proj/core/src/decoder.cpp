#include "scnet/decoder.hpp"

#include <set>

#include "scnet/ops.hpp"

namespace scnet {

namespace {

void check_rank4(const TensorPtr& x, const char* who) {
  if (x->rank() != 4) {
    throw ShapeError(std::string(who) + ": expected rank-4 input, got " +
                     shape_str(x->shape));
  }
}

}  // namespace

TensorPtr fusion_forward(TensorPtr skip, TensorPtr up, const FusionParams& params) {
  check_rank4(skip, "fusion_forward");
  if (skip->shape != up->shape) {
    throw ShapeError("fusion_forward: skip " + shape_str(skip->shape) +
                     " and up-sampled " + shape_str(up->shape) + " shapes differ");
  }
  const std::int64_t c = skip->dim(3);
  if (params.kernel->rank() != 4 || params.kernel->dim(2) != 2 * c ||
      params.kernel->dim(3) != 2 * c) {
    throw ShapeError("fusion_forward: kernel " + shape_str(params.kernel->shape) +
                     " does not map " + std::to_string(2 * c) + " -> " +
                     std::to_string(2 * c) + " features");
  }
  TensorPtr s = add(std::move(skip), std::move(up));
  TensorPtr d = concat_axis({s, s}, 3);
  d = conv2d_same(d, params.kernel);
  d = add_channel(d, params.bias);
  return glu(d);
}

TensorPtr su_layer_forward(TensorPtr x, const BandPlan& plan,
                           const SuLayerParams& params, std::int64_t c_target) {
  check_rank4(x, "su_layer_forward");
  if (x->dim(1) != plan.total_out_width) {
    throw DimensionError("su_layer_forward: input has " + std::to_string(x->dim(1)) +
                         " frequency bins, plan expects " +
                         std::to_string(plan.total_out_width));
  }

  TensorPtr h = permute(x, {0, 2, 1, 3});  // [B, T, F_out, C_in]
  std::vector<TensorPtr> outs;
  std::int64_t offset = 0;
  for (int i = 0; i < 3; ++i) {
    const BandExtent& band = plan.bands[i];
    const TensorPtr& kernel = params.bands[i].kernel;
    const int stride = static_cast<int>(kernel->dim(0));
    if (kernel->dim(1) != c_target) {
      throw ShapeError("su_layer_forward: band " + std::to_string(i) + " kernel emits " +
                       std::to_string(kernel->dim(1)) + " channels, expected " +
                       std::to_string(c_target));
    }
    TensorPtr slice = slice_axis(h, 2, offset, band.out_width);
    offset += band.out_width;
    TensorPtr wide = conv1d_transposed(slice, kernel, stride, band.width);
    outs.push_back(add_channel(wide, params.bands[i].bias));
  }
  TensorPtr joined = concat_axis(outs, 2);
  return permute(joined, {0, 2, 1, 3});
}

void DecoderConfig::validate() const {
  if (sources.empty()) {
    throw ConfigError("DecoderConfig.sources must name at least one source");
  }
  std::set<std::string> seen;
  for (const std::string& s : sources) {
    if (s.empty()) throw ConfigError("DecoderConfig.sources contains an empty name");
    if (!seen.insert(s).second) {
      throw ConfigError("DecoderConfig.sources contains a duplicate name: " + s);
    }
  }
  if (features_per_source <= 0) {
    throw ConfigError("DecoderConfig.features_per_source must be positive, got " +
                      std::to_string(features_per_source));
  }
}

std::vector<TensorPtr> decoder_forward(TensorPtr latent,
                                       const std::vector<TensorPtr>& skips,
                                       const std::vector<BandPlan>& plans,
                                       const DecoderConfig& cfg,
                                       const DecoderParams& params) {
  cfg.validate();
  check_rank4(latent, "decoder_forward");
  if (skips.size() != 3 || plans.size() != 3) {
    throw DimensionError("decoder_forward: expected 3 skips and 3 band plans, got " +
                         std::to_string(skips.size()) + " and " +
                         std::to_string(plans.size()));
  }

  TensorPtr h = std::move(latent);
  for (int stage = 0; stage < 2; ++stage) {
    const int plan_idx = 2 - stage;
    const std::int64_t c_target = skips[plan_idx]->dim(3);
    h = su_layer_forward(h, plans[plan_idx], params.su[stage], c_target);
    h = fusion_forward(skips[plan_idx], h, params.fusion[stage]);
  }

  const std::int64_t n_sources = static_cast<std::int64_t>(cfg.sources.size());
  const std::int64_t c_bottom = n_sources * cfg.features_per_source;
  h = su_layer_forward(h, plans[0], params.su[2], c_bottom);

  std::vector<TensorPtr> per_source;
  for (std::int64_t s = 0; s < n_sources; ++s) {
    per_source.push_back(
        slice_axis(h, 3, s * cfg.features_per_source, cfg.features_per_source));
  }
  return per_source;
}

}  // namespace scnet
