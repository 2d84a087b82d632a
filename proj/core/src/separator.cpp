#include "scnet/separator.hpp"

#include <string>

#include "scnet/fft.hpp"
#include "scnet/ops.hpp"

namespace scnet {

namespace {

void check_rank4(const TensorPtr& x, const char* who) {
  if (x->rank() != 4) {
    throw ShapeError(std::string(who) + ": expected rank-4 input, got " +
                     shape_str(x->shape));
  }
}

// Recurrence along dim -2 of [B, A, L, C].
TensorPtr residual_unit(TensorPtr x, const DualPathUnitParams& p, int hidden,
                        int norm_groups) {
  TensorPtr h = group_norm(x, norm_groups, p.gamma, p.beta, 1e-5);
  h = bilstm(h, p.lstm, hidden);
  h = linear(h, p.w_out, p.b_out);
  return add(x, h);
}

}  // namespace

void DualPathConfig::validate() const {
  if (n_layers <= 0 || n_layers % 2 != 0) {
    throw ConfigError("DualPathConfig.n_layers must be a positive even count, got " +
                      std::to_string(n_layers));
  }
  if (hidden_odd <= 0) {
    throw ConfigError("DualPathConfig.hidden_odd must be positive, got " +
                      std::to_string(hidden_odd));
  }
  if (hidden_even != 2 * hidden_odd) {
    throw ConfigError("DualPathConfig.hidden_even must equal 2*hidden_odd (" +
                      std::to_string(2 * hidden_odd) + "), got " +
                      std::to_string(hidden_even));
  }
  if (channels <= 0) {
    throw ConfigError("DualPathConfig.channels must be positive, got " +
                      std::to_string(channels));
  }
  if (norm_groups <= 0 || channels % norm_groups != 0) {
    throw ConfigError("DualPathConfig.norm_groups must divide channels, got groups " +
                      std::to_string(norm_groups) + " for " + std::to_string(channels) +
                      " channels");
  }
}

TensorPtr dual_path_layer_forward(TensorPtr x, const DualPathLayerParams& params,
                                  int hidden, int norm_groups) {
  check_rank4(x, "dual_path_layer_forward");
  TensorPtr h = residual_unit(std::move(x), params.time_unit, hidden, norm_groups);
  h = permute(h, {0, 2, 1, 3});
  h = residual_unit(h, params.freq_unit, hidden, norm_groups);
  return permute(h, {0, 2, 1, 3});
}

TensorPtr time_rfft_convert(TensorPtr x) {
  check_rank4(x, "time_rfft_convert");
  if (x->dim(2) < 2) {
    throw DimensionError("time_rfft_convert: time axis must have at least 2 frames, got " +
                         std::to_string(x->dim(2)));
  }
  auto [re, im] = rfft_axis(x, 2);
  return concat_axis({re, im}, 3);
}

TensorPtr time_irfft_convert(TensorPtr x, std::int64_t t_out) {
  check_rank4(x, "time_irfft_convert");
  if (x->dim(3) % 2 != 0) {
    throw ShapeError("time_irfft_convert: feature axis must split into halves, got " +
                     std::to_string(x->dim(3)));
  }
  if (t_out < 2 || x->dim(2) != t_out / 2 + 1) {
    throw DimensionError("time_irfft_convert: " + std::to_string(x->dim(2)) +
                         " spectrum frames cannot restore " + std::to_string(t_out) +
                         " time frames (need " + std::to_string(t_out / 2 + 1) + ")");
  }
  const std::int64_t c = x->dim(3) / 2;
  TensorPtr re = slice_axis(x, 3, 0, c);
  TensorPtr im = slice_axis(x, 3, c, c);
  return irfft_axis(re, im, 2, t_out);
}

TensorPtr separator_forward(TensorPtr latent, const DualPathConfig& cfg,
                            const SeparatorParams& params) {
  cfg.validate();
  check_rank4(latent, "separator_forward");
  if (latent->dim(3) != cfg.channels) {
    throw ShapeError("separator_forward: input has " + std::to_string(latent->dim(3)) +
                     " channels, config expects " + std::to_string(cfg.channels));
  }
  if (latent->dim(2) < 2) {
    throw DimensionError("separator_forward: need at least 2 time frames, got " +
                         std::to_string(latent->dim(2)));
  }
  if (params.layers.size() != static_cast<std::size_t>(cfg.n_layers)) {
    throw ShapeError("separator_forward: config declares " + std::to_string(cfg.n_layers) +
                     " layers, params carry " + std::to_string(params.layers.size()));
  }

  const std::int64_t t = latent->dim(2);
  TensorPtr h = std::move(latent);
  for (int i = 0; i < cfg.n_layers; ++i) {
    if (i % 2 == 0) {
      h = dual_path_layer_forward(h, params.layers[i], cfg.hidden_odd, cfg.norm_groups);
      h = time_rfft_convert(h);
    } else {
      h = dual_path_layer_forward(h, params.layers[i], cfg.hidden_even, cfg.norm_groups);
      h = time_irfft_convert(h, t);
    }
  }
  return h;
}

}  // namespace scnet
