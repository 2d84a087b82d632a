#pragma once

#include <vector>

#include "scnet/lstm.hpp"
#include "scnet/tensor.hpp"

namespace scnet {

// One residual recurrent unit: group_norm -> bilstm -> linear 2h->C -> +x.
struct DualPathUnitParams {
  TensorPtr gamma, beta;   // [C]
  LstmParams lstm;
  TensorPtr w_out, b_out;  // [2h, C], [C]
};

// A dual-path layer runs the unit along the time-like axis, then along the
// frequency axis.
struct DualPathLayerParams {
  DualPathUnitParams time_unit;
  DualPathUnitParams freq_unit;
};

struct DualPathConfig {
  int n_layers = 6;
  int hidden_odd = 128;   // layers 1,3,5 (1-based): time-domain passes
  int hidden_even = 256;  // layers 2,4,6: transformed-domain passes at width 2C
  int channels = 128;
  int norm_groups = 4;

  void validate() const;  // throws ConfigError naming the offending field
};

struct SeparatorParams {
  std::vector<DualPathLayerParams> layers;
};

TensorPtr dual_path_layer_forward(TensorPtr x, const DualPathLayerParams& params,
                                  int hidden, int norm_groups);

// [B, F_r, T, C] -> [B, F_r, floor(T/2)+1, 2C]; real parts of the time-axis
// rfft in features [0, C), imaginary parts in [C, 2C).
TensorPtr time_rfft_convert(TensorPtr x);

// Inverse of time_rfft_convert; requires K == floor(t_out/2)+1.
TensorPtr time_irfft_convert(TensorPtr x, std::int64_t t_out);

// Alternates time-domain and transformed-domain dual-path layers with the
// rfft/irfft conversions between them. Shape-preserving.
TensorPtr separator_forward(TensorPtr latent, const DualPathConfig& cfg,
                            const SeparatorParams& params);

}  // namespace scnet
