#pragma once

#include <utility>
#include <vector>

#include "scnet/tensor.hpp"

namespace scnet {

// Elementwise; shapes must match exactly.
TensorPtr add(TensorPtr a, TensorPtr b);
TensorPtr sub(TensorPtr a, TensorPtr b);
TensorPtr mul(TensorPtr a, TensorPtr b);
TensorPtr scale(TensorPtr x, double factor);

// bias has shape [C] and is broadcast over the last axis of x.
TensorPtr add_channel(TensorPtr x, TensorPtr bias);

// x: [..., Cin], w: [Cin, Cout], b: [Cout] or nullptr.
TensorPtr linear(TensorPtr x, TensorPtr w, TensorPtr b);

TensorPtr sum_all(TensorPtr x);
TensorPtr mean_all(TensorPtr x);

// Activations. glu splits the last axis into equal halves (a, b) and
// returns a * sigmoid(b).
TensorPtr gelu(TensorPtr x);
TensorPtr sigmoid(TensorPtr x);
TensorPtr glu(TensorPtr x);

// Shape plumbing. All of these copy; there are no views.
TensorPtr reshape(TensorPtr x, Shape shape);
TensorPtr permute(TensorPtr x, const std::vector<int>& axes);
TensorPtr slice_axis(TensorPtr x, int axis, std::int64_t start, std::int64_t len);
TensorPtr concat_axis(const std::vector<TensorPtr>& parts, int axis);
TensorPtr pad_axis(TensorPtr x, int axis, std::int64_t left, std::int64_t right);

// Cross-correlation along the second-to-last axis, channels last.
// x: [..., L, Cin], kernel: [K, Cin, Cout]. The input is implicitly extended
// with right_pad zeros; Lout = floor((L + right_pad - K)/stride) + 1.
TensorPtr conv1d_strided(TensorPtr x, TensorPtr kernel, int stride,
                         std::int64_t right_pad);

// Adjoint of conv1d_strided's linear map, cropped to target_len.
// x: [..., Lout, Cout], kernel: [K, Cin, Cout] -> [..., target_len, Cin].
TensorPtr conv1d_transposed(TensorPtr x, TensorPtr kernel, int stride,
                            std::int64_t target_len);

// Same-padded 2-D cross-correlation over the two axes before the channel
// axis. x: [..., H, W, Cin], kernel: [kh, kw, Cin, Cout] with odd kh, kw.
TensorPtr conv2d_same(TensorPtr x, TensorPtr kernel);

// Grouped normalization over the last axis. Statistics are taken per
// (leading index, group) across all interior positions and the group's
// channels, then a per-channel affine is applied.
TensorPtr group_norm(TensorPtr x, int groups, TensorPtr gamma, TensorPtr beta,
                     double eps);

}  // namespace scnet
