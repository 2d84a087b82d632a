#pragma once

#include "scnet/tensor.hpp"

namespace scnet {

// One direction of an LSTM. Gate order along the 4H axis is
// input, forget, cell, output.
struct LstmDirParams {
  TensorPtr w_ih;  // [C, 4H]
  TensorPtr w_hh;  // [H, 4H]
  TensorPtr bias;  // [4H]
};

struct LstmParams {
  LstmDirParams fwd;
  LstmDirParams bwd;
};

// Bidirectional LSTM over the second-to-last axis with zero initial state.
// x: [..., L, C] -> [..., L, 2H], forward direction in channels [0, H) and
// backward in [H, 2H).
TensorPtr bilstm(TensorPtr x, const LstmParams& params, int hidden);

}  // namespace scnet
