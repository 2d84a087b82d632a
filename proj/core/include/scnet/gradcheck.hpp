#pragma once

#include <functional>
#include <string>
#include <vector>

#include "scnet/tensor.hpp"

namespace scnet {

// Compares analytic gradients against central finite differences for a
// scalar-valued function of the given inputs. `forward` must rebuild the
// graph from the current input data on every call.

struct GradCheckOptions {
  double step = 1e-4;
  double tolerance = 1e-3;
  // When > 0, only this many coordinates per input are probed (deterministic
  // subsample); otherwise every coordinate is checked.
  std::int64_t max_coords_per_input = 0;
  std::uint64_t sample_seed = 17;
};

struct GradCheckResult {
  bool ok = true;
  double worst = 0.0;          // largest relative mismatch seen
  std::string worst_where;     // "input 2, coord 14"
  std::int64_t checked = 0;
};

GradCheckResult grad_check(const std::function<TensorPtr()>& forward,
                           const std::vector<TensorPtr>& inputs,
                           const GradCheckOptions& opts = {});

}  // namespace scnet
