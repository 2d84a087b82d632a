#include "scnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "scnet/errors.hpp"
#include "scnet/rng.hpp"

namespace scnet {

GradCheckResult grad_check(const std::function<TensorPtr()>& forward,
                           const std::vector<TensorPtr>& inputs,
                           const GradCheckOptions& opts) {
  // Analytic pass.
  for (auto& t : inputs) {
    t->requires_grad = true;
    t->zero_grad();
  }
  auto loss = forward();
  if (loss->numel() != 1)
    throw ShapeError("grad_check: forward must return a scalar");
  loss->backward();
  std::vector<std::vector<double>> analytic;
  analytic.reserve(inputs.size());
  for (auto& t : inputs) {
    t->ensure_grad();
    analytic.push_back(t->grad);
  }

  // Numeric passes run graph-free.
  for (auto& t : inputs) t->requires_grad = false;

  GradCheckResult res;
  RngState rng(opts.sample_seed);
  for (std::size_t ti = 0; ti < inputs.size(); ++ti) {
    auto& t = inputs[ti];
    const std::int64_t n = t->numel();
    std::vector<std::int64_t> coords;
    if (opts.max_coords_per_input > 0 && n > opts.max_coords_per_input) {
      auto perm = rng.permutation(n);
      coords.assign(perm.begin(),
                    perm.begin() + static_cast<std::size_t>(
                                       opts.max_coords_per_input));
      std::sort(coords.begin(), coords.end());
    } else {
      coords.resize(static_cast<std::size_t>(n));
      for (std::int64_t i = 0; i < n; ++i) coords[static_cast<std::size_t>(i)] = i;
    }
    for (std::int64_t ci : coords) {
      const double saved = t->data[ci];
      t->data[ci] = saved + opts.step;
      const double up = forward()->value();
      t->data[ci] = saved - opts.step;
      const double down = forward()->value();
      t->data[ci] = saved;
      const double numeric = (up - down) / (2.0 * opts.step);
      const double a = analytic[ti][static_cast<std::size_t>(ci)];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      res.checked += 1;
      if (rel > res.worst) {
        res.worst = rel;
        res.worst_where = "input " + std::to_string(ti) + ", coord " +
                          std::to_string(ci);
      }
      if (rel > opts.tolerance) res.ok = false;
    }
  }

  for (auto& t : inputs) {
    t->requires_grad = true;
    t->zero_grad();
  }
  return res;
}

}  // namespace scnet
