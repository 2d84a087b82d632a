#include <cmath>
#include <string>

#include "scnet/train.hpp"

namespace scnet {

TensorPtr rmse_loss(const std::vector<TensorPtr>& est,
                    const std::vector<TensorPtr>& ref) {
  if (est.empty() || est.size() != ref.size()) {
    throw ShapeError("rmse_loss: got " + std::to_string(est.size()) +
                     " estimates for " + std::to_string(ref.size()) + " references");
  }
  std::int64_t pair_count = 0;
  for (std::size_t s = 0; s < est.size(); ++s) {
    if (est[s]->shape != ref[s]->shape) {
      throw ShapeError("rmse_loss: source " + std::to_string(s) + " shapes differ, " +
                       shape_str(est[s]->shape) + " vs " + shape_str(ref[s]->shape));
    }
    if (est[s]->numel() % 2 != 0) {
      throw ShapeError("rmse_loss: source " + std::to_string(s) +
                       " cannot split into re/im pairs, " + shape_str(est[s]->shape));
    }
    pair_count += est[s]->numel() / 2;
  }

  constexpr double kEps = 1e-8;
  auto out = Tensor::create({1});
  bool needs_grad = false;
  for (const auto& t : est) needs_grad = needs_grad || t->requires_grad;
  for (const auto& t : ref) needs_grad = needs_grad || t->requires_grad;

  double total = 0.0;
  for (std::size_t s = 0; s < est.size(); ++s) {
    const auto& e = est[s]->data;
    const auto& r = ref[s]->data;
    for (std::size_t i = 0; i + 1 < e.size(); i += 2) {
      const double dr = e[i] - r[i];
      const double di = e[i + 1] - r[i + 1];
      total += std::sqrt(dr * dr + di * di + kEps);
    }
  }
  out->data[0] = total / static_cast<double>(pair_count);
  check_finite(out->data, "rmse_loss");

  if (needs_grad) {
    out->requires_grad = true;
    for (const auto& t : est) out->parents.push_back(t);
    for (const auto& t : ref) out->parents.push_back(t);
    Tensor* self = out.get();
    auto est_c = est;
    auto ref_c = ref;
    out->backward_fn = [est_c, ref_c, self, pair_count]() {
      const double g_out = self->grad[0] / static_cast<double>(pair_count);
      for (std::size_t s = 0; s < est_c.size(); ++s) {
        const auto& e = est_c[s]->data;
        const auto& r = ref_c[s]->data;
        const bool ge = est_c[s]->requires_grad;
        const bool gr = ref_c[s]->requires_grad;
        if (!ge && !gr) continue;
        if (ge) est_c[s]->ensure_grad();
        if (gr) ref_c[s]->ensure_grad();
        for (std::size_t i = 0; i + 1 < e.size(); i += 2) {
          const double dr = e[i] - r[i];
          const double di = e[i + 1] - r[i + 1];
          const double root = std::sqrt(dr * dr + di * di + kEps);
          const double gre = g_out * dr / root;
          const double gim = g_out * di / root;
          if (ge) {
            est_c[s]->grad[i] += gre;
            est_c[s]->grad[i + 1] += gim;
          }
          if (gr) {
            ref_c[s]->grad[i] -= gre;
            ref_c[s]->grad[i + 1] -= gim;
          }
        }
      }
    };
  }
  return out;
}

}  // namespace scnet
