#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "scnet/errors.hpp"

namespace scnet {

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);
int normalize_axis(int axis, int rank);

class Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

// Dense row-major N-d array of doubles with an optional gradient slot.
// Operations on tensors build a DAG of nodes; calling backward() on a scalar
// result runs the recorded closures in reverse topological order and
// accumulates into the .grad of every reachable tensor that requires_grad.
// A tensor whose inputs do not require gradients records nothing, so
// inference runs graph-free.
class Tensor : public std::enable_shared_from_this<Tensor> {
 public:
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // sized like data once touched by a backward pass
  bool requires_grad = false;

  std::vector<TensorPtr> parents;
  std::function<void()> backward_fn;

  static TensorPtr create(Shape shape, bool requires_grad = false);
  static TensorPtr from_data(Shape shape, std::vector<double> values,
                             bool requires_grad = false);
  static TensorPtr zeros(Shape shape);
  static TensorPtr full(Shape shape, double value);
  static TensorPtr scalar(double value);

  std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  std::int64_t dim(int axis) const;

  // Value of a one-element tensor.
  double value() const;

  void ensure_grad();
  void zero_grad();

  // Reverse-mode sweep seeded with d(self)/d(self) = 1. Only valid on
  // one-element tensors (losses).
  void backward();

  // Drops graph edges so the tensor acts as a leaf from here on.
  void detach_();
};

// Hard NaN/Inf guard; every kernel calls this on its output.
void check_finite(const Tensor& t, const char* what);
void check_finite(const std::vector<double>& v, const char* what);

}  // namespace scnet
