#include "scnet/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

namespace scnet {

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto d : shape) {
    if (d < 0) throw ShapeError("negative extent in shape " + shape_str(shape));
    n *= d;
  }
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

int normalize_axis(int axis, int rank) {
  const int a = axis < 0 ? axis + rank : axis;
  if (a < 0 || a >= rank) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for rank " +
                     std::to_string(rank));
  }
  return a;
}

TensorPtr Tensor::create(Shape shape, bool requires_grad) {
  auto t = std::make_shared<Tensor>();
  const std::int64_t n = shape_numel(shape);
  t->shape = std::move(shape);
  t->data.assign(static_cast<std::size_t>(n), 0.0);
  t->requires_grad = requires_grad;
  return t;
}

TensorPtr Tensor::from_data(Shape shape, std::vector<double> values,
                            bool requires_grad) {
  const std::int64_t n = shape_numel(shape);
  if (n != static_cast<std::int64_t>(values.size())) {
    throw ShapeError("data of " + std::to_string(values.size()) +
                     " values does not fill shape " + shape_str(shape));
  }
  auto t = std::make_shared<Tensor>();
  t->shape = std::move(shape);
  t->data = std::move(values);
  t->requires_grad = requires_grad;
  return t;
}

TensorPtr Tensor::zeros(Shape shape) { return create(std::move(shape)); }

TensorPtr Tensor::full(Shape shape, double value) {
  auto t = create(std::move(shape));
  for (auto& v : t->data) v = value;
  return t;
}

TensorPtr Tensor::scalar(double value) { return from_data({}, {value}); }

std::int64_t Tensor::dim(int axis) const {
  return shape[static_cast<std::size_t>(normalize_axis(axis, rank()))];
}

double Tensor::value() const {
  if (numel() != 1) {
    throw ShapeError("value() on tensor of shape " + shape_str(shape));
  }
  return data[0];
}

void Tensor::ensure_grad() {
  if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}

void Tensor::zero_grad() {
  if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
}

void Tensor::detach_() {
  parents.clear();
  backward_fn = nullptr;
  requires_grad = false;
}

void Tensor::backward() {
  if (numel() != 1) {
    throw ShapeError("backward() requires a one-element tensor, got " +
                     shape_str(shape));
  }
  // Iterative post-order DFS so deep graphs (recurrences) cannot overflow
  // the call stack.
  std::vector<Tensor*> order;
  std::unordered_set<Tensor*> seen;
  std::vector<std::pair<Tensor*, std::size_t>> stack;
  stack.emplace_back(this, 0);
  seen.insert(this);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Tensor* p = node->parents[next].get();
      ++next;
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  for (Tensor* t : order) t->ensure_grad();
  grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Tensor* t = *it;
    if (t->backward_fn) {
      t->backward_fn();
      for (const auto& p : t->parents) {
        if (p->requires_grad) check_finite(p->grad, "backward");
      }
    }
  }
}

void check_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw NumericError(std::string("non-finite value produced by ") + what);
    }
  }
}

void check_finite(const Tensor& t, const char* what) {
  check_finite(t.data, what);
}

}  // namespace scnet
