#include "scnet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "scnet/errors.hpp"

namespace scnet {
namespace {

// Flattened view of a tensor around one axis: outer * len * inner elements,
// with the axis extent contiguous at stride `inner`.
struct AxisView {
  std::int64_t outer = 1;
  std::int64_t len = 1;
  std::int64_t inner = 1;
};

AxisView axis_view(const Shape& shape, int axis) {
  AxisView v;
  v.len = shape[static_cast<std::size_t>(axis)];
  for (int i = 0; i < axis; ++i) v.outer *= shape[static_cast<std::size_t>(i)];
  for (std::size_t i = static_cast<std::size_t>(axis) + 1; i < shape.size(); ++i)
    v.inner *= shape[i];
  return v;
}

bool any_requires(const std::vector<TensorPtr>& inputs) {
  for (const auto& t : inputs)
    if (t && t->requires_grad) return true;
  return false;
}

TensorPtr make_node(Shape shape, std::vector<TensorPtr> inputs) {
  auto out = Tensor::create(std::move(shape));
  if (any_requires(inputs)) {
    out->requires_grad = true;
    for (auto& t : inputs)
      if (t) out->parents.push_back(t);
  }
  return out;
}

void require_same_shape(const TensorPtr& a, const TensorPtr& b, const char* op) {
  if (a->shape != b->shape)
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a->shape) +
                     " vs " + shape_str(b->shape));
}

}  // namespace

TensorPtr add(TensorPtr a, TensorPtr b) {
  require_same_shape(a, b, "add");
  auto out = make_node(a->shape, {a, b});
  const std::int64_t n = out->numel();
  for (std::int64_t i = 0; i < n; ++i) out->data[i] = a->data[i] + b->data[i];
  check_finite(out->data, "add");
  if (out->requires_grad) {
    Tensor* self = out.get();
    out->backward_fn = [a, b, self, n]() {
      if (a->requires_grad) {
        a->ensure_grad();
        for (std::int64_t i = 0; i < n; ++i) a->grad[i] += self->grad[i];
      }
      if (b->requires_grad) {
        b->ensure_grad();
        for (std::int64_t i = 0; i < n; ++i) b->grad[i] += self->grad[i];
      }
    };
  }
  return out;
}

TensorPtr sub(TensorPtr a, TensorPtr b) {
  require_same_shape(a, b, "sub");
  auto out = make_node(a->shape, {a, b});
  const std::int64_t n = out->numel();
  for (std::int64_t i = 0; i < n; ++i) out->data[i] = a->data[i] - b->data[i];
  check_finite(out->data, "sub");
  if (out->requires_grad) {
    Tensor* self = out.get();
    out->backward_fn = [a, b, self, n]() {
      if (a->requires_grad) {
        a->ensure_grad();
        for (std::int64_t i = 0; i < n; ++i) a->grad[i] += self->grad[i];
      }
      if (b->requires_grad) {
        b->ensure_grad();
        for (std::int64_t i = 0; i < n; ++i) b->grad[i] -= self->grad[i];
      }
    };
  }
  return out;
}

TensorPtr mul(TensorPtr a, TensorPtr b) {
  require_same_shape(a, b, "mul");
  auto out = make_node(a->shape, {a, b});
  const std::int64_t n = out->numel();
  for (std::int64_t i = 0; i < n; ++i) out->data[i] = a->data[i] * b->data[i];
  check_finite(out->data, "mul");
  if (out->requires_grad) {
    Tensor* self = out.get();
    out->backward_fn = [a, b, self, n]() {
      if (a->requires_grad) {
        a->ensure_grad();
        for (std::int64_t i = 0; i < n; ++i)
          a->grad[i] += self->grad[i] * b->data[i];
      }
      if (b->requires_grad) {
        b->ensure_grad();
        for (std::int64_t i = 0; i < n; ++i)
          b->grad[i] += self->grad[i] * a->data[i];
      }
    };
  }
  return out;
}

TensorPtr scale(TensorPtr x, double factor) {
  auto out = make_node(x->shape, {x});
  const std::int64_t n = out->numel();
  for (std::int64_t i = 0; i < n; ++i) out->data[i] = x->data[i] * factor;
  check_finite(out->data, "scale");
  if (out->requires_grad) {
    Tensor* self = out.get();
    out->backward_fn = [x, self, n, factor]() {
      x->ensure_grad();
      for (std::int64_t i = 0; i < n; ++i) x->grad[i] += self->grad[i] * factor;
    };
  }
  return out;
}

TensorPtr add_channel(TensorPtr x, TensorPtr bias) {
  if (bias->rank() != 1 || bias->dim(0) != x->dim(-1))
    throw ShapeError("add_channel: bias " + shape_str(bias->shape) +
                     " does not match channel extent of " + shape_str(x->shape));
  auto out = make_node(x->shape, {x, bias});
  const std::int64_t c = x->dim(-1);
  const std::int64_t rows = x->numel() / c;
  for (std::int64_t r = 0; r < rows; ++r) {
    const double* xr = x->data.data() + r * c;
    double* or_ = out->data.data() + r * c;
    for (std::int64_t j = 0; j < c; ++j) or_[j] = xr[j] + bias->data[j];
  }
  check_finite(out->data, "add_channel");
  if (out->requires_grad) {
    Tensor* self = out.get();
    out->backward_fn = [x, bias, self, rows, c]() {
      if (x->requires_grad) {
        x->ensure_grad();
        const std::int64_t n = rows * c;
        for (std::int64_t i = 0; i < n; ++i) x->grad[i] += self->grad[i];
      }
      if (bias->requires_grad) {
        bias->ensure_grad();
        for (std::int64_t r = 0; r < rows; ++r) {
          const double* gr = self->grad.data() + r * c;
          for (std::int64_t j = 0; j < c; ++j) bias->grad[j] += gr[j];
        }
      }
    };
  }
  return out;
}

TensorPtr linear(TensorPtr x, TensorPtr w, TensorPtr b) {
  if (w->rank() != 2)
    throw ShapeError("linear: weight must be rank 2, got " + shape_str(w->shape));
  const std::int64_t cin = w->dim(0);
  const std::int64_t cout = w->dim(1);
  if (x->dim(-1) != cin)
    throw ShapeError("linear: input channels " + std::to_string(x->dim(-1)) +
                     " do not match weight " + shape_str(w->shape));
  if (b && (b->rank() != 1 || b->dim(0) != cout))
    throw ShapeError("linear: bias must have shape [" + std::to_string(cout) + "]");

  Shape out_shape = x->shape;
  out_shape.back() = cout;
  auto out = make_node(std::move(out_shape), {x, w, b});
  const std::int64_t rows = x->numel() / cin;
  for (std::int64_t r = 0; r < rows; ++r) {
    const double* xr = x->data.data() + r * cin;
    double* or_ = out->data.data() + r * cout;
    if (b)
      for (std::int64_t j = 0; j < cout; ++j) or_[j] = b->data[j];
    for (std::int64_t i = 0; i < cin; ++i) {
      const double xv = xr[i];
      if (xv == 0.0) continue;
      const double* wr = w->data.data() + i * cout;
      for (std::int64_t j = 0; j < cout; ++j) or_[j] += xv * wr[j];
    }
  }
  check_finite(out->data, "linear");
  if (out->requires_grad) {
    Tensor* self = out.get();
    out->backward_fn = [x, w, b, self, rows, cin, cout]() {
      if (x->requires_grad) x->ensure_grad();
      if (w->requires_grad) w->ensure_grad();
      if (b && b->requires_grad) b->ensure_grad();
      for (std::int64_t r = 0; r < rows; ++r) {
        const double* gr = self->grad.data() + r * cout;
        const double* xr = x->data.data() + r * cin;
        if (b && b->requires_grad)
          for (std::int64_t j = 0; j < cout; ++j) b->grad[j] += gr[j];
        for (std::int64_t i = 0; i < cin; ++i) {
          const double* wr = w->data.data() + i * cout;
          if (x->requires_grad) {
            double acc = 0.0;
            for (std::int64_t j = 0; j < cout; ++j) acc += gr[j] * wr[j];
            x->grad[r * cin + i] += acc;
          }
          if (w->requires_grad) {
            const double xv = xr[i];
            double* gw = w->grad.data() + i * cout;
            for (std::int64_t j = 0; j < cout; ++j) gw[j] += xv * gr[j];
          }
        }
      }
    };
  }
  return out;
}

TensorPtr sum_all(TensorPtr x) {
  auto out = make_node(Shape{}, {x});
  double acc = 0.0;
  for (double v : x->data) acc += v;
  out->data[0] = acc;
  check_finite(out->data, "sum_all");
  if (out->requires_grad) {
    Tensor* self = out.get();
    out->backward_fn = [x, self]() {
      x->ensure_grad();
      const double g = self->grad[0];
      for (double& v : x->grad) v += g;
    };
  }
  return out;
}

TensorPtr mean_all(TensorPtr x) {
  auto out = make_node(Shape{}, {x});
  double acc = 0.0;
  for (double v : x->data) acc += v;
  const double inv = 1.0 / static_cast<double>(x->numel());
  out->data[0] = acc * inv;
  check_finite(out->data, "mean_all");
  if (out->requires_grad) {
    Tensor* self = out.get();
    out->backward_fn = [x, self, inv]() {
      x->ensure_grad();
      const double g = self->grad[0] * inv;
      for (double& v : x->grad) v += g;
    };
  }
  return out;
}

TensorPtr gelu(TensorPtr x) {
  auto out = make_node(x->shape, {x});
  const std::int64_t n = out->numel();
  const double k = std::sqrt(2.0 / M_PI);
  for (std::int64_t i = 0; i < n; ++i) {
    const double v = x->data[i];
    const double t = std::tanh(k * (v + 0.044715 * v * v * v));
    out->data[i] = 0.5 * v * (1.0 + t);
  }
  check_finite(out->data, "gelu");
  if (out->requires_grad) {
    Tensor* self = out.get();
    out->backward_fn = [x, self, n, k]() {
      x->ensure_grad();
      for (std::int64_t i = 0; i < n; ++i) {
        const double v = x->data[i];
        const double u = k * (v + 0.044715 * v * v * v);
        const double t = std::tanh(u);
        const double du = k * (1.0 + 3.0 * 0.044715 * v * v);
        const double d = 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * du;
        x->grad[i] += self->grad[i] * d;
      }
    };
  }
  return out;
}

TensorPtr sigmoid(TensorPtr x) {
  auto out = make_node(x->shape, {x});
  const std::int64_t n = out->numel();
  for (std::int64_t i = 0; i < n; ++i)
    out->data[i] = 1.0 / (1.0 + std::exp(-x->data[i]));
  check_finite(out->data, "sigmoid");
  if (out->requires_grad) {
    Tensor* self = out.get();
    out->backward_fn = [x, self, n]() {
      x->ensure_grad();
      for (std::int64_t i = 0; i < n; ++i) {
        const double s = self->data[i];
        x->grad[i] += self->grad[i] * s * (1.0 - s);
      }
    };
  }
  return out;
}

TensorPtr glu(TensorPtr x) {
  const std::int64_t c = x->dim(-1);
  if (c % 2 != 0)
    throw ShapeError("glu: last axis extent " + std::to_string(c) + " is odd");
  const std::int64_t h = c / 2;
  Shape out_shape = x->shape;
  out_shape.back() = h;
  auto out = make_node(std::move(out_shape), {x});
  const std::int64_t rows = x->numel() / c;
  for (std::int64_t r = 0; r < rows; ++r) {
    const double* xr = x->data.data() + r * c;
    double* or_ = out->data.data() + r * h;
    for (std::int64_t j = 0; j < h; ++j)
      or_[j] = xr[j] / (1.0 + std::exp(-xr[h + j]));
  }
  check_finite(out->data, "glu");
  if (out->requires_grad) {
    Tensor* self = out.get();
    out->backward_fn = [x, self, rows, c, h]() {
      x->ensure_grad();
      for (std::int64_t r = 0; r < rows; ++r) {
        const double* xr = x->data.data() + r * c;
        const double* gr = self->grad.data() + r * h;
        double* gx = x->grad.data() + r * c;
        for (std::int64_t j = 0; j < h; ++j) {
          const double s = 1.0 / (1.0 + std::exp(-xr[h + j]));
          gx[j] += gr[j] * s;
          gx[h + j] += gr[j] * xr[j] * s * (1.0 - s);
        }
      }
    };
  }
  return out;
}

TensorPtr reshape(TensorPtr x, Shape shape) {
  if (shape_numel(shape) != x->numel())
    throw ShapeError("reshape: cannot view " + shape_str(x->shape) + " as " +
                     shape_str(shape));
  auto out = make_node(std::move(shape), {x});
  out->data = x->data;
  if (out->requires_grad) {
    Tensor* self = out.get();
    out->backward_fn = [x, self]() {
      x->ensure_grad();
      const std::int64_t n = x->numel();
      for (std::int64_t i = 0; i < n; ++i) x->grad[i] += self->grad[i];
    };
  }
  return out;
}

namespace {

std::vector<std::int64_t> contiguous_strides(const Shape& shape) {
  std::vector<std::int64_t> s(shape.size(), 1);
  for (int i = static_cast<int>(shape.size()) - 2; i >= 0; --i)
    s[static_cast<std::size_t>(i)] =
        s[static_cast<std::size_t>(i) + 1] * shape[static_cast<std::size_t>(i) + 1];
  return s;
}

}  // namespace

TensorPtr permute(TensorPtr x, const std::vector<int>& axes) {
  const std::size_t r = x->shape.size();
  if (axes.size() != r)
    throw ShapeError("permute: got " + std::to_string(axes.size()) +
                     " axes for rank " + std::to_string(r));
  std::vector<bool> seen(r, false);
  Shape out_shape(r);
  for (std::size_t i = 0; i < r; ++i) {
    const int a = normalize_axis(axes[i], static_cast<int>(r));
    if (seen[static_cast<std::size_t>(a)])
      throw ShapeError("permute: duplicate axis " + std::to_string(a));
    seen[static_cast<std::size_t>(a)] = true;
    out_shape[i] = x->shape[static_cast<std::size_t>(a)];
  }
  auto out = make_node(out_shape, {x});

  // out[index] = x[index permuted back]; walk the output in order and keep a
  // running source offset via per-axis source strides.
  const auto in_strides = contiguous_strides(x->shape);
  std::vector<std::int64_t> src_stride(r);
  for (std::size_t i = 0; i < r; ++i) {
    const int a = normalize_axis(axes[i], static_cast<int>(r));
    src_stride[i] = in_strides[static_cast<std::size_t>(a)];
  }
  const std::int64_t n = out->numel();
  std::vector<std::int64_t> idx(r, 0);
  std::int64_t src = 0;
  for (std::int64_t dst = 0; dst < n; ++dst) {
    out->data[dst] = x->data[src];
    for (int i = static_cast<int>(r) - 1; i >= 0; --i) {
      const std::size_t ui = static_cast<std::size_t>(i);
      idx[ui] += 1;
      src += src_stride[ui];
      if (idx[ui] < out_shape[ui]) break;
      src -= src_stride[ui] * out_shape[ui];
      idx[ui] = 0;
    }
  }
  if (out->requires_grad) {
    Tensor* self = out.get();
    out->backward_fn = [x, self, out_shape, src_stride, r]() {
      x->ensure_grad();
      const std::int64_t n = self->numel();
      std::vector<std::int64_t> idx(r, 0);
      std::int64_t src = 0;
      for (std::int64_t dst = 0; dst < n; ++dst) {
        x->grad[src] += self->grad[dst];
        for (int i = static_cast<int>(r) - 1; i >= 0; --i) {
          const std::size_t ui = static_cast<std::size_t>(i);
          idx[ui] += 1;
          src += src_stride[ui];
          if (idx[ui] < out_shape[ui]) break;
          src -= src_stride[ui] * out_shape[ui];
          idx[ui] = 0;
        }
      }
    };
  }
  return out;
}

TensorPtr slice_axis(TensorPtr x, int axis, std::int64_t start, std::int64_t len) {
  const int a = normalize_axis(axis, static_cast<int>(x->rank()));
  const auto v = axis_view(x->shape, a);
  if (start < 0 || len < 1 || start + len > v.len)
    throw ShapeError("slice_axis: [" + std::to_string(start) + ", " +
                     std::to_string(start + len) + ") out of range for extent " +
                     std::to_string(v.len));
  Shape out_shape = x->shape;
  out_shape[static_cast<std::size_t>(a)] = len;
  auto out = make_node(std::move(out_shape), {x});
  for (std::int64_t o = 0; o < v.outer; ++o) {
    const double* src = x->data.data() + (o * v.len + start) * v.inner;
    double* dst = out->data.data() + o * len * v.inner;
    std::copy(src, src + len * v.inner, dst);
  }
  if (out->requires_grad) {
    Tensor* self = out.get();
    out->backward_fn = [x, self, v, start, len]() {
      x->ensure_grad();
      for (std::int64_t o = 0; o < v.outer; ++o) {
        const double* g = self->grad.data() + o * len * v.inner;
        double* dst = x->grad.data() + (o * v.len + start) * v.inner;
        const std::int64_t m = len * v.inner;
        for (std::int64_t i = 0; i < m; ++i) dst[i] += g[i];
      }
    };
  }
  return out;
}

TensorPtr concat_axis(const std::vector<TensorPtr>& parts, int axis) {
  if (parts.empty()) throw ShapeError("concat_axis: no inputs");
  const int a = normalize_axis(axis, static_cast<int>(parts[0]->rank()));
  Shape out_shape = parts[0]->shape;
  std::int64_t total = 0;
  for (const auto& p : parts) {
    if (p->rank() != parts[0]->rank())
      throw ShapeError("concat_axis: rank mismatch");
    for (std::size_t i = 0; i < out_shape.size(); ++i)
      if (static_cast<int>(i) != a && p->shape[i] != out_shape[i])
        throw ShapeError("concat_axis: shape mismatch " + shape_str(p->shape) +
                         " vs " + shape_str(out_shape));
    total += p->dim(a);
  }
  out_shape[static_cast<std::size_t>(a)] = total;
  std::vector<TensorPtr> inputs(parts.begin(), parts.end());
  auto out = make_node(out_shape, inputs);
  const auto ov = axis_view(out->shape, a);
  std::int64_t at = 0;
  for (const auto& p : parts) {
    const auto pv = axis_view(p->shape, a);
    for (std::int64_t o = 0; o < pv.outer; ++o) {
      const double* src = p->data.data() + o * pv.len * pv.inner;
      double* dst = out->data.data() + (o * ov.len + at) * ov.inner;
      std::copy(src, src + pv.len * pv.inner, dst);
    }
    at += p->dim(a);
  }
  if (out->requires_grad) {
    Tensor* self = out.get();
    out->backward_fn = [inputs, self, ov, a]() {
      std::int64_t at = 0;
      for (const auto& p : inputs) {
        const auto pv = axis_view(p->shape, a);
        if (p->requires_grad) {
          p->ensure_grad();
          for (std::int64_t o = 0; o < pv.outer; ++o) {
            const double* g = self->grad.data() + (o * ov.len + at) * ov.inner;
            double* dst = p->grad.data() + o * pv.len * pv.inner;
            const std::int64_t m = pv.len * pv.inner;
            for (std::int64_t i = 0; i < m; ++i) dst[i] += g[i];
          }
        }
        at += pv.len;
      }
    };
  }
  return out;
}

TensorPtr pad_axis(TensorPtr x, int axis, std::int64_t left, std::int64_t right) {
  if (left < 0 || right < 0)
    throw ShapeError("pad_axis: negative padding");
  const int a = normalize_axis(axis, static_cast<int>(x->rank()));
  const auto v = axis_view(x->shape, a);
  Shape out_shape = x->shape;
  out_shape[static_cast<std::size_t>(a)] = v.len + left + right;
  auto out = make_node(std::move(out_shape), {x});
  const std::int64_t olen = v.len + left + right;
  for (std::int64_t o = 0; o < v.outer; ++o) {
    const double* src = x->data.data() + o * v.len * v.inner;
    double* dst = out->data.data() + (o * olen + left) * v.inner;
    std::copy(src, src + v.len * v.inner, dst);
  }
  if (out->requires_grad) {
    Tensor* self = out.get();
    out->backward_fn = [x, self, v, left, olen]() {
      x->ensure_grad();
      for (std::int64_t o = 0; o < v.outer; ++o) {
        const double* g = self->grad.data() + (o * olen + left) * v.inner;
        double* dst = x->grad.data() + o * v.len * v.inner;
        const std::int64_t m = v.len * v.inner;
        for (std::int64_t i = 0; i < m; ++i) dst[i] += g[i];
      }
    };
  }
  return out;
}

TensorPtr conv1d_strided(TensorPtr x, TensorPtr kernel, int stride,
                         std::int64_t right_pad) {
  if (kernel->rank() != 3)
    throw ShapeError("conv1d_strided: kernel must be [K, Cin, Cout], got " +
                     shape_str(kernel->shape));
  if (x->rank() < 2)
    throw ShapeError("conv1d_strided: input must be at least rank 2");
  if (stride < 1) throw ConfigError("conv1d_strided: stride must be >= 1");
  if (right_pad < 0) throw ConfigError("conv1d_strided: right_pad must be >= 0");
  const std::int64_t k = kernel->dim(0);
  const std::int64_t cin = kernel->dim(1);
  const std::int64_t cout = kernel->dim(2);
  if (x->dim(-1) != cin)
    throw ShapeError("conv1d_strided: input channels " + std::to_string(x->dim(-1)) +
                     " vs kernel " + shape_str(kernel->shape));
  const std::int64_t len = x->dim(-2);
  if (len + right_pad < k)
    throw DimensionError("conv1d_strided: length " + std::to_string(len) +
                         " + right_pad " + std::to_string(right_pad) +
                         " is shorter than kernel " + std::to_string(k));
  const std::int64_t lout = (len + right_pad - k) / stride + 1;

  Shape out_shape = x->shape;
  out_shape[out_shape.size() - 2] = lout;
  out_shape.back() = cout;
  auto out = make_node(std::move(out_shape), {x, kernel});
  const std::int64_t outer = x->numel() / (len * cin);
  for (std::int64_t u = 0; u < outer; ++u) {
    const double* xb = x->data.data() + u * len * cin;
    double* ob = out->data.data() + u * lout * cout;
    for (std::int64_t o = 0; o < lout; ++o) {
      double* row = ob + o * cout;
      const std::int64_t base = o * stride;
      for (std::int64_t kk = 0; kk < k; ++kk) {
        const std::int64_t p = base + kk;
        if (p >= len) break;  // zero padding on the right
        const double* xr = xb + p * cin;
        const double* kr = kernel->data.data() + kk * cin * cout;
        for (std::int64_t ci = 0; ci < cin; ++ci) {
          const double xv = xr[ci];
          if (xv == 0.0) continue;
          const double* kc = kr + ci * cout;
          for (std::int64_t co = 0; co < cout; ++co) row[co] += xv * kc[co];
        }
      }
    }
  }
  check_finite(out->data, "conv1d_strided");
  if (out->requires_grad) {
    Tensor* self = out.get();
    const int s = stride;
    out->backward_fn = [x, kernel, self, outer, len, lout, k, cin, cout, s]() {
      const bool gx = x->requires_grad;
      const bool gk = kernel->requires_grad;
      if (gx) x->ensure_grad();
      if (gk) kernel->ensure_grad();
      for (std::int64_t u = 0; u < outer; ++u) {
        const double* xb = x->data.data() + u * len * cin;
        double* dxb = gx ? x->grad.data() + u * len * cin : nullptr;
        const double* gb = self->grad.data() + u * lout * cout;
        for (std::int64_t o = 0; o < lout; ++o) {
          const double* grow = gb + o * cout;
          const std::int64_t base = o * s;
          for (std::int64_t kk = 0; kk < k; ++kk) {
            const std::int64_t p = base + kk;
            if (p >= len) break;
            const double* xr = xb + p * cin;
            const double* kr = kernel->data.data() + kk * cin * cout;
            double* dkr = gk ? kernel->grad.data() + kk * cin * cout : nullptr;
            for (std::int64_t ci = 0; ci < cin; ++ci) {
              const double xv = xr[ci];
              const double* kc = kr + ci * cout;
              double acc = 0.0;
              if (gk) {
                double* dkc = dkr + ci * cout;
                for (std::int64_t co = 0; co < cout; ++co) {
                  const double gv = grow[co];
                  acc += gv * kc[co];
                  dkc[co] += xv * gv;
                }
              } else {
                for (std::int64_t co = 0; co < cout; ++co) acc += grow[co] * kc[co];
              }
              if (gx) dxb[p * cin + ci] += acc;
            }
          }
        }
      }
    };
  }
  return out;
}

TensorPtr conv1d_transposed(TensorPtr x, TensorPtr kernel, int stride,
                            std::int64_t target_len) {
  if (kernel->rank() != 3)
    throw ShapeError("conv1d_transposed: kernel must be [K, Cin, Cout], got " +
                     shape_str(kernel->shape));
  if (x->rank() < 2)
    throw ShapeError("conv1d_transposed: input must be at least rank 2");
  if (stride < 1) throw ConfigError("conv1d_transposed: stride must be >= 1");
  const std::int64_t k = kernel->dim(0);
  const std::int64_t cin = kernel->dim(1);
  const std::int64_t cout = kernel->dim(2);
  if (x->dim(-1) != cout)
    throw ShapeError("conv1d_transposed: input channels " +
                     std::to_string(x->dim(-1)) + " vs kernel " +
                     shape_str(kernel->shape));
  const std::int64_t lin = x->dim(-2);
  const std::int64_t covered = (lin - 1) * stride + k;
  if (target_len < 1 || target_len > covered + stride - 1)
    throw DimensionError("conv1d_transposed: target_len " +
                         std::to_string(target_len) +
                         " inconsistent with input length " + std::to_string(lin) +
                         ", kernel " + std::to_string(k) + ", stride " +
                         std::to_string(stride));

  Shape out_shape = x->shape;
  out_shape[out_shape.size() - 2] = target_len;
  out_shape.back() = cin;
  auto out = make_node(std::move(out_shape), {x, kernel});
  const std::int64_t outer = x->numel() / (lin * cout);
  for (std::int64_t u = 0; u < outer; ++u) {
    const double* xb = x->data.data() + u * lin * cout;
    double* ob = out->data.data() + u * target_len * cin;
    for (std::int64_t o = 0; o < lin; ++o) {
      const double* xr = xb + o * cout;
      const std::int64_t base = o * stride;
      for (std::int64_t kk = 0; kk < k; ++kk) {
        const std::int64_t p = base + kk;
        if (p >= target_len) break;
        double* orow = ob + p * cin;
        const double* kr = kernel->data.data() + kk * cin * cout;
        for (std::int64_t ci = 0; ci < cin; ++ci) {
          const double* kc = kr + ci * cout;
          double acc = 0.0;
          for (std::int64_t co = 0; co < cout; ++co) acc += xr[co] * kc[co];
          orow[ci] += acc;
        }
      }
    }
  }
  check_finite(out->data, "conv1d_transposed");
  if (out->requires_grad) {
    Tensor* self = out.get();
    const int s = stride;
    const std::int64_t tl = target_len;
    out->backward_fn = [x, kernel, self, outer, lin, tl, k, cin, cout, s]() {
      const bool gx = x->requires_grad;
      const bool gk = kernel->requires_grad;
      if (gx) x->ensure_grad();
      if (gk) kernel->ensure_grad();
      for (std::int64_t u = 0; u < outer; ++u) {
        const double* xb = x->data.data() + u * lin * cout;
        double* dxb = gx ? x->grad.data() + u * lin * cout : nullptr;
        const double* gb = self->grad.data() + u * tl * cin;
        for (std::int64_t o = 0; o < lin; ++o) {
          const double* xr = xb + o * cout;
          const std::int64_t base = o * s;
          for (std::int64_t kk = 0; kk < k; ++kk) {
            const std::int64_t p = base + kk;
            if (p >= tl) break;
            const double* grow = gb + p * cin;
            const double* kr = kernel->data.data() + kk * cin * cout;
            double* dkr = gk ? kernel->grad.data() + kk * cin * cout : nullptr;
            for (std::int64_t ci = 0; ci < cin; ++ci) {
              const double gv = grow[ci];
              const double* kc = kr + ci * cout;
              if (gx) {
                double* dxr = dxb + o * cout;
                for (std::int64_t co = 0; co < cout; ++co) dxr[co] += gv * kc[co];
              }
              if (gk) {
                double* dkc = dkr + ci * cout;
                for (std::int64_t co = 0; co < cout; ++co) dkc[co] += gv * xr[co];
              }
            }
          }
        }
      }
    };
  }
  return out;
}

TensorPtr conv2d_same(TensorPtr x, TensorPtr kernel) {
  if (kernel->rank() != 4)
    throw ShapeError("conv2d_same: kernel must be [kh, kw, Cin, Cout], got " +
                     shape_str(kernel->shape));
  if (x->rank() < 3)
    throw ShapeError("conv2d_same: input must be at least rank 3");
  const std::int64_t kh = kernel->dim(0);
  const std::int64_t kw = kernel->dim(1);
  const std::int64_t cin = kernel->dim(2);
  const std::int64_t cout = kernel->dim(3);
  if (kh % 2 == 0 || kw % 2 == 0)
    throw ConfigError("conv2d_same: kernel extents must be odd, got " +
                      std::to_string(kh) + "x" + std::to_string(kw));
  if (x->dim(-1) != cin)
    throw ShapeError("conv2d_same: input channels " + std::to_string(x->dim(-1)) +
                     " vs kernel " + shape_str(kernel->shape));
  const std::int64_t h = x->dim(-3);
  const std::int64_t w = x->dim(-2);
  const std::int64_t ph = kh / 2;
  const std::int64_t pw = kw / 2;

  Shape out_shape = x->shape;
  out_shape.back() = cout;
  auto out = make_node(std::move(out_shape), {x, kernel});
  const std::int64_t outer = x->numel() / (h * w * cin);
  for (std::int64_t u = 0; u < outer; ++u) {
    const double* xb = x->data.data() + u * h * w * cin;
    double* ob = out->data.data() + u * h * w * cout;
    for (std::int64_t i = 0; i < h; ++i) {
      for (std::int64_t j = 0; j < w; ++j) {
        double* row = ob + (i * w + j) * cout;
        for (std::int64_t di = 0; di < kh; ++di) {
          const std::int64_t si = i + di - ph;
          if (si < 0 || si >= h) continue;
          for (std::int64_t dj = 0; dj < kw; ++dj) {
            const std::int64_t sj = j + dj - pw;
            if (sj < 0 || sj >= w) continue;
            const double* xr = xb + (si * w + sj) * cin;
            const double* kr = kernel->data.data() + (di * kw + dj) * cin * cout;
            for (std::int64_t ci = 0; ci < cin; ++ci) {
              const double xv = xr[ci];
              if (xv == 0.0) continue;
              const double* kc = kr + ci * cout;
              for (std::int64_t co = 0; co < cout; ++co) row[co] += xv * kc[co];
            }
          }
        }
      }
    }
  }
  check_finite(out->data, "conv2d_same");
  if (out->requires_grad) {
    Tensor* self = out.get();
    out->backward_fn = [x, kernel, self, outer, h, w, kh, kw, ph, pw, cin, cout]() {
      const bool gx = x->requires_grad;
      const bool gk = kernel->requires_grad;
      if (gx) x->ensure_grad();
      if (gk) kernel->ensure_grad();
      for (std::int64_t u = 0; u < outer; ++u) {
        const double* xb = x->data.data() + u * h * w * cin;
        double* dxb = gx ? x->grad.data() + u * h * w * cin : nullptr;
        const double* gb = self->grad.data() + u * h * w * cout;
        for (std::int64_t i = 0; i < h; ++i) {
          for (std::int64_t j = 0; j < w; ++j) {
            const double* grow = gb + (i * w + j) * cout;
            for (std::int64_t di = 0; di < kh; ++di) {
              const std::int64_t si = i + di - ph;
              if (si < 0 || si >= h) continue;
              for (std::int64_t dj = 0; dj < kw; ++dj) {
                const std::int64_t sj = j + dj - pw;
                if (sj < 0 || sj >= w) continue;
                const double* xr = xb + (si * w + sj) * cin;
                const double* kr =
                    kernel->data.data() + (di * kw + dj) * cin * cout;
                double* dkr =
                    gk ? kernel->grad.data() + (di * kw + dj) * cin * cout : nullptr;
                for (std::int64_t ci = 0; ci < cin; ++ci) {
                  const double xv = xr[ci];
                  const double* kc = kr + ci * cout;
                  double acc = 0.0;
                  if (gk) {
                    double* dkc = dkr + ci * cout;
                    for (std::int64_t co = 0; co < cout; ++co) {
                      const double gv = grow[co];
                      acc += gv * kc[co];
                      dkc[co] += xv * gv;
                    }
                  } else {
                    for (std::int64_t co = 0; co < cout; ++co)
                      acc += grow[co] * kc[co];
                  }
                  if (gx) dxb[(si * w + sj) * cin + ci] += acc;
                }
              }
            }
          }
        }
      }
    };
  }
  return out;
}

TensorPtr group_norm(TensorPtr x, int groups, TensorPtr gamma, TensorPtr beta,
                     double eps) {
  if (x->rank() < 2)
    throw ShapeError("group_norm: input must be at least rank 2");
  const std::int64_t c = x->dim(-1);
  if (groups < 1 || c % groups != 0)
    throw ConfigError("group_norm: groups " + std::to_string(groups) +
                      " does not divide channels " + std::to_string(c));
  if (gamma->rank() != 1 || gamma->dim(0) != c || beta->rank() != 1 ||
      beta->dim(0) != c)
    throw ShapeError("group_norm: gamma/beta must have shape [" +
                     std::to_string(c) + "]");
  if (eps <= 0.0) throw ConfigError("group_norm: eps must be positive");

  const std::int64_t n0 = x->dim(0);
  const std::int64_t inner = x->numel() / (n0 * c);
  const std::int64_t cg = c / groups;
  const double m = static_cast<double>(inner * cg);

  auto out = make_node(x->shape, {x, gamma, beta});
  // Cache normalized values and the inverse stddev per (sample, group).
  auto xhat = std::make_shared<std::vector<double>>(x->data.size());
  auto inv_std = std::make_shared<std::vector<double>>(
      static_cast<std::size_t>(n0 * groups));
  for (std::int64_t s = 0; s < n0; ++s) {
    const double* xs = x->data.data() + s * inner * c;
    double* os = out->data.data() + s * inner * c;
    double* hs = xhat->data() + s * inner * c;
    for (std::int64_t g = 0; g < groups; ++g) {
      const std::int64_t c0 = g * cg;
      double sum = 0.0;
      for (std::int64_t p = 0; p < inner; ++p) {
        const double* row = xs + p * c + c0;
        for (std::int64_t j = 0; j < cg; ++j) sum += row[j];
      }
      const double mean = sum / m;
      double var = 0.0;
      for (std::int64_t p = 0; p < inner; ++p) {
        const double* row = xs + p * c + c0;
        for (std::int64_t j = 0; j < cg; ++j) {
          const double d = row[j] - mean;
          var += d * d;
        }
      }
      var /= m;
      const double inv = 1.0 / std::sqrt(var + eps);
      (*inv_std)[static_cast<std::size_t>(s * groups + g)] = inv;
      for (std::int64_t p = 0; p < inner; ++p) {
        const double* row = xs + p * c + c0;
        double* orow = os + p * c + c0;
        double* hrow = hs + p * c + c0;
        for (std::int64_t j = 0; j < cg; ++j) {
          const double hv = (row[j] - mean) * inv;
          hrow[j] = hv;
          orow[j] = hv * gamma->data[c0 + j] + beta->data[c0 + j];
        }
      }
    }
  }
  check_finite(out->data, "group_norm");
  if (out->requires_grad) {
    Tensor* self = out.get();
    const int ng = groups;
    out->backward_fn = [x, gamma, beta, self, xhat, inv_std, n0, inner, c, cg, m,
                        ng]() {
      const bool gx = x->requires_grad;
      if (gx) x->ensure_grad();
      if (gamma->requires_grad) gamma->ensure_grad();
      if (beta->requires_grad) beta->ensure_grad();
      for (std::int64_t s = 0; s < n0; ++s) {
        const double* gs = self->grad.data() + s * inner * c;
        const double* hs = xhat->data() + s * inner * c;
        double* dxs = gx ? x->grad.data() + s * inner * c : nullptr;
        for (std::int64_t g = 0; g < ng; ++g) {
          const std::int64_t c0 = g * cg;
          const double inv = (*inv_std)[static_cast<std::size_t>(s * ng + g)];
          double s1 = 0.0, s2 = 0.0;
          for (std::int64_t p = 0; p < inner; ++p) {
            const std::int64_t off = p * c + c0;
            for (std::int64_t j = 0; j < cg; ++j) {
              const double ge = gs[off + j] * gamma->data[c0 + j];
              s1 += ge;
              s2 += ge * hs[off + j];
            }
          }
          for (std::int64_t p = 0; p < inner; ++p) {
            const std::int64_t off = p * c + c0;
            for (std::int64_t j = 0; j < cg; ++j) {
              const double gv = gs[off + j];
              const double hv = hs[off + j];
              if (gamma->requires_grad) gamma->grad[c0 + j] += gv * hv;
              if (beta->requires_grad) beta->grad[c0 + j] += gv;
              if (gx) {
                const double ge = gv * gamma->data[c0 + j];
                dxs[off + j] += inv * (ge - (s1 + hv * s2) / m);
              }
            }
          }
        }
      }
    };
  }
  return out;
}

}  // namespace scnet
