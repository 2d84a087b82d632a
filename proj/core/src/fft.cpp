#include "scnet/fft.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>

#include "scnet/errors.hpp"

namespace scnet {
namespace fft {
namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Forward twiddles e^{-2*pi*i*j/n} for j < n/2, cached per length.
struct Twiddles {
  std::vector<double> re, im;
};

const Twiddles& twiddles_for(std::size_t n) {
  thread_local std::map<std::size_t, Twiddles> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Twiddles t;
  t.re.resize(n / 2);
  t.im.resize(n / 2);
  for (std::size_t j = 0; j < n / 2; ++j) {
    const double a = -2.0 * M_PI * static_cast<double>(j) / static_cast<double>(n);
    t.re[j] = std::cos(a);
    t.im[j] = std::sin(a);
  }
  return cache.emplace(n, std::move(t)).first->second;
}

void fft_pow2(std::vector<double>& re, std::vector<double>& im, bool inverse) {
  const std::size_t n = re.size();
  if (n < 2) return;
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      std::swap(re[i], re[j]);
      std::swap(im[i], im[j]);
    }
  }
  const Twiddles& tw = twiddles_for(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len >> 1;
    const std::size_t step = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t j = 0; j < half; ++j) {
        const double wr = tw.re[j * step];
        const double wi = inverse ? -tw.im[j * step] : tw.im[j * step];
        const std::size_t a = i + j;
        const std::size_t b = a + half;
        const double xr = re[b] * wr - im[b] * wi;
        const double xi = re[b] * wi + im[b] * wr;
        re[b] = re[a] - xr;
        im[b] = im[a] - xi;
        re[a] += xr;
        im[a] += xi;
      }
    }
  }
}

// Chirp tables and scratch FFTs for one Bluestein length, cached. The chirp
// angle uses k^2 mod 2n to keep trig arguments small.
struct BluesteinPlan {
  std::size_t m = 0;
  std::vector<double> wre, wim;    // e^{-i*pi*k^2/n}, k < n
  std::vector<double> bre, bim;    // FFT of the conjugate chirp, length m
};

const BluesteinPlan& bluestein_plan(std::size_t n) {
  thread_local std::map<std::size_t, BluesteinPlan> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  BluesteinPlan p;
  p.m = next_pow2(2 * n - 1);
  p.wre.resize(n);
  p.wim.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t kk =
        (static_cast<std::uint64_t>(k) * k) % (2 * static_cast<std::uint64_t>(n));
    const double a = -M_PI * static_cast<double>(kk) / static_cast<double>(n);
    p.wre[k] = std::cos(a);
    p.wim[k] = std::sin(a);
  }
  p.bre.assign(p.m, 0.0);
  p.bim.assign(p.m, 0.0);
  p.bre[0] = p.wre[0];
  p.bim[0] = -p.wim[0];
  for (std::size_t k = 1; k < n; ++k) {
    p.bre[k] = p.bre[p.m - k] = p.wre[k];
    p.bim[k] = p.bim[p.m - k] = -p.wim[k];
  }
  fft_pow2(p.bre, p.bim, false);
  return cache.emplace(n, std::move(p)).first->second;
}

void bluestein_forward(std::vector<double>& re, std::vector<double>& im) {
  const std::size_t n = re.size();
  const BluesteinPlan& p = bluestein_plan(n);
  std::vector<double> are(p.m, 0.0), aim(p.m, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    are[k] = re[k] * p.wre[k] - im[k] * p.wim[k];
    aim[k] = re[k] * p.wim[k] + im[k] * p.wre[k];
  }
  fft_pow2(are, aim, false);
  for (std::size_t k = 0; k < p.m; ++k) {
    const double xr = are[k] * p.bre[k] - aim[k] * p.bim[k];
    const double xi = are[k] * p.bim[k] + aim[k] * p.bre[k];
    are[k] = xr;
    aim[k] = xi;
  }
  fft_pow2(are, aim, true);
  const double inv_m = 1.0 / static_cast<double>(p.m);
  for (std::size_t k = 0; k < n; ++k) {
    const double cr = are[k] * inv_m;
    const double ci = aim[k] * inv_m;
    re[k] = cr * p.wre[k] - ci * p.wim[k];
    im[k] = cr * p.wim[k] + ci * p.wre[k];
  }
}

}  // namespace

void cfft(std::vector<double>& re, std::vector<double>& im, bool inverse) {
  if (re.size() != im.size()) throw ShapeError("cfft: re/im size mismatch");
  const std::size_t n = re.size();
  if (n <= 1) return;
  if (is_pow2(n)) {
    fft_pow2(re, im, inverse);
    return;
  }
  if (!inverse) {
    bluestein_forward(re, im);
  } else {
    // Unnormalized inverse = conj(forward(conj(x))).
    for (double& v : im) v = -v;
    bluestein_forward(re, im);
    for (double& v : im) v = -v;
  }
}

void rdft(const double* x, std::size_t n, double* re, double* im) {
  std::vector<double> cr(x, x + n), ci(n, 0.0);
  cfft(cr, ci, false);
  const std::size_t bins = n / 2 + 1;
  for (std::size_t k = 0; k < bins; ++k) {
    re[k] = cr[k];
    im[k] = ci[k];
  }
}

void irdft(const double* re, const double* im, std::size_t n, double* x) {
  const std::size_t bins = n / 2 + 1;
  std::vector<double> cr(n), ci(n);
  for (std::size_t k = 0; k < bins; ++k) {
    cr[k] = re[k];
    ci[k] = im[k];
  }
  for (std::size_t k = bins; k < n; ++k) {
    cr[k] = re[n - k];
    ci[k] = -im[n - k];
  }
  cfft(cr, ci, true);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) x[j] = cr[j] * inv_n;
}

void rdft_adjoint(const double* gre, const double* gim, std::size_t n,
                  double* gx) {
  const std::size_t bins = n / 2 + 1;
  std::vector<double> cr(n, 0.0), ci(n, 0.0);
  for (std::size_t k = 0; k < bins; ++k) {
    cr[k] = gre[k];
    ci[k] = gim[k];
  }
  cfft(cr, ci, true);
  for (std::size_t j = 0; j < n; ++j) gx[j] = cr[j];
}

void irdft_adjoint(const double* gx, std::size_t n, double* gre, double* gim) {
  const std::size_t bins = n / 2 + 1;
  std::vector<double> r(bins), i(bins);
  rdft(gx, n, r.data(), i.data());
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < bins; ++k) {
    const bool edge = k == 0 || (n % 2 == 0 && k == n / 2);
    const double w = (edge ? 1.0 : 2.0) * inv_n;
    gre[k] = w * r[k];
    gim[k] = w * i[k];
  }
}

}  // namespace fft

namespace {

struct AxisGeom {
  std::int64_t outer = 1, len = 1, inner = 1;
};

AxisGeom geom(const Shape& shape, int axis) {
  AxisGeom g;
  g.len = shape[static_cast<std::size_t>(axis)];
  for (int i = 0; i < axis; ++i) g.outer *= shape[static_cast<std::size_t>(i)];
  for (std::size_t i = static_cast<std::size_t>(axis) + 1; i < shape.size(); ++i)
    g.inner *= shape[i];
  return g;
}

void gather(const double* src, const AxisGeom& g, std::int64_t o, std::int64_t i,
            double* dst) {
  const double* p = src + o * g.len * g.inner + i;
  for (std::int64_t k = 0; k < g.len; ++k) dst[k] = p[k * g.inner];
}

void scatter_add(const double* src, std::int64_t len, double* dst,
                 const AxisGeom& g, std::int64_t o, std::int64_t i) {
  double* p = dst + o * g.len * g.inner + i;
  for (std::int64_t k = 0; k < len; ++k) p[k * g.inner] += src[k];
}

}  // namespace

std::pair<TensorPtr, TensorPtr> rfft_axis(TensorPtr x, int axis) {
  const int a = normalize_axis(axis, static_cast<int>(x->rank()));
  const AxisGeom g = geom(x->shape, a);
  if (g.len < 2)
    throw DimensionError("rfft_axis: axis extent must be >= 2, got " +
                         std::to_string(g.len));
  const std::int64_t bins = g.len / 2 + 1;
  Shape out_shape = x->shape;
  out_shape[static_cast<std::size_t>(a)] = bins;
  auto re = Tensor::create(out_shape);
  auto im = Tensor::create(out_shape);
  const AxisGeom og = geom(out_shape, a);

  std::vector<double> line(static_cast<std::size_t>(g.len));
  std::vector<double> br(static_cast<std::size_t>(bins)),
      bi(static_cast<std::size_t>(bins));
  for (std::int64_t o = 0; o < g.outer; ++o) {
    for (std::int64_t i = 0; i < g.inner; ++i) {
      gather(x->data.data(), g, o, i, line.data());
      fft::rdft(line.data(), static_cast<std::size_t>(g.len), br.data(),
                bi.data());
      double* pr = re->data.data() + o * og.len * og.inner + i;
      double* pi = im->data.data() + o * og.len * og.inner + i;
      for (std::int64_t k = 0; k < bins; ++k) {
        pr[k * og.inner] = br[k];
        pi[k * og.inner] = bi[k];
      }
    }
  }
  check_finite(re->data, "rfft_axis");
  check_finite(im->data, "rfft_axis");

  if (x->requires_grad) {
    re->requires_grad = im->requires_grad = true;
    re->parents = {x};
    im->parents = {x};
    const std::int64_t n = g.len;
    Tensor* re_self = re.get();
    Tensor* im_self = im.get();
    auto make_adjoint = [x, g, og, n, bins](Tensor* self, bool imag) {
      return [x, g, og, n, bins, self, imag]() {
        x->ensure_grad();
        std::vector<double> gr(static_cast<std::size_t>(bins), 0.0),
            gi(static_cast<std::size_t>(bins), 0.0);
        std::vector<double> gx(static_cast<std::size_t>(n));
        for (std::int64_t o = 0; o < g.outer; ++o) {
          for (std::int64_t i = 0; i < g.inner; ++i) {
            const double* p = self->grad.data() + o * og.len * og.inner + i;
            for (std::int64_t k = 0; k < bins; ++k)
              (imag ? gi : gr)[static_cast<std::size_t>(k)] = p[k * og.inner];
            fft::rdft_adjoint(gr.data(), gi.data(), static_cast<std::size_t>(n),
                              gx.data());
            scatter_add(gx.data(), n, x->grad.data(), g, o, i);
          }
        }
      };
    };
    re->backward_fn = make_adjoint(re_self, false);
    im->backward_fn = make_adjoint(im_self, true);
  }
  return {re, im};
}

TensorPtr irfft_axis(TensorPtr re, TensorPtr im, int axis,
                     std::int64_t target_len) {
  if (re->shape != im->shape)
    throw ShapeError("irfft_axis: re/im shape mismatch " + shape_str(re->shape) +
                     " vs " + shape_str(im->shape));
  const int a = normalize_axis(axis, static_cast<int>(re->rank()));
  const AxisGeom g = geom(re->shape, a);
  if (target_len < 2)
    throw DimensionError("irfft_axis: target_len must be >= 2, got " +
                         std::to_string(target_len));
  if (g.len != target_len / 2 + 1)
    throw DimensionError("irfft_axis: axis extent " + std::to_string(g.len) +
                         " does not match target_len " +
                         std::to_string(target_len));
  Shape out_shape = re->shape;
  out_shape[static_cast<std::size_t>(a)] = target_len;
  std::vector<TensorPtr> inputs = {re, im};
  auto out = Tensor::create(std::move(out_shape));
  if (re->requires_grad || im->requires_grad) {
    out->requires_grad = true;
    out->parents = inputs;
  }
  const AxisGeom og = geom(out->shape, a);

  std::vector<double> br(static_cast<std::size_t>(g.len)),
      bi(static_cast<std::size_t>(g.len));
  std::vector<double> line(static_cast<std::size_t>(target_len));
  for (std::int64_t o = 0; o < g.outer; ++o) {
    for (std::int64_t i = 0; i < g.inner; ++i) {
      const double* pr = re->data.data() + o * g.len * g.inner + i;
      const double* pi = im->data.data() + o * g.len * g.inner + i;
      for (std::int64_t k = 0; k < g.len; ++k) {
        br[static_cast<std::size_t>(k)] = pr[k * g.inner];
        bi[static_cast<std::size_t>(k)] = pi[k * g.inner];
      }
      fft::irdft(br.data(), bi.data(), static_cast<std::size_t>(target_len),
                 line.data());
      double* p = out->data.data() + o * og.len * og.inner + i;
      for (std::int64_t k = 0; k < target_len; ++k) p[k * og.inner] = line[k];
    }
  }
  check_finite(out->data, "irfft_axis");

  if (out->requires_grad) {
    Tensor* self = out.get();
    const std::int64_t n = target_len;
    out->backward_fn = [re, im, self, g, og, n]() {
      if (re->requires_grad) re->ensure_grad();
      if (im->requires_grad) im->ensure_grad();
      std::vector<double> gline(static_cast<std::size_t>(n));
      std::vector<double> gr(static_cast<std::size_t>(g.len)),
          gi(static_cast<std::size_t>(g.len));
      for (std::int64_t o = 0; o < g.outer; ++o) {
        for (std::int64_t i = 0; i < g.inner; ++i) {
          const double* p = self->grad.data() + o * og.len * og.inner + i;
          for (std::int64_t k = 0; k < n; ++k)
            gline[static_cast<std::size_t>(k)] = p[k * og.inner];
          fft::irdft_adjoint(gline.data(), static_cast<std::size_t>(n), gr.data(),
                             gi.data());
          if (re->requires_grad)
            scatter_add(gr.data(), g.len, re->grad.data(), g, o, i);
          if (im->requires_grad)
            scatter_add(gi.data(), g.len, im->grad.data(), g, o, i);
        }
      }
    };
  }
  return out;
}

}  // namespace scnet
