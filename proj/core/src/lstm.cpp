#include "scnet/lstm.hpp"

#include <cmath>
#include <cstring>
#include <memory>
#include <vector>

#include "scnet/errors.hpp"

namespace scnet {
namespace {

// Per-direction activation cache for the fused backward pass:
// gates i, f, g, o plus the post-activation tanh(c), all [outer, L, H].
struct DirCache {
  std::vector<double> gi, gf, gg, go, tc, cs;
};

void check_dir(const LstmDirParams& p, std::int64_t c, std::int64_t h,
               const char* name) {
  if (!p.w_ih || !p.w_hh || !p.bias)
    throw ShapeError(std::string("bilstm: missing parameters for ") + name);
  if (p.w_ih->rank() != 2 || p.w_ih->dim(0) != c || p.w_ih->dim(1) != 4 * h)
    throw ShapeError(std::string("bilstm: ") + name + " w_ih must be [" +
                     std::to_string(c) + ", " + std::to_string(4 * h) +
                     "], got " + shape_str(p.w_ih->shape));
  if (p.w_hh->rank() != 2 || p.w_hh->dim(0) != h || p.w_hh->dim(1) != 4 * h)
    throw ShapeError(std::string("bilstm: ") + name + " w_hh must be [" +
                     std::to_string(h) + ", " + std::to_string(4 * h) +
                     "], got " + shape_str(p.w_hh->shape));
  if (p.bias->rank() != 1 || p.bias->dim(0) != 4 * h)
    throw ShapeError(std::string("bilstm: ") + name + " bias must be [" +
                     std::to_string(4 * h) + "], got " +
                     shape_str(p.bias->shape));
}

}  // namespace

TensorPtr bilstm(TensorPtr x, const LstmParams& params, int hidden) {
  if (x->rank() < 2)
    throw ShapeError("bilstm: input must be at least rank 2");
  if (hidden < 1) throw ConfigError("bilstm: hidden must be >= 1");
  const std::int64_t c = x->dim(-1);
  const std::int64_t seq = x->dim(-2);
  const std::int64_t h = hidden;
  check_dir(params.fwd, c, h, "fwd");
  check_dir(params.bwd, c, h, "bwd");

  Shape out_shape = x->shape;
  out_shape.back() = 2 * h;
  std::vector<TensorPtr> inputs = {x,
                                   params.fwd.w_ih,
                                   params.fwd.w_hh,
                                   params.fwd.bias,
                                   params.bwd.w_ih,
                                   params.bwd.w_hh,
                                   params.bwd.bias};
  bool needs = false;
  for (const auto& t : inputs)
    if (t->requires_grad) needs = true;

  auto out = Tensor::create(std::move(out_shape));
  if (needs) {
    out->requires_grad = true;
    out->parents = inputs;
  }

  const std::int64_t outer = x->numel() / (seq * c);
  const std::size_t cache_n = static_cast<std::size_t>(outer * seq * h);
  auto caches = std::make_shared<std::vector<DirCache>>(2);
  if (needs) {
    for (auto& dc : *caches) {
      dc.gi.resize(cache_n);
      dc.gf.resize(cache_n);
      dc.gg.resize(cache_n);
      dc.go.resize(cache_n);
      dc.tc.resize(cache_n);
      dc.cs.resize(cache_n);
    }
  }

  std::vector<double> z(static_cast<std::size_t>(4 * h));
  std::vector<double> hstate(static_cast<std::size_t>(h));
  std::vector<double> cstate(static_cast<std::size_t>(h));
  for (int d = 0; d < 2; ++d) {
    const LstmDirParams& p = d == 0 ? params.fwd : params.bwd;
    DirCache& dc = (*caches)[static_cast<std::size_t>(d)];
    for (std::int64_t u = 0; u < outer; ++u) {
      const double* xb = x->data.data() + u * seq * c;
      double* ob = out->data.data() + u * seq * 2 * h;
      std::fill(hstate.begin(), hstate.end(), 0.0);
      std::fill(cstate.begin(), cstate.end(), 0.0);
      for (std::int64_t s = 0; s < seq; ++s) {
        const std::int64_t t = d == 0 ? s : seq - 1 - s;
        std::memcpy(z.data(), p.bias->data.data(),
                    static_cast<std::size_t>(4 * h) * sizeof(double));
        const double* xr = xb + t * c;
        for (std::int64_t i = 0; i < c; ++i) {
          const double xv = xr[i];
          if (xv == 0.0) continue;
          const double* wr = p.w_ih->data.data() + i * 4 * h;
          for (std::int64_t j = 0; j < 4 * h; ++j) z[j] += xv * wr[j];
        }
        for (std::int64_t i = 0; i < h; ++i) {
          const double hv = hstate[i];
          if (hv == 0.0) continue;
          const double* wr = p.w_hh->data.data() + i * 4 * h;
          for (std::int64_t j = 0; j < 4 * h; ++j) z[j] += hv * wr[j];
        }
        double* orow = ob + t * 2 * h + d * h;
        const std::int64_t coff = (u * seq + t) * h;
        for (std::int64_t j = 0; j < h; ++j) {
          const double gi = 1.0 / (1.0 + std::exp(-z[j]));
          const double gf = 1.0 / (1.0 + std::exp(-z[h + j]));
          const double gg = std::tanh(z[2 * h + j]);
          const double go = 1.0 / (1.0 + std::exp(-z[3 * h + j]));
          const double cnew = gf * cstate[j] + gi * gg;
          const double tc = std::tanh(cnew);
          if (needs) {
            dc.gi[coff + j] = gi;
            dc.gf[coff + j] = gf;
            dc.gg[coff + j] = gg;
            dc.go[coff + j] = go;
            dc.tc[coff + j] = tc;
            dc.cs[coff + j] = cnew;
          }
          cstate[j] = cnew;
          const double hnew = go * tc;
          hstate[j] = hnew;
          orow[j] = hnew;
        }
      }
    }
  }
  check_finite(out->data, "bilstm");

  if (needs) {
    Tensor* self = out.get();
    LstmParams p = params;
    out->backward_fn = [x, p, self, caches, outer, seq, c, h]() {
      const bool gx = x->requires_grad;
      if (gx) x->ensure_grad();
      for (int d = 0; d < 2; ++d) {
        const LstmDirParams& dp = d == 0 ? p.fwd : p.bwd;
        const bool gw = dp.w_ih->requires_grad;
        const bool gwh = dp.w_hh->requires_grad;
        const bool gb = dp.bias->requires_grad;
        if (gw) dp.w_ih->ensure_grad();
        if (gwh) dp.w_hh->ensure_grad();
        if (gb) dp.bias->ensure_grad();
        const DirCache& dc = (*caches)[static_cast<std::size_t>(d)];
        std::vector<double> dh(static_cast<std::size_t>(h));
        std::vector<double> dcv(static_cast<std::size_t>(h));
        std::vector<double> z4(static_cast<std::size_t>(4 * h));
        for (std::int64_t u = 0; u < outer; ++u) {
          const double* xb = x->data.data() + u * seq * c;
          const double* ob = self->data.data() + u * seq * 2 * h;
          const double* gob = self->grad.data() + u * seq * 2 * h;
          std::fill(dh.begin(), dh.end(), 0.0);
          std::fill(dcv.begin(), dcv.end(), 0.0);
          for (std::int64_t s = seq - 1; s >= 0; --s) {
            const std::int64_t t = d == 0 ? s : seq - 1 - s;
            const std::int64_t tprev = d == 0 ? t - 1 : t + 1;
            const std::int64_t coff = (u * seq + t) * h;
            const std::int64_t cprev_off = s > 0 ? (u * seq + tprev) * h : -1;
            const double* grow = gob + t * 2 * h + d * h;
            const double* hprev =
                s > 0 ? ob + tprev * 2 * h + d * h : nullptr;
            for (std::int64_t j = 0; j < h; ++j) {
              const double gi = dc.gi[coff + j];
              const double gf = dc.gf[coff + j];
              const double gg = dc.gg[coff + j];
              const double go = dc.go[coff + j];
              const double tc = dc.tc[coff + j];
              const double cprev = s > 0 ? dc.cs[cprev_off + j] : 0.0;
              const double dht = grow[j] + dh[j];
              const double dov = dht * tc;
              const double dct = dcv[j] + dht * go * (1.0 - tc * tc);
              const double div = dct * gg;
              const double dfv = dct * cprev;
              const double dgv = dct * gi;
              z4[j] = div * gi * (1.0 - gi);
              z4[h + j] = dfv * gf * (1.0 - gf);
              z4[2 * h + j] = dgv * (1.0 - gg * gg);
              z4[3 * h + j] = dov * go * (1.0 - go);
              dcv[j] = dct * gf;
            }
            if (gb)
              for (std::int64_t j = 0; j < 4 * h; ++j) dp.bias->grad[j] += z4[j];
            const double* xr = xb + t * c;
            for (std::int64_t i = 0; i < c; ++i) {
              const double* wr = dp.w_ih->data.data() + i * 4 * h;
              if (gx) {
                double acc = 0.0;
                for (std::int64_t j = 0; j < 4 * h; ++j) acc += z4[j] * wr[j];
                x->grad[u * seq * c + t * c + i] += acc;
              }
              if (gw) {
                const double xv = xr[i];
                if (xv != 0.0) {
                  double* gwr = dp.w_ih->grad.data() + i * 4 * h;
                  for (std::int64_t j = 0; j < 4 * h; ++j) gwr[j] += xv * z4[j];
                }
              }
            }
            for (std::int64_t i = 0; i < h; ++i) {
              const double* wr = dp.w_hh->data.data() + i * 4 * h;
              double acc = 0.0;
              for (std::int64_t j = 0; j < 4 * h; ++j) acc += z4[j] * wr[j];
              dh[i] = acc;
              if (gwh && s > 0) {
                const double hv = hprev[i];
                if (hv != 0.0) {
                  double* gwr = dp.w_hh->grad.data() + i * 4 * h;
                  for (std::int64_t j = 0; j < 4 * h; ++j) gwr[j] += hv * z4[j];
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

}  // namespace scnet
