#include "dam/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

namespace dam {

int same_padding(int kernel_extent) {
  if (kernel_extent < 1 || kernel_extent % 2 == 0)
    tensor_fail("same_padding: requires an odd kernel extent, got " +
                std::to_string(kernel_extent));
  return (kernel_extent - 1) / 2;
}

template <typename T>
BatchNormState<T> BatchNormState<T>::make(int channels) {
  BatchNormState<T> s;
  s.running_mean = Tensor<T>::zeros({channels});
  s.running_var = Tensor<T>::full({channels}, T(1));
  return s;
}

namespace {

template <typename T>
void check_finite(const Tensor<T>& t, const char* op) {
  if (!debug_checks_enabled()) return;
  for (T v : t.data())
    if (!std::isfinite(static_cast<double>(v)))
      tensor_fail(std::string(op) + ": non-finite value in output");
}

template <typename T>
bool want_tape(std::initializer_list<const Tensor<T>*> inputs) {
  if (!Tape<T>::active()) return false;
  for (const auto* t : inputs)
    if (t->requires_grad()) return true;
  return false;
}

template <typename T>
void finish(const char* op, std::initializer_list<const Tensor<T>*> inputs,
            Tensor<T>& out, std::function<void()> backward) {
  check_finite(out, op);
  if (!want_tape<T>(inputs)) return;
  out.set_requires_grad(true);
  std::vector<const void*> in_ids;
  in_ids.reserve(inputs.size());
  for (const auto* t : inputs) in_ids.push_back(t->id());
  Tape<T>::active()->record(op, std::move(in_ids), {out}, std::move(backward));
}

}  // namespace

// ---------------------------------------------------------------- matmul

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
    tensor_fail("matmul: shape mismatch " + shape_str(a.shape()) + " vs " +
                shape_str(b.shape()));
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor<T> out = Tensor<T>::zeros({m, n});
  {
    const T* pa = a.data().data();
    const T* pb = b.data().data();
    T* po = out.data().data();
    for (int i = 0; i < m; ++i)
      for (int t = 0; t < k; ++t) {
        const T av = pa[i * k + t];
        const T* brow = pb + static_cast<size_t>(t) * n;
        T* orow = po + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
      }
  }
  finish<T>("matmul", {&a, &b}, out, [a, b, out]() mutable {
    const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
    auto g = out.grad();
    if (a.requires_grad()) {
      auto da = a.grad();
      const T* pb = b.data().data();
      for (int i = 0; i < m; ++i)
        for (int t = 0; t < k; ++t) {
          T acc = 0;
          const T* grow = g.data() + static_cast<size_t>(i) * n;
          const T* brow = pb + static_cast<size_t>(t) * n;
          for (int j = 0; j < n; ++j) acc += grow[j] * brow[j];
          da[i * k + t] += acc;
        }
    }
    if (b.requires_grad()) {
      auto db = b.grad();
      const T* pa = a.data().data();
      for (int t = 0; t < k; ++t)
        for (int i = 0; i < m; ++i) {
          const T av = pa[i * k + t];
          const T* grow = g.data() + static_cast<size_t>(i) * n;
          T* drow = db.data() + static_cast<size_t>(t) * n;
          for (int j = 0; j < n; ++j) drow[j] += av * grow[j];
        }
    }
  });
  return out;
}

// ---------------------------------------------------------------- conv2d

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias,
                 Pad2 pad, Stride2 stride) {
  if (x.rank() != 3 || w.rank() != 4)
    tensor_fail("conv2d: expected x[C,H,W], w[Co,Ci,kh,kw], got " +
                shape_str(x.shape()) + " and " + shape_str(w.shape()));
  const int ci = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const int co = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  if (w.dim(1) != ci)
    tensor_fail("conv2d: input channels " + std::to_string(ci) +
                " do not match kernel " + shape_str(w.shape()));
  if (bias.rank() != 1 || bias.dim(0) != co)
    tensor_fail("conv2d: bias must be [Co]");
  if (kh > h + 2 * pad.h || kw > wd + 2 * pad.w)
    tensor_fail("conv2d: kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                " larger than padded input " + std::to_string(h + 2 * pad.h) + "x" +
                std::to_string(wd + 2 * pad.w));
  if (stride.h < 1 || stride.w < 1) tensor_fail("conv2d: stride must be positive");
  const int oh = (h + 2 * pad.h - kh) / stride.h + 1;
  const int ow = (wd + 2 * pad.w - kw) / stride.w + 1;

  Tensor<T> out = Tensor<T>::zeros({co, oh, ow});
  {
    T* po = out.data().data();
    const T* px = x.data().data();
    const T* pw = w.data().data();
    const T* pbias = bias.data().data();
    for (int c = 0; c < co; ++c) {
      T* oc = po + static_cast<size_t>(c) * oh * ow;
      std::fill(oc, oc + static_cast<size_t>(oh) * ow, pbias[c]);
      for (int ic = 0; ic < ci; ++ic) {
        const T* xc = px + static_cast<size_t>(ic) * h * wd;
        const T* wc = pw + (static_cast<size_t>(c) * ci + ic) * kh * kw;
        for (int ky = 0; ky < kh; ++ky)
          for (int kx = 0; kx < kw; ++kx) {
            const T wv = wc[ky * kw + kx];
            if (wv == T(0)) continue;
            for (int oy = 0; oy < oh; ++oy) {
              const int iy = oy * stride.h - pad.h + ky;
              if (iy < 0 || iy >= h) continue;
              const T* xrow = xc + static_cast<size_t>(iy) * wd;
              T* orow = oc + static_cast<size_t>(oy) * ow;
              for (int ox = 0; ox < ow; ++ox) {
                const int ix = ox * stride.w - pad.w + kx;
                if (ix < 0 || ix >= wd) continue;
                orow[ox] += wv * xrow[ix];
              }
            }
          }
      }
    }
  }
  finish<T>("conv2d", {&x, &w, &bias}, out, [x, w, bias, out, pad, stride]() mutable {
    const int ci = x.dim(0), h = x.dim(1), wd = x.dim(2);
    const int co = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    const int oh = out.dim(1), ow = out.dim(2);
    auto g = out.grad();
    const T* px = x.data().data();
    const T* pw = w.data().data();
    T* dx = x.requires_grad() ? x.grad().data() : nullptr;
    T* dw = w.requires_grad() ? w.grad().data() : nullptr;
    if (bias.requires_grad()) {
      auto db = bias.grad();
      for (int c = 0; c < co; ++c) {
        T acc = 0;
        const T* gc = g.data() + static_cast<size_t>(c) * oh * ow;
        for (int i = 0; i < oh * ow; ++i) acc += gc[i];
        db[c] += acc;
      }
    }
    if (!dx && !dw) return;
    for (int c = 0; c < co; ++c) {
      const T* gc = g.data() + static_cast<size_t>(c) * oh * ow;
      for (int ic = 0; ic < ci; ++ic) {
        const T* xc = px + static_cast<size_t>(ic) * h * wd;
        T* dxc = dx ? dx + static_cast<size_t>(ic) * h * wd : nullptr;
        const size_t wbase = (static_cast<size_t>(c) * ci + ic) * kh * kw;
        for (int ky = 0; ky < kh; ++ky)
          for (int kx = 0; kx < kw; ++kx) {
            const T wv = pw[wbase + ky * kw + kx];
            T wacc = 0;
            for (int oy = 0; oy < oh; ++oy) {
              const int iy = oy * stride.h - pad.h + ky;
              if (iy < 0 || iy >= h) continue;
              const T* grow = gc + static_cast<size_t>(oy) * ow;
              const T* xrow = xc + static_cast<size_t>(iy) * wd;
              T* dxrow = dxc ? dxc + static_cast<size_t>(iy) * wd : nullptr;
              for (int ox = 0; ox < ow; ++ox) {
                const int ix = ox * stride.w - pad.w + kx;
                if (ix < 0 || ix >= wd) continue;
                const T gv = grow[ox];
                if (dxrow) dxrow[ix] += wv * gv;
                wacc += xrow[ix] * gv;
              }
            }
            if (dw) dw[wbase + ky * kw + kx] += wacc;
          }
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------- conv3d

template <typename T>
Tensor<T> conv3d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias,
                 Pad3 pad) {
  if (x.rank() != 4 || w.rank() != 5)
    tensor_fail("conv3d: expected x[C,D,H,W], w[Co,Ci,kd,kh,kw], got " +
                shape_str(x.shape()) + " and " + shape_str(w.shape()));
  const int ci = x.dim(0), d = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const int co = w.dim(0), kd = w.dim(2), kh = w.dim(3), kw = w.dim(4);
  if (w.dim(1) != ci)
    tensor_fail("conv3d: input channels " + std::to_string(ci) +
                " do not match kernel " + shape_str(w.shape()));
  if (bias.rank() != 1 || bias.dim(0) != co) tensor_fail("conv3d: bias must be [Co]");
  if (kd > d + 2 * pad.d || kh > h + 2 * pad.h || kw > wd + 2 * pad.w)
    tensor_fail("conv3d: kernel larger than padded input");
  const int od = d + 2 * pad.d - kd + 1;
  const int oh = h + 2 * pad.h - kh + 1;
  const int ow = wd + 2 * pad.w - kw + 1;

  Tensor<T> out = Tensor<T>::zeros({co, od, oh, ow});
  {
    T* po = out.data().data();
    const T* px = x.data().data();
    const T* pw = w.data().data();
    const T* pbias = bias.data().data();
    for (int c = 0; c < co; ++c) {
      T* oc = po + static_cast<size_t>(c) * od * oh * ow;
      std::fill(oc, oc + static_cast<size_t>(od) * oh * ow, pbias[c]);
      for (int ic = 0; ic < ci; ++ic) {
        const T* xc = px + static_cast<size_t>(ic) * d * h * wd;
        const T* wc = pw + (static_cast<size_t>(c) * ci + ic) * kd * kh * kw;
        for (int kz = 0; kz < kd; ++kz)
          for (int ky = 0; ky < kh; ++ky)
            for (int kx = 0; kx < kw; ++kx) {
              const T wv = wc[(kz * kh + ky) * kw + kx];
              if (wv == T(0)) continue;
              for (int oz = 0; oz < od; ++oz) {
                const int iz = oz - pad.d + kz;
                if (iz < 0 || iz >= d) continue;
                for (int oy = 0; oy < oh; ++oy) {
                  const int iy = oy - pad.h + ky;
                  if (iy < 0 || iy >= h) continue;
                  const T* xrow = xc + (static_cast<size_t>(iz) * h + iy) * wd;
                  T* orow = oc + (static_cast<size_t>(oz) * oh + oy) * ow;
                  for (int ox = 0; ox < ow; ++ox) {
                    const int ix = ox - pad.w + kx;
                    if (ix < 0 || ix >= wd) continue;
                    orow[ox] += wv * xrow[ix];
                  }
                }
              }
            }
      }
    }
  }
  finish<T>("conv3d", {&x, &w, &bias}, out, [x, w, bias, out, pad]() mutable {
    const int ci = x.dim(0), d = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const int co = w.dim(0), kd = w.dim(2), kh = w.dim(3), kw = w.dim(4);
    const int od = out.dim(1), oh = out.dim(2), ow = out.dim(3);
    auto g = out.grad();
    const T* px = x.data().data();
    const T* pw = w.data().data();
    T* dx = x.requires_grad() ? x.grad().data() : nullptr;
    T* dw = w.requires_grad() ? w.grad().data() : nullptr;
    if (bias.requires_grad()) {
      auto db = bias.grad();
      for (int c = 0; c < co; ++c) {
        T acc = 0;
        const T* gc = g.data() + static_cast<size_t>(c) * od * oh * ow;
        for (int i = 0; i < od * oh * ow; ++i) acc += gc[i];
        db[c] += acc;
      }
    }
    if (!dx && !dw) return;
    for (int c = 0; c < co; ++c) {
      const T* gc = g.data() + static_cast<size_t>(c) * od * oh * ow;
      for (int ic = 0; ic < ci; ++ic) {
        const T* xc = px + static_cast<size_t>(ic) * d * h * wd;
        T* dxc = dx ? dx + static_cast<size_t>(ic) * d * h * wd : nullptr;
        const size_t wbase = (static_cast<size_t>(c) * ci + ic) * kd * kh * kw;
        for (int kz = 0; kz < kd; ++kz)
          for (int ky = 0; ky < kh; ++ky)
            for (int kx = 0; kx < kw; ++kx) {
              const T wv = pw[wbase + (kz * kh + ky) * kw + kx];
              T wacc = 0;
              for (int oz = 0; oz < od; ++oz) {
                const int iz = oz - pad.d + kz;
                if (iz < 0 || iz >= d) continue;
                for (int oy = 0; oy < oh; ++oy) {
                  const int iy = oy - pad.h + ky;
                  if (iy < 0 || iy >= h) continue;
                  const T* grow = gc + (static_cast<size_t>(oz) * oh + oy) * ow;
                  const T* xrow = xc + (static_cast<size_t>(iz) * h + iy) * wd;
                  T* dxrow = dxc ? dxc + (static_cast<size_t>(iz) * h + iy) * wd : nullptr;
                  for (int ox = 0; ox < ow; ++ox) {
                    const int ix = ox - pad.w + kx;
                    if (ix < 0 || ix >= wd) continue;
                    const T gv = grow[ox];
                    if (dxrow) dxrow[ix] += wv * gv;
                    wacc += xrow[ix] * gv;
                  }
                }
              }
              if (dw) dw[wbase + (kz * kh + ky) * kw + kx] += wacc;
            }
      }
    }
  });
  return out;
}

// ------------------------------------------------------------- batchnorm

template <typename T>
Tensor<T> batchnorm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                    BatchNormState<T>& state, NormMode mode, T momentum, T eps) {
  if (x.rank() < 1) tensor_fail("batchnorm: rank-0 input");
  const int c = x.dim(0);
  if (gamma.size() != c || beta.size() != c || state.running_mean.size() != c ||
      state.running_var.size() != c)
    tensor_fail("batchnorm: parameter length does not match " + std::to_string(c) +
                " channels");
  const std::int64_t n = x.size() / c;
  Tensor<T> out = Tensor<T>::zeros(x.shape());

  // Channel statistics used by this forward (batch stats in train mode).
  std::vector<T> mean(c), inv_std(c);
  {
    const T* px = x.data().data();
    if (mode == NormMode::kTrain) {
      auto rm = state.running_mean.data();
      auto rv = state.running_var.data();
      for (int ch = 0; ch < c; ++ch) {
        const T* xc = px + static_cast<size_t>(ch) * n;
        double mu = 0;
        for (std::int64_t i = 0; i < n; ++i) mu += xc[i];
        mu /= std::max<std::int64_t>(n, 1);
        double var = 0;
        for (std::int64_t i = 0; i < n; ++i) {
          const double dv = xc[i] - mu;
          var += dv * dv;
        }
        var /= std::max<std::int64_t>(n, 1);
        mean[ch] = static_cast<T>(mu);
        inv_std[ch] = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(eps)));
        rm[ch] = (T(1) - momentum) * rm[ch] + momentum * static_cast<T>(mu);
        rv[ch] = (T(1) - momentum) * rv[ch] + momentum * static_cast<T>(var);
      }
    } else {
      auto rm = state.running_mean.data();
      auto rv = state.running_var.data();
      for (int ch = 0; ch < c; ++ch) {
        mean[ch] = rm[ch];
        inv_std[ch] = static_cast<T>(1.0 / std::sqrt(static_cast<double>(rv[ch]) +
                                                     static_cast<double>(eps)));
      }
    }
    T* po = out.data().data();
    const T* pg = gamma.data().data();
    const T* pb = beta.data().data();
    for (int ch = 0; ch < c; ++ch) {
      const T* xc = px + static_cast<size_t>(ch) * n;
      T* oc = po + static_cast<size_t>(ch) * n;
      const T mu = mean[ch], is = inv_std[ch], gm = pg[ch], bt = pb[ch];
      for (std::int64_t i = 0; i < n; ++i) oc[i] = gm * (xc[i] - mu) * is + bt;
    }
  }
  finish<T>("batchnorm", {&x, &gamma, &beta}, out,
            [x, gamma, beta, out, mean, inv_std, mode]() mutable {
    const int c = x.dim(0);
    const std::int64_t n = x.size() / c;
    auto g = out.grad();
    const T* px = x.data().data();
    const T* pg = gamma.data().data();
    T* dx = x.requires_grad() ? x.grad().data() : nullptr;
    T* dgm = gamma.requires_grad() ? gamma.grad().data() : nullptr;
    T* dbt = beta.requires_grad() ? beta.grad().data() : nullptr;
    for (int ch = 0; ch < c; ++ch) {
      const T* xc = px + static_cast<size_t>(ch) * n;
      const T* gc = g.data() + static_cast<size_t>(ch) * n;
      const T mu = mean[ch], is = inv_std[ch];
      double sum_g = 0, sum_gx = 0;
      for (std::int64_t i = 0; i < n; ++i) {
        const double xh = (xc[i] - mu) * is;
        sum_g += gc[i];
        sum_gx += gc[i] * xh;
      }
      if (dbt) dbt[ch] += static_cast<T>(sum_g);
      if (dgm) dgm[ch] += static_cast<T>(sum_gx);
      if (dx) {
        T* dxc = dx + static_cast<size_t>(ch) * n;
        if (mode == NormMode::kTrain) {
          const double mg = sum_g / n, mgx = sum_gx / n;
          for (std::int64_t i = 0; i < n; ++i) {
            const double xh = (xc[i] - mu) * is;
            dxc[i] += static_cast<T>(pg[ch] * is * (gc[i] - mg - xh * mgx));
          }
        } else {
          for (std::int64_t i = 0; i < n; ++i)
            dxc[i] += static_cast<T>(pg[ch] * is * gc[i]);
        }
      }
    }
  });
  return out;
}

// ------------------------------------------------------------- groupnorm

template <typename T>
Tensor<T> groupnorm(const Tensor<T>& x, int groups, const Tensor<T>& gamma,
                    const Tensor<T>& beta, T eps) {
  if (x.rank() < 1) tensor_fail("groupnorm: rank-0 input");
  const int c = x.dim(0);
  if (groups < 1 || c % groups != 0)
    tensor_fail("groupnorm: groups " + std::to_string(groups) +
                " do not divide channels " + std::to_string(c));
  if (gamma.size() != c || beta.size() != c)
    tensor_fail("groupnorm: parameter length does not match channels");
  const std::int64_t spatial = x.size() / c;
  const int gc = c / groups;              // channels per group
  const std::int64_t gn = gc * spatial;   // elements per group

  Tensor<T> out = Tensor<T>::zeros(x.shape());
  std::vector<T> mean(groups), inv_std(groups);
  {
    const T* px = x.data().data();
    for (int gi = 0; gi < groups; ++gi) {
      const T* xg = px + static_cast<size_t>(gi) * gn;
      double mu = 0;
      for (std::int64_t i = 0; i < gn; ++i) mu += xg[i];
      mu /= std::max<std::int64_t>(gn, 1);
      double var = 0;
      for (std::int64_t i = 0; i < gn; ++i) {
        const double dv = xg[i] - mu;
        var += dv * dv;
      }
      var /= std::max<std::int64_t>(gn, 1);
      mean[gi] = static_cast<T>(mu);
      inv_std[gi] = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(eps)));
    }
    T* po = out.data().data();
    const T* pg = gamma.data().data();
    const T* pb = beta.data().data();
    for (int ch = 0; ch < c; ++ch) {
      const int gi = ch / gc;
      const T* xc = px + static_cast<size_t>(ch) * spatial;
      T* oc = po + static_cast<size_t>(ch) * spatial;
      const T mu = mean[gi], is = inv_std[gi], gm = pg[ch], bt = pb[ch];
      for (std::int64_t i = 0; i < spatial; ++i) oc[i] = gm * (xc[i] - mu) * is + bt;
    }
  }
  finish<T>("groupnorm", {&x, &gamma, &beta}, out,
            [x, gamma, beta, out, groups, mean, inv_std]() mutable {
    const int c = x.dim(0);
    const std::int64_t spatial = x.size() / c;
    const int gc = c / groups;
    const std::int64_t gn = gc * spatial;
    auto g = out.grad();
    const T* px = x.data().data();
    const T* pg = gamma.data().data();
    T* dx = x.requires_grad() ? x.grad().data() : nullptr;
    T* dgm = gamma.requires_grad() ? gamma.grad().data() : nullptr;
    T* dbt = beta.requires_grad() ? beta.grad().data() : nullptr;
    for (int ch = 0; ch < c; ++ch) {
      const int gi = ch / gc;
      const T* xc = px + static_cast<size_t>(ch) * spatial;
      const T* gch = g.data() + static_cast<size_t>(ch) * spatial;
      double sum_g = 0, sum_gx = 0;
      for (std::int64_t i = 0; i < spatial; ++i) {
        const double xh = (xc[i] - mean[gi]) * inv_std[gi];
        sum_g += gch[i];
        sum_gx += gch[i] * xh;
      }
      if (dbt) dbt[ch] += static_cast<T>(sum_g);
      if (dgm) dgm[ch] += static_cast<T>(sum_gx);
    }
    if (!dx) return;
    // dxhat is gamma-scaled upstream grad; reduce it over each group.
    for (int gi = 0; gi < groups; ++gi) {
      double sum_dxh = 0, sum_dxh_xh = 0;
      for (int cc = 0; cc < gc; ++cc) {
        const int ch = gi * gc + cc;
        const T* xc = px + static_cast<size_t>(ch) * spatial;
        const T* gch = g.data() + static_cast<size_t>(ch) * spatial;
        for (std::int64_t i = 0; i < spatial; ++i) {
          const double dxh = gch[i] * pg[ch];
          const double xh = (xc[i] - mean[gi]) * inv_std[gi];
          sum_dxh += dxh;
          sum_dxh_xh += dxh * xh;
        }
      }
      const double m1 = sum_dxh / gn, m2 = sum_dxh_xh / gn;
      for (int cc = 0; cc < gc; ++cc) {
        const int ch = gi * gc + cc;
        const T* xc = px + static_cast<size_t>(ch) * spatial;
        const T* gch = g.data() + static_cast<size_t>(ch) * spatial;
        T* dxc = dx + static_cast<size_t>(ch) * spatial;
        for (std::int64_t i = 0; i < spatial; ++i) {
          const double dxh = gch[i] * pg[ch];
          const double xh = (xc[i] - mean[gi]) * inv_std[gi];
          dxc[i] += static_cast<T>(inv_std[gi] * (dxh - m1 - xh * m2));
        }
      }
    }
  });
  return out;
}

// ----------------------------------------------------------- activations

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> out = Tensor<T>::zeros(x.shape());
  {
    const T* px = x.data().data();
    T* po = out.data().data();
    for (std::int64_t i = 0; i < x.size(); ++i) po[i] = px[i] > T(0) ? px[i] : T(0);
  }
  finish<T>("relu", {&x}, out, [x, out]() mutable {
    if (!x.requires_grad()) return;
    auto g = out.grad();
    auto dx = x.grad();
    const T* px = x.data().data();
    for (std::int64_t i = 0; i < x.size(); ++i)
      if (px[i] > T(0)) dx[i] += g[i];  // subgradient at 0 is 0
  });
  return out;
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  Tensor<T> out = Tensor<T>::zeros(x.shape());
  {
    const T* px = x.data().data();
    T* po = out.data().data();
    for (std::int64_t i = 0; i < x.size(); ++i) {
      const double z = px[i];
      po[i] = static_cast<T>(z >= 0 ? 1.0 / (1.0 + std::exp(-z))
                                    : std::exp(z) / (1.0 + std::exp(z)));
    }
  }
  finish<T>("sigmoid", {&x}, out, [x, out]() mutable {
    if (!x.requires_grad()) return;
    auto g = out.grad();
    auto dx = x.grad();
    const T* po = out.data().data();
    for (std::int64_t i = 0; i < x.size(); ++i) dx[i] += g[i] * po[i] * (T(1) - po[i]);
  });
  return out;
}

// ------------------------------------------------------ upsample_bilinear

namespace {
struct Lerp {
  int i0, i1;
  double w1;  // weight of i1; i0 gets 1-w1
};
inline Lerp align_corners_lerp(int o, int out_n, int in_n) {
  if (out_n == 1 || in_n == 1) return {0, 0, 0.0};
  const double src = static_cast<double>(o) * (in_n - 1) / (out_n - 1);
  int i0 = static_cast<int>(src);
  if (i0 > in_n - 2) i0 = in_n - 2;
  return {i0, i0 + 1, src - i0};
}
}  // namespace

template <typename T>
Tensor<T> upsample_bilinear(const Tensor<T>& x, int out_h, int out_w) {
  if (x.rank() != 3) tensor_fail("upsample_bilinear: expected [C,H,W]");
  if (out_h < 1 || out_w < 1) tensor_fail("upsample_bilinear: output dims must be >= 1");
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  Tensor<T> out = Tensor<T>::zeros({c, out_h, out_w});
  {
    const T* px = x.data().data();
    T* po = out.data().data();
    for (int oy = 0; oy < out_h; ++oy) {
      const Lerp ly = align_corners_lerp(oy, out_h, h);
      for (int ox = 0; ox < out_w; ++ox) {
        const Lerp lx = align_corners_lerp(ox, out_w, w);
        const double w00 = (1 - ly.w1) * (1 - lx.w1), w01 = (1 - ly.w1) * lx.w1;
        const double w10 = ly.w1 * (1 - lx.w1), w11 = ly.w1 * lx.w1;
        for (int ch = 0; ch < c; ++ch) {
          const T* xc = px + static_cast<size_t>(ch) * h * w;
          po[(static_cast<size_t>(ch) * out_h + oy) * out_w + ox] = static_cast<T>(
              w00 * xc[ly.i0 * w + lx.i0] + w01 * xc[ly.i0 * w + lx.i1] +
              w10 * xc[ly.i1 * w + lx.i0] + w11 * xc[ly.i1 * w + lx.i1]);
        }
      }
    }
  }
  finish<T>("upsample_bilinear", {&x}, out, [x, out]() mutable {
    if (!x.requires_grad()) return;
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int out_h = out.dim(1), out_w = out.dim(2);
    auto g = out.grad();
    auto dx = x.grad();
    for (int oy = 0; oy < out_h; ++oy) {
      const Lerp ly = align_corners_lerp(oy, out_h, h);
      for (int ox = 0; ox < out_w; ++ox) {
        const Lerp lx = align_corners_lerp(ox, out_w, w);
        const double w00 = (1 - ly.w1) * (1 - lx.w1), w01 = (1 - ly.w1) * lx.w1;
        const double w10 = ly.w1 * (1 - lx.w1), w11 = ly.w1 * lx.w1;
        for (int ch = 0; ch < c; ++ch) {
          const T gv = g[(static_cast<size_t>(ch) * out_h + oy) * out_w + ox];
          T* dxc = dx.data() + static_cast<size_t>(ch) * h * w;
          dxc[ly.i0 * w + lx.i0] += static_cast<T>(w00 * gv);
          dxc[ly.i0 * w + lx.i1] += static_cast<T>(w01 * gv);
          dxc[ly.i1 * w + lx.i0] += static_cast<T>(w10 * gv);
          dxc[ly.i1 * w + lx.i1] += static_cast<T>(w11 * gv);
        }
      }
    }
  });
  return out;
}

// --------------------------------------------------------- concat / split

namespace {
// outer = product of dims before axis, inner = product after.
inline void axis_extents(const Shape& s, int axis, std::int64_t& outer, std::int64_t& inner) {
  outer = 1;
  inner = 1;
  for (int i = 0; i < axis; ++i) outer *= s[static_cast<size_t>(i)];
  for (size_t i = static_cast<size_t>(axis) + 1; i < s.size(); ++i) inner *= s[i];
}
}  // namespace

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& xs, int axis) {
  if (xs.empty()) tensor_fail("concat: empty input list");
  const int rank = xs[0].rank();
  if (axis < 0 || axis >= rank) tensor_fail("concat: axis out of range");
  Shape out_shape = xs[0].shape();
  int total = 0;
  for (const auto& x : xs) {
    if (x.rank() != rank) tensor_fail("concat: rank mismatch");
    for (int i = 0; i < rank; ++i)
      if (i != axis && x.dim(i) != out_shape[static_cast<size_t>(i)])
        tensor_fail("concat: ragged shapes " + shape_str(out_shape) + " vs " +
                    shape_str(x.shape()));
    total += x.dim(axis);
  }
  out_shape[static_cast<size_t>(axis)] = total;
  Tensor<T> out = Tensor<T>::zeros(out_shape);
  std::int64_t outer, inner;
  axis_extents(out_shape, axis, outer, inner);
  {
    T* po = out.data().data();
    std::int64_t off = 0;
    for (const auto& x : xs) {
      const std::int64_t ax = x.dim(axis);
      const T* px = x.data().data();
      for (std::int64_t o = 0; o < outer; ++o)
        std::memcpy(po + (o * total + off) * inner, px + o * ax * inner,
                    static_cast<size_t>(ax * inner) * sizeof(T));
      off += ax;
    }
  }
  std::vector<const Tensor<T>*> in_ptrs;
  for (const auto& x : xs) in_ptrs.push_back(&x);
  bool any_rg = false;
  for (const auto& x : xs) any_rg = any_rg || x.requires_grad();
  if (Tape<T>::active() && any_rg) {
    out.set_requires_grad(true);
    std::vector<const void*> ids;
    for (const auto& x : xs) ids.push_back(x.id());
    auto xs_copy = xs;
    Tape<T>::active()->record("concat", std::move(ids), {out},
                              [xs_copy, out, axis, outer, inner, total]() mutable {
      auto g = out.grad();
      std::int64_t off = 0;
      for (auto& x : xs_copy) {
        const std::int64_t ax = x.dim(axis);
        if (x.requires_grad()) {
          auto dx = x.grad();
          for (std::int64_t o = 0; o < outer; ++o) {
            const T* gs = g.data() + (o * total + off) * inner;
            T* ds = dx.data() + o * ax * inner;
            for (std::int64_t i = 0; i < ax * inner; ++i) ds[i] += gs[i];
          }
        }
        off += ax;
      }
    });
  }
  check_finite(out, "concat");
  return out;
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_half(const Tensor<T>& x, int axis) {
  if (axis < 0 || axis >= x.rank()) tensor_fail("split: axis out of range");
  const int ax = x.dim(axis);
  if (ax % 2 != 0)
    tensor_fail("split: axis size " + std::to_string(ax) + " is odd, cannot halve");
  Shape half_shape = x.shape();
  half_shape[static_cast<size_t>(axis)] = ax / 2;
  Tensor<T> a = Tensor<T>::zeros(half_shape);
  Tensor<T> b = Tensor<T>::zeros(half_shape);
  std::int64_t outer, inner;
  axis_extents(x.shape(), axis, outer, inner);
  const std::int64_t hseg = static_cast<std::int64_t>(ax / 2) * inner;
  {
    const T* px = x.data().data();
    for (std::int64_t o = 0; o < outer; ++o) {
      std::memcpy(a.data().data() + o * hseg, px + o * 2 * hseg,
                  static_cast<size_t>(hseg) * sizeof(T));
      std::memcpy(b.data().data() + o * hseg, px + o * 2 * hseg + hseg,
                  static_cast<size_t>(hseg) * sizeof(T));
    }
  }
  if (Tape<T>::active() && x.requires_grad()) {
    a.set_requires_grad(true);
    b.set_requires_grad(true);
    Tape<T>::active()->record("split", {x.id()}, {a, b},
                              [x, a, b, outer, hseg]() mutable {
      auto dx = x.grad();
      auto ga = a.grad();
      auto gb = b.grad();
      for (std::int64_t o = 0; o < outer; ++o)
        for (std::int64_t i = 0; i < hseg; ++i) {
          dx[o * 2 * hseg + i] += ga[o * hseg + i];
          dx[o * 2 * hseg + hseg + i] += gb[o * hseg + i];
        }
    });
  }
  return {a, b};
}

// ------------------------------------------------------------------- bce

template <typename T>
Tensor<T> bce_with_logits(const Tensor<T>& logits, const Tensor<T>& target) {
  if (logits.shape() != target.shape())
    tensor_fail("bce: logits " + shape_str(logits.shape()) + " vs target " +
                shape_str(target.shape()));
  const std::int64_t n = logits.size();
  if (n == 0) tensor_fail("bce: empty input");
  if (debug_checks_enabled()) {
    for (T y : target.data())
      if (y != T(0) && y != T(1)) tensor_fail("bce: target value outside {0,1}");
  }
  double acc = 0;
  {
    const T* pz = logits.data().data();
    const T* py = target.data().data();
    for (std::int64_t i = 0; i < n; ++i) {
      const double z = pz[i], y = py[i];
      acc += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    }
  }
  Tensor<T> out = Tensor<T>::scalar(static_cast<T>(acc / n));
  finish<T>("bce_with_logits", {&logits, &target}, out, [logits, target, out]() mutable {
    if (!logits.requires_grad()) return;
    const std::int64_t n = logits.size();
    const T g = out.grad()[0];
    auto dz = logits.grad();
    const T* pz = logits.data().data();
    const T* py = target.data().data();
    for (std::int64_t i = 0; i < n; ++i) {
      const double z = pz[i];
      const double s = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
      dz[i] += static_cast<T>(g * (s - py[i]) / n);
    }
  });
  return out;
}

// ------------------------------------------------------------ elementwise

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape())
    tensor_fail("add: shape mismatch " + shape_str(a.shape()) + " vs " +
                shape_str(b.shape()));
  Tensor<T> out = Tensor<T>::zeros(a.shape());
  {
    const T* pa = a.data().data();
    const T* pb = b.data().data();
    T* po = out.data().data();
    for (std::int64_t i = 0; i < a.size(); ++i) po[i] = pa[i] + pb[i];
  }
  finish<T>("add", {&a, &b}, out, [a, b, out]() mutable {
    auto g = out.grad();
    if (a.requires_grad()) {
      auto da = a.grad();
      for (std::int64_t i = 0; i < a.size(); ++i) da[i] += g[i];
    }
    if (b.requires_grad()) {
      auto db = b.grad();
      for (std::int64_t i = 0; i < b.size(); ++i) db[i] += g[i];
    }
  });
  return out;
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T c) {
  Tensor<T> out = Tensor<T>::zeros(x.shape());
  {
    const T* px = x.data().data();
    T* po = out.data().data();
    for (std::int64_t i = 0; i < x.size(); ++i) po[i] = px[i] * c;
  }
  finish<T>("scale", {&x}, out, [x, out, c]() mutable {
    if (!x.requires_grad()) return;
    auto g = out.grad();
    auto dx = x.grad();
    for (std::int64_t i = 0; i < x.size(); ++i) dx[i] += g[i] * c;
  });
  return out;
}

template <typename T>
Tensor<T> mul_mask(const Tensor<T>& x, const Tensor<T>& m) {
  if (x.rank() != 3 || m.rank() != 2 || x.dim(1) != m.dim(0) || x.dim(2) != m.dim(1))
    tensor_fail("mul_mask: expected x[C,h,w] and m[h,w], got " + shape_str(x.shape()) +
                " and " + shape_str(m.shape()));
  const int c = x.dim(0);
  const std::int64_t hw = static_cast<std::int64_t>(x.dim(1)) * x.dim(2);
  Tensor<T> out = Tensor<T>::zeros(x.shape());
  {
    const T* px = x.data().data();
    const T* pm = m.data().data();
    T* po = out.data().data();
    for (int ch = 0; ch < c; ++ch)
      for (std::int64_t i = 0; i < hw; ++i) po[ch * hw + i] = px[ch * hw + i] * pm[i];
  }
  finish<T>("mul_mask", {&x, &m}, out, [x, m, out]() mutable {
    const int c = x.dim(0);
    const std::int64_t hw = static_cast<std::int64_t>(x.dim(1)) * x.dim(2);
    auto g = out.grad();
    const T* px = x.data().data();
    const T* pm = m.data().data();
    if (x.requires_grad()) {
      auto dx = x.grad();
      for (int ch = 0; ch < c; ++ch)
        for (std::int64_t i = 0; i < hw; ++i) dx[ch * hw + i] += g[ch * hw + i] * pm[i];
    }
    if (m.requires_grad()) {
      auto dm = m.grad();
      for (int ch = 0; ch < c; ++ch)
        for (std::int64_t i = 0; i < hw; ++i) dm[i] += g[ch * hw + i] * px[ch * hw + i];
    }
  });
  return out;
}

// ----------------------------------------------------------- view-like ops

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (shape_numel(shape) != x.size())
    tensor_fail("reshape: cannot view " + shape_str(x.shape()) + " as " +
                shape_str(shape));
  Tensor<T> out = Tensor<T>::from_data(std::move(shape),
                                       std::vector<T>(x.data().begin(), x.data().end()));
  finish<T>("reshape", {&x}, out, [x, out]() mutable {
    if (!x.requires_grad()) return;
    auto g = out.grad();
    auto dx = x.grad();
    for (std::int64_t i = 0; i < x.size(); ++i) dx[i] += g[i];
  });
  return out;
}

template <typename T>
Tensor<T> transpose_last2(const Tensor<T>& x) {
  if (x.rank() != 2 && x.rank() != 3)
    tensor_fail("transpose_last2: expected rank 2 or 3, got " + shape_str(x.shape()));
  const int c = x.rank() == 3 ? x.dim(0) : 1;
  const int a = x.dim(x.rank() - 2), b = x.dim(x.rank() - 1);
  Shape out_shape = x.shape();
  out_shape[out_shape.size() - 2] = b;
  out_shape[out_shape.size() - 1] = a;
  Tensor<T> out = Tensor<T>::zeros(out_shape);
  {
    const T* px = x.data().data();
    T* po = out.data().data();
    for (int ch = 0; ch < c; ++ch) {
      const T* xc = px + static_cast<size_t>(ch) * a * b;
      T* oc = po + static_cast<size_t>(ch) * a * b;
      for (int i = 0; i < a; ++i)
        for (int j = 0; j < b; ++j) oc[j * a + i] = xc[i * b + j];
    }
  }
  finish<T>("transpose_last2", {&x}, out, [x, out, c, a, b]() mutable {
    if (!x.requires_grad()) return;
    auto g = out.grad();
    auto dx = x.grad();
    for (int ch = 0; ch < c; ++ch) {
      const T* gc = g.data() + static_cast<size_t>(ch) * a * b;
      T* dc = dx.data() + static_cast<size_t>(ch) * a * b;
      for (int i = 0; i < a; ++i)
        for (int j = 0; j < b; ++j) dc[i * b + j] += gc[j * a + i];
    }
  });
  return out;
}

// -------------------------------------------------------------- reductions

template <typename T>
Tensor<T> l2_normalize_cols(const Tensor<T>& x, T eps) {
  if (x.rank() != 2) tensor_fail("l2_normalize_cols: expected [c,n]");
  const int c = x.dim(0), n = x.dim(1);
  Tensor<T> out = Tensor<T>::zeros(x.shape());
  std::vector<T> norms(static_cast<size_t>(n));
  {
    const T* px = x.data().data();
    T* po = out.data().data();
    for (int j = 0; j < n; ++j) {
      double s = 0;
      for (int i = 0; i < c; ++i) {
        const double v = px[static_cast<size_t>(i) * n + j];
        s += v * v;
      }
      norms[static_cast<size_t>(j)] = static_cast<T>(std::sqrt(s + static_cast<double>(eps)));
    }
    for (int i = 0; i < c; ++i)
      for (int j = 0; j < n; ++j)
        po[static_cast<size_t>(i) * n + j] =
            px[static_cast<size_t>(i) * n + j] / norms[static_cast<size_t>(j)];
  }
  finish<T>("l2_normalize_cols", {&x}, out, [x, out, norms]() mutable {
    if (!x.requires_grad()) return;
    const int c = x.dim(0), n = x.dim(1);
    auto g = out.grad();
    auto dx = x.grad();
    const T* px = x.data().data();
    for (int j = 0; j < n; ++j) {
      const double nv = norms[static_cast<size_t>(j)];
      double dot = 0;
      for (int i = 0; i < c; ++i)
        dot += static_cast<double>(px[static_cast<size_t>(i) * n + j]) *
               g[static_cast<size_t>(i) * n + j];
      for (int i = 0; i < c; ++i) {
        const size_t idx = static_cast<size_t>(i) * n + j;
        dx[idx] += static_cast<T>(g[idx] / nv - px[idx] * dot / (nv * nv * nv));
      }
    }
  });
  return out;
}

template <typename T>
Tensor<T> spatial_mean(const Tensor<T>& x) {
  if (x.rank() != 3) tensor_fail("spatial_mean: expected [C,H,W]");
  const int c = x.dim(0);
  const std::int64_t hw = static_cast<std::int64_t>(x.dim(1)) * x.dim(2);
  Tensor<T> out = Tensor<T>::zeros({c});
  {
    const T* px = x.data().data();
    T* po = out.data().data();
    for (int ch = 0; ch < c; ++ch) {
      double s = 0;
      for (std::int64_t i = 0; i < hw; ++i) s += px[ch * hw + i];
      po[ch] = static_cast<T>(s / hw);
    }
  }
  finish<T>("spatial_mean", {&x}, out, [x, out]() mutable {
    if (!x.requires_grad()) return;
    const int c = x.dim(0);
    const std::int64_t hw = static_cast<std::int64_t>(x.dim(1)) * x.dim(2);
    auto g = out.grad();
    auto dx = x.grad();
    for (int ch = 0; ch < c; ++ch)
      for (std::int64_t i = 0; i < hw; ++i) dx[ch * hw + i] += g[ch] / static_cast<T>(hw);
  });
  return out;
}

template <typename T>
Tensor<T> softmax_cross_entropy(const Tensor<T>& logits, int target_index) {
  if (logits.rank() != 1) tensor_fail("softmax_cross_entropy: expected [N] logits");
  const int n = logits.dim(0);
  if (target_index < 0 || target_index >= n)
    tensor_fail("softmax_cross_entropy: target index out of range");
  const T* pz = logits.data().data();
  double mx = pz[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, static_cast<double>(pz[i]));
  double se = 0;
  for (int i = 0; i < n; ++i) se += std::exp(pz[i] - mx);
  const double lse = mx + std::log(se);
  Tensor<T> out = Tensor<T>::scalar(static_cast<T>(lse - pz[target_index]));
  finish<T>("softmax_cross_entropy", {&logits}, out, [logits, out, target_index]() mutable {
    if (!logits.requires_grad()) return;
    const int n = logits.dim(0);
    const T g = out.grad()[0];
    const T* pz = logits.data().data();
    auto dz = logits.grad();
    double mx = pz[0];
    for (int i = 1; i < n; ++i) mx = std::max(mx, static_cast<double>(pz[i]));
    double se = 0;
    for (int i = 0; i < n; ++i) se += std::exp(pz[i] - mx);
    for (int i = 0; i < n; ++i) {
      const double p = std::exp(pz[i] - mx) / se;
      dz[i] += static_cast<T>(g * (p - (i == target_index ? 1.0 : 0.0)));
    }
  });
  return out;
}

template <typename T>
Tensor<T> sum_all(const Tensor<T>& x) {
  double s = 0;
  for (T v : x.data()) s += v;
  Tensor<T> out = Tensor<T>::scalar(static_cast<T>(s));
  finish<T>("sum_all", {&x}, out, [x, out]() mutable {
    if (!x.requires_grad()) return;
    const T g = out.grad()[0];
    auto dx = x.grad();
    for (std::int64_t i = 0; i < x.size(); ++i) dx[i] += g;
  });
  return out;
}

template <typename T>
Tensor<T> mean_tensors(const std::vector<Tensor<T>>& xs) {
  if (xs.empty()) tensor_fail("mean_tensors: empty input list");
  for (const auto& x : xs)
    if (x.shape() != xs[0].shape()) tensor_fail("mean_tensors: shape mismatch");
  const std::int64_t n = xs[0].size();
  const size_t k = xs.size();
  Tensor<T> out = Tensor<T>::zeros(xs[0].shape());
  {
    T* po = out.data().data();
    for (std::int64_t i = 0; i < n; ++i) {
      double acc = 0;
      for (const auto& x : xs) acc += x.data()[static_cast<size_t>(i)];
      po[i] = static_cast<T>(acc / static_cast<double>(k));
    }
  }
  bool any_rg = false;
  for (const auto& x : xs) any_rg = any_rg || x.requires_grad();
  if (Tape<T>::active() && any_rg) {
    out.set_requires_grad(true);
    std::vector<const void*> ids;
    for (const auto& x : xs) ids.push_back(x.id());
    auto xs_copy = xs;
    Tape<T>::active()->record("mean_tensors", std::move(ids), {out}, [xs_copy, out]() mutable {
      auto g = out.grad();
      const T inv_k = T(1) / static_cast<T>(xs_copy.size());
      for (auto& x : xs_copy) {
        if (!x.requires_grad()) continue;
        auto dx = x.grad();
        for (std::int64_t i = 0; i < x.size(); ++i) dx[i] += g[i] * inv_k;
      }
    });
  }
  check_finite(out, "mean_tensors");
  return out;
}

// ---------------------------------------------------------- init helpers

template <typename T>
void fill_normal(Tensor<T>& t, Rng& rng, double stddev) {
  for (T& v : t.data()) v = static_cast<T>(rng.normal() * stddev);
}

template <typename T>
void he_init(Tensor<T>& w, Rng& rng) {
  const std::int64_t fan_in = w.size() / w.dim(0);
  fill_normal(w, rng, std::sqrt(2.0 / static_cast<double>(fan_in)));
}

// ---------------------------------------------------------- instantiation

#define DAM_INSTANTIATE_OPS(T)                                                          \
  template struct BatchNormState<T>;                                                    \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                        \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,       \
                            Pad2, Stride2);                                             \
  template Tensor<T> conv3d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,       \
                            Pad3);                                                      \
  template Tensor<T> batchnorm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,    \
                               BatchNormState<T>&, NormMode, T, T);                     \
  template Tensor<T> groupnorm(const Tensor<T>&, int, const Tensor<T>&,                 \
                               const Tensor<T>&, T);                                    \
  template Tensor<T> relu(const Tensor<T>&);                                            \
  template Tensor<T> sigmoid(const Tensor<T>&);                                         \
  template Tensor<T> upsample_bilinear(const Tensor<T>&, int, int);                     \
  template Tensor<T> concat(const std::vector<Tensor<T>>&, int);                        \
  template std::pair<Tensor<T>, Tensor<T>> split_half(const Tensor<T>&, int);           \
  template Tensor<T> bce_with_logits(const Tensor<T>&, const Tensor<T>&);               \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                           \
  template Tensor<T> scale(const Tensor<T>&, T);                                        \
  template Tensor<T> mul_mask(const Tensor<T>&, const Tensor<T>&);                      \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                  \
  template Tensor<T> transpose_last2(const Tensor<T>&);                                 \
  template Tensor<T> l2_normalize_cols(const Tensor<T>&, T);                            \
  template Tensor<T> spatial_mean(const Tensor<T>&);                                    \
  template Tensor<T> softmax_cross_entropy(const Tensor<T>&, int);                      \
  template Tensor<T> sum_all(const Tensor<T>&);                                         \
  template Tensor<T> mean_tensors(const std::vector<Tensor<T>>&);                       \
  template void fill_normal(Tensor<T>&, Rng&, double);                                  \
  template void he_init(Tensor<T>&, Rng&);

DAM_INSTANTIATE_OPS(float)
DAM_INSTANTIATE_OPS(double)

#undef DAM_INSTANTIATE_OPS

}  // namespace dam
