// OpenMP kernels. Threads split only independent output elements; every
// accumulation stays inside one thread and uses the same term order as the
// serial reference, so results are bit-identical to it for any thread count.

#include <cmath>
#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tgn/kernels.hpp"

namespace tgn::kernels {

bool parallel_available() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int parallel_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace tgn::kernels

namespace tgn::kernels::parallel {

using std::ptrdiff_t;
using std::size_t;

template <class S>
void add(const S* a, const S* b, S* y, size_t n) {
#pragma omp parallel for schedule(static)
  for (size_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

template <class S>
void mul(const S* a, const S* b, S* y, size_t n) {
#pragma omp parallel for schedule(static)
  for (size_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

template <class S>
void axpy(S alpha, const S* x, S* y, size_t n) {
#pragma omp parallel for schedule(static)
  for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <class S>
void scale(const S* x, S* y, S alpha, size_t n) {
#pragma omp parallel for schedule(static)
  for (size_t i = 0; i < n; ++i) y[i] = alpha * x[i];
}

template <class S>
void relu_fwd(const S* x, S* y, size_t n) {
#pragma omp parallel for schedule(static)
  for (size_t i = 0; i < n; ++i) y[i] = x[i] > S(0) ? x[i] : S(0);
}

template <class S>
void relu_bwd(const S* x, const S* gy, S* gx, size_t n) {
#pragma omp parallel for schedule(static)
  for (size_t i = 0; i < n; ++i) {
    if (x[i] > S(0)) gx[i] += gy[i];
  }
}

template <class S>
void graph_mix_fwd(const S* adj, const S* x, S* y, size_t rows, size_t v) {
#pragma omp parallel for schedule(static)
  for (size_t r = 0; r < rows; ++r) {
    const S* xr = x + r * v;
    S* yr = y + r * v;
    for (size_t i = 0; i < v; ++i) {
      S acc = S(0);
      const S* ai = adj + i * v;
      for (size_t j = 0; j < v; ++j) acc += ai[j] * xr[j];
      yr[i] = acc;
    }
  }
}

template <class S>
void graph_mix_bwd_adj(const S* gy, const S* x, S* gadj, size_t rows,
                       size_t v) {
#pragma omp parallel for schedule(static)
  for (size_t cell = 0; cell < v * v; ++cell) {
    const size_t i = cell / v;
    const size_t j = cell % v;
    S acc = S(0);
    for (size_t r = 0; r < rows; ++r) acc += gy[r * v + i] * x[r * v + j];
    gadj[cell] += acc;
  }
}

template <class S>
void transpose2d(const S* a, S* at, size_t rows, size_t cols) {
#pragma omp parallel for schedule(static)
  for (size_t i = 0; i < rows; ++i)
    for (size_t j = 0; j < cols; ++j) at[j * rows + i] = a[i * cols + j];
}

template <class S>
void temporal_conv_fwd(const S* x, const S* w, const S* b, S* y, size_t n,
                       size_t c_in, size_t t_in, size_t v, size_t c_out,
                       size_t kt, size_t stride, size_t t_out) {
  const ptrdiff_t pad = static_cast<ptrdiff_t>((kt - 1) / 2);
// Each (nb, co, to) slab is one independent output row of length v.
#pragma omp parallel for schedule(static)
  for (size_t slab = 0; slab < n * c_out * t_out; ++slab) {
    const size_t nb = slab / (c_out * t_out);
    const size_t co = (slab / t_out) % c_out;
    const size_t to = slab % t_out;
    S* yr = y + slab * v;
    const S bias = b ? b[co] : S(0);
    for (size_t u = 0; u < v; ++u) yr[u] = bias;
    for (size_t ci = 0; ci < c_in; ++ci) {
      for (size_t k = 0; k < kt; ++k) {
        const ptrdiff_t ti = static_cast<ptrdiff_t>(to * stride + k) - pad;
        if (ti < 0 || ti >= static_cast<ptrdiff_t>(t_in)) continue;
        const S wk = w[(co * c_in + ci) * kt + k];
        const S* xr =
            x + ((nb * c_in + ci) * t_in + static_cast<size_t>(ti)) * v;
        for (size_t u = 0; u < v; ++u) yr[u] += wk * xr[u];
      }
    }
  }
}

template <class S>
void temporal_conv_bwd_x(const S* gy, const S* w, S* gx, size_t n, size_t c_in,
                         size_t t_in, size_t v, size_t c_out, size_t kt,
                         size_t stride, size_t t_out) {
  const ptrdiff_t pad = static_cast<ptrdiff_t>((kt - 1) / 2);
#pragma omp parallel for schedule(static)
  for (size_t slab = 0; slab < n * c_in * t_in; ++slab) {
    const size_t nb = slab / (c_in * t_in);
    const size_t ci = (slab / t_in) % c_in;
    const size_t ti = slab % t_in;
    S* gxr = gx + slab * v;
    for (size_t co = 0; co < c_out; ++co) {
      for (size_t k = 0; k < kt; ++k) {
        const ptrdiff_t num =
            static_cast<ptrdiff_t>(ti) + pad - static_cast<ptrdiff_t>(k);
        if (num < 0 || num % static_cast<ptrdiff_t>(stride) != 0) continue;
        const size_t to = static_cast<size_t>(num) / stride;
        if (to >= t_out) continue;
        const S wk = w[(co * c_in + ci) * kt + k];
        const S* gyr = gy + ((nb * c_out + co) * t_out + to) * v;
        for (size_t u = 0; u < v; ++u) gxr[u] += wk * gyr[u];
      }
    }
  }
}

template <class S>
void temporal_conv_bwd_w(const S* gy, const S* x, S* gw, size_t n, size_t c_in,
                         size_t t_in, size_t v, size_t c_out, size_t kt,
                         size_t stride, size_t t_out) {
  const ptrdiff_t pad = static_cast<ptrdiff_t>((kt - 1) / 2);
#pragma omp parallel for schedule(static)
  for (size_t cell = 0; cell < c_out * c_in * kt; ++cell) {
    const size_t co = cell / (c_in * kt);
    const size_t ci = (cell / kt) % c_in;
    const size_t k = cell % kt;
    S acc = S(0);
    for (size_t nb = 0; nb < n; ++nb) {
      for (size_t to = 0; to < t_out; ++to) {
        const ptrdiff_t ti = static_cast<ptrdiff_t>(to * stride + k) - pad;
        if (ti < 0 || ti >= static_cast<ptrdiff_t>(t_in)) continue;
        const S* gyr = gy + ((nb * c_out + co) * t_out + to) * v;
        const S* xr =
            x + ((nb * c_in + ci) * t_in + static_cast<size_t>(ti)) * v;
        for (size_t u = 0; u < v; ++u) acc += gyr[u] * xr[u];
      }
    }
    gw[cell] += acc;
  }
}

template <class S>
void temporal_conv_bwd_b(const S* gy, S* gb, size_t n, size_t c_out,
                         size_t t_out, size_t v) {
#pragma omp parallel for schedule(static)
  for (size_t co = 0; co < c_out; ++co) {
    S acc = S(0);
    for (size_t nb = 0; nb < n; ++nb) {
      const S* gyr = gy + (nb * c_out + co) * t_out * v;
      for (size_t i = 0; i < t_out * v; ++i) acc += gyr[i];
    }
    gb[co] += acc;
  }
}

template <class S>
void bn_stats(const S* x, S* mean, S* var, size_t n, size_t c, size_t t,
              size_t v) {
  const size_t tv = t * v;
  const S inv_m = S(1) / static_cast<S>(n * tv);
#pragma omp parallel for schedule(static)
  for (size_t ch = 0; ch < c; ++ch) {
    S s = S(0);
    for (size_t nb = 0; nb < n; ++nb) {
      const S* xr = x + (nb * c + ch) * tv;
      for (size_t i = 0; i < tv; ++i) s += xr[i];
    }
    const S mu = s * inv_m;
    S sq = S(0);
    for (size_t nb = 0; nb < n; ++nb) {
      const S* xr = x + (nb * c + ch) * tv;
      for (size_t i = 0; i < tv; ++i) {
        const S d = xr[i] - mu;
        sq += d * d;
      }
    }
    mean[ch] = mu;
    var[ch] = sq * inv_m;
  }
}

template <class S>
void bn_apply(const S* x, const S* mean, const S* var, const S* gamma,
              const S* beta, S eps, S* y, size_t n, size_t c, size_t t,
              size_t v) {
  const size_t tv = t * v;
#pragma omp parallel for schedule(static)
  for (size_t row = 0; row < n * c; ++row) {
    const size_t ch = row % c;
    const S inv_sigma = S(1) / std::sqrt(var[ch] + eps);
    const S g = gamma[ch] * inv_sigma;
    const S b = beta[ch] - mean[ch] * g;
    const S* xr = x + row * tv;
    S* yr = y + row * tv;
    for (size_t i = 0; i < tv; ++i) yr[i] = g * xr[i] + b;
  }
}

template <class S>
void bn_bwd_train(const S* x, const S* mean, const S* var, const S* gamma,
                  const S* gy, S eps, S* gx, S* ggamma, S* gbeta, size_t n,
                  size_t c, size_t t, size_t v) {
  const size_t tv = t * v;
  const S inv_m = S(1) / static_cast<S>(n * tv);
#pragma omp parallel for schedule(static)
  for (size_t ch = 0; ch < c; ++ch) {
    const S inv_sigma = S(1) / std::sqrt(var[ch] + eps);
    S s1 = S(0), s2 = S(0);
    for (size_t nb = 0; nb < n; ++nb) {
      const S* xr = x + (nb * c + ch) * tv;
      const S* gr = gy + (nb * c + ch) * tv;
      for (size_t i = 0; i < tv; ++i) {
        s1 += gr[i];
        s2 += gr[i] * (xr[i] - mean[ch]) * inv_sigma;
      }
    }
    gbeta[ch] += s1;
    ggamma[ch] += s2;
    const S gscale = gamma[ch] * inv_sigma;
    for (size_t nb = 0; nb < n; ++nb) {
      const S* xr = x + (nb * c + ch) * tv;
      const S* gr = gy + (nb * c + ch) * tv;
      S* or_ = gx + (nb * c + ch) * tv;
      for (size_t i = 0; i < tv; ++i) {
        const S xhat = (xr[i] - mean[ch]) * inv_sigma;
        or_[i] += gscale * (gr[i] - inv_m * s1 - xhat * inv_m * s2);
      }
    }
  }
}

template <class S>
void bn_bwd_eval(const S* x, const S* mean, const S* var, const S* gamma,
                 const S* gy, S eps, S* gx, S* ggamma, S* gbeta, size_t n,
                 size_t c, size_t t, size_t v) {
  const size_t tv = t * v;
#pragma omp parallel for schedule(static)
  for (size_t ch = 0; ch < c; ++ch) {
    const S inv_sigma = S(1) / std::sqrt(var[ch] + eps);
    S s1 = S(0), s2 = S(0);
    for (size_t nb = 0; nb < n; ++nb) {
      const S* xr = x + (nb * c + ch) * tv;
      const S* gr = gy + (nb * c + ch) * tv;
      for (size_t i = 0; i < tv; ++i) {
        s1 += gr[i];
        s2 += gr[i] * (xr[i] - mean[ch]) * inv_sigma;
      }
    }
    gbeta[ch] += s1;
    ggamma[ch] += s2;
    const S gscale = gamma[ch] * inv_sigma;
    for (size_t nb = 0; nb < n; ++nb) {
      const S* gr = gy + (nb * c + ch) * tv;
      S* or_ = gx + (nb * c + ch) * tv;
      for (size_t i = 0; i < tv; ++i) or_[i] += gscale * gr[i];
    }
  }
}

template <class S>
void gap_fwd(const S* x, S* y, size_t n, size_t c, size_t tv) {
  const S inv = S(1) / static_cast<S>(tv);
#pragma omp parallel for schedule(static)
  for (size_t row = 0; row < n * c; ++row) {
    const S* xr = x + row * tv;
    S acc = S(0);
    for (size_t i = 0; i < tv; ++i) acc += xr[i];
    y[row] = acc * inv;
  }
}

template <class S>
void gap_bwd(const S* gy, S* gx, size_t n, size_t c, size_t tv) {
  const S inv = S(1) / static_cast<S>(tv);
#pragma omp parallel for schedule(static)
  for (size_t row = 0; row < n * c; ++row) {
    const S g = gy[row] * inv;
    S* gr = gx + row * tv;
    for (size_t i = 0; i < tv; ++i) gr[i] += g;
  }
}

template <class S>
void linear_fwd(const S* x, const S* w, const S* b, S* y, size_t n,
                size_t in_f, size_t out_f) {
#pragma omp parallel for schedule(static)
  for (size_t nb = 0; nb < n; ++nb) {
    const S* xr = x + nb * in_f;
    for (size_t o = 0; o < out_f; ++o) {
      const S* wr = w + o * in_f;
      S acc = b ? b[o] : S(0);
      for (size_t i = 0; i < in_f; ++i) acc += wr[i] * xr[i];
      y[nb * out_f + o] = acc;
    }
  }
}

template <class S>
void linear_bwd_x(const S* gy, const S* w, S* gx, size_t n, size_t in_f,
                  size_t out_f) {
#pragma omp parallel for schedule(static)
  for (size_t nb = 0; nb < n; ++nb) {
    const S* gr = gy + nb * out_f;
    S* gxr = gx + nb * in_f;
    for (size_t i = 0; i < in_f; ++i) {
      S acc = S(0);
      for (size_t o = 0; o < out_f; ++o) acc += gr[o] * w[o * in_f + i];
      gxr[i] += acc;
    }
  }
}

template <class S>
void linear_bwd_w(const S* gy, const S* x, S* gw, size_t n, size_t in_f,
                  size_t out_f) {
#pragma omp parallel for schedule(static)
  for (size_t cell = 0; cell < out_f * in_f; ++cell) {
    const size_t o = cell / in_f;
    const size_t i = cell % in_f;
    S acc = S(0);
    for (size_t nb = 0; nb < n; ++nb)
      acc += gy[nb * out_f + o] * x[nb * in_f + i];
    gw[cell] += acc;
  }
}

template <class S>
void linear_bwd_b(const S* gy, S* gb, size_t n, size_t out_f) {
#pragma omp parallel for schedule(static)
  for (size_t o = 0; o < out_f; ++o) {
    S acc = S(0);
    for (size_t nb = 0; nb < n; ++nb) acc += gy[nb * out_f + o];
    gb[o] += acc;
  }
}

template <class S>
void softmax_fwd(const S* x, S* y, size_t n, size_t k) {
#pragma omp parallel for schedule(static)
  for (size_t r = 0; r < n; ++r) {
    const S* xr = x + r * k;
    S* yr = y + r * k;
    S m = xr[0];
    for (size_t i = 1; i < k; ++i) m = xr[i] > m ? xr[i] : m;
    S z = S(0);
    for (size_t i = 0; i < k; ++i) {
      yr[i] = std::exp(xr[i] - m);
      z += yr[i];
    }
    const S inv = S(1) / z;
    for (size_t i = 0; i < k; ++i) yr[i] *= inv;
  }
}

template <class S>
void softmax_bwd(const S* y, const S* gy, S* gx, size_t n, size_t k) {
#pragma omp parallel for schedule(static)
  for (size_t r = 0; r < n; ++r) {
    const S* yr = y + r * k;
    const S* gr = gy + r * k;
    S dot = S(0);
    for (size_t i = 0; i < k; ++i) dot += gr[i] * yr[i];
    S* gxr = gx + r * k;
    for (size_t i = 0; i < k; ++i) gxr[i] += yr[i] * (gr[i] - dot);
  }
}

template <class S>
void gather_cols_fwd(const S* x, S* y, size_t rows, size_t v_in,
                     const size_t* idx, size_t v_out) {
#pragma omp parallel for schedule(static)
  for (size_t r = 0; r < rows; ++r) {
    const S* xr = x + r * v_in;
    S* yr = y + r * v_out;
    for (size_t s = 0; s < v_out; ++s) yr[s] = xr[idx[s]];
  }
}

template <class S>
void gather_cols_bwd(const S* gy, S* gx, size_t rows, size_t v_in,
                     const size_t* idx, size_t v_out) {
// Rows are independent; idx entries are distinct, so no write collides.
#pragma omp parallel for schedule(static)
  for (size_t r = 0; r < rows; ++r) {
    const S* gr = gy + r * v_out;
    S* gxr = gx + r * v_in;
    for (size_t s = 0; s < v_out; ++s) gxr[idx[s]] += gr[s];
  }
}

template <class S>
void fold_persons_fwd(const S* x, S* y, size_t n, size_t c, size_t t, size_t v,
                      size_t m) {
#pragma omp parallel for schedule(static)
  for (size_t slab = 0; slab < n * m * c * t; ++slab) {
    const size_t nb = slab / (m * c * t);
    const size_t p = (slab / (c * t)) % m;
    const size_t ch = (slab / t) % c;
    const size_t ts = slab % t;
    const S* xr = x + (((nb * c + ch) * t + ts) * v) * m;
    S* yr = y + slab * v;
    for (size_t u = 0; u < v; ++u) yr[u] = xr[u * m + p];
  }
}

template <class S>
void fold_persons_bwd(const S* gy, S* gx, size_t n, size_t c, size_t t,
                      size_t v, size_t m) {
// Parallel over the gradient destination: each (nb, ch, ts, u) row of m
// person entries is written by exactly one thread.
#pragma omp parallel for schedule(static)
  for (size_t slab = 0; slab < n * c * t; ++slab) {
    const size_t nb = slab / (c * t);
    const size_t ch = (slab / t) % c;
    const size_t ts = slab % t;
    S* gxr = gx + slab * v * m;
    for (size_t p = 0; p < m; ++p) {
      const S* gr = gy + (((nb * m + p) * c + ch) * t + ts) * v;
      for (size_t u = 0; u < v; ++u) gxr[u * m + p] += gr[u];
    }
  }
}

template <class S>
void person_mean_fwd(const S* x, S* y, size_t n, size_t m, size_t c) {
  const S inv = S(1) / static_cast<S>(m);
#pragma omp parallel for schedule(static)
  for (size_t cell = 0; cell < n * c; ++cell) {
    const size_t nb = cell / c;
    const size_t ch = cell % c;
    S acc = S(0);
    for (size_t p = 0; p < m; ++p) acc += x[(nb * m + p) * c + ch];
    y[cell] = acc * inv;
  }
}

template <class S>
void person_mean_bwd(const S* gy, S* gx, size_t n, size_t m, size_t c) {
  const S inv = S(1) / static_cast<S>(m);
#pragma omp parallel for schedule(static)
  for (size_t row = 0; row < n * m; ++row) {
    const size_t nb = row / m;
    for (size_t ch = 0; ch < c; ++ch) gx[row * c + ch] += gy[nb * c + ch] * inv;
  }
}

#include "kernel_instantiations.h"
TGN_INSTANTIATE_KERNELS(float)
TGN_INSTANTIATE_KERNELS(double)

}  // namespace tgn::kernels::parallel
