// Reference kernels: plain sequential loops, written for clarity.
//
// Contract shared with the parallel backend: every output element is the
// result of the same sequence of floating-point operations in the same
// order, so the two backends agree bit for bit. Accumulation orders are
// fixed per output element as: temporal conv (c_in, k) ascending; its
// weight gradient (n, t_out, v) ascending; graph mix j ascending; its
// adjacency gradient r ascending; linear in_f/out_f ascending; reductions
// over (n, t, v) in row-major order.

#include <cmath>
#include <cstddef>

#include "tgn/kernels.hpp"

namespace tgn::kernels::serial {

template <class S>
void add(const S* a, const S* b, S* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

template <class S>
void mul(const S* a, const S* b, S* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

template <class S>
void axpy(S alpha, const S* x, S* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <class S>
void scale(const S* x, S* y, S alpha, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = alpha * x[i];
}

template <class S>
void relu_fwd(const S* x, S* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > S(0) ? x[i] : S(0);
}

template <class S>
void relu_bwd(const S* x, const S* gy, S* gx, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] > S(0)) gx[i] += gy[i];
  }
}

template <class S>
void graph_mix_fwd(const S* adj, const S* x, S* y, std::size_t rows,
                   std::size_t v) {
  for (std::size_t r = 0; r < rows; ++r) {
    const S* xr = x + r * v;
    S* yr = y + r * v;
    for (std::size_t i = 0; i < v; ++i) {
      S acc = S(0);
      const S* ai = adj + i * v;
      for (std::size_t j = 0; j < v; ++j) acc += ai[j] * xr[j];
      yr[i] = acc;
    }
  }
}

template <class S>
void graph_mix_bwd_adj(const S* gy, const S* x, S* gadj, std::size_t rows,
                       std::size_t v) {
  for (std::size_t i = 0; i < v; ++i) {
    for (std::size_t j = 0; j < v; ++j) {
      S acc = S(0);
      for (std::size_t r = 0; r < rows; ++r) acc += gy[r * v + i] * x[r * v + j];
      gadj[i * v + j] += acc;
    }
  }
}

template <class S>
void transpose2d(const S* a, S* at, std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) at[j * rows + i] = a[i * cols + j];
}

template <class S>
void temporal_conv_fwd(const S* x, const S* w, const S* b, S* y, std::size_t n,
                       std::size_t c_in, std::size_t t_in, std::size_t v,
                       std::size_t c_out, std::size_t kt, std::size_t stride,
                       std::size_t t_out) {
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>((kt - 1) / 2);
  for (std::size_t nb = 0; nb < n; ++nb) {
    for (std::size_t co = 0; co < c_out; ++co) {
      for (std::size_t to = 0; to < t_out; ++to) {
        S* yr = y + ((nb * c_out + co) * t_out + to) * v;
        const S bias = b ? b[co] : S(0);
        for (std::size_t u = 0; u < v; ++u) yr[u] = bias;
        for (std::size_t ci = 0; ci < c_in; ++ci) {
          for (std::size_t k = 0; k < kt; ++k) {
            const std::ptrdiff_t ti =
                static_cast<std::ptrdiff_t>(to * stride + k) - pad;
            if (ti < 0 || ti >= static_cast<std::ptrdiff_t>(t_in)) continue;
            const S wk = w[(co * c_in + ci) * kt + k];
            const S* xr = x + ((nb * c_in + ci) * t_in +
                               static_cast<std::size_t>(ti)) *
                                  v;
            for (std::size_t u = 0; u < v; ++u) yr[u] += wk * xr[u];
          }
        }
      }
    }
  }
}

template <class S>
void temporal_conv_bwd_x(const S* gy, const S* w, S* gx, std::size_t n,
                         std::size_t c_in, std::size_t t_in, std::size_t v,
                         std::size_t c_out, std::size_t kt, std::size_t stride,
                         std::size_t t_out) {
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>((kt - 1) / 2);
  for (std::size_t nb = 0; nb < n; ++nb) {
    for (std::size_t ci = 0; ci < c_in; ++ci) {
      for (std::size_t ti = 0; ti < t_in; ++ti) {
        S* gxr = gx + ((nb * c_in + ci) * t_in + ti) * v;
        for (std::size_t co = 0; co < c_out; ++co) {
          for (std::size_t k = 0; k < kt; ++k) {
            // to * stride + k - pad == ti
            const std::ptrdiff_t num =
                static_cast<std::ptrdiff_t>(ti) + pad -
                static_cast<std::ptrdiff_t>(k);
            if (num < 0 || num % static_cast<std::ptrdiff_t>(stride) != 0)
              continue;
            const std::size_t to = static_cast<std::size_t>(num) / stride;
            if (to >= t_out) continue;
            const S wk = w[(co * c_in + ci) * kt + k];
            const S* gyr = gy + ((nb * c_out + co) * t_out + to) * v;
            for (std::size_t u = 0; u < v; ++u) gxr[u] += wk * gyr[u];
          }
        }
      }
    }
  }
}

template <class S>
void temporal_conv_bwd_w(const S* gy, const S* x, S* gw, std::size_t n,
                         std::size_t c_in, std::size_t t_in, std::size_t v,
                         std::size_t c_out, std::size_t kt, std::size_t stride,
                         std::size_t t_out) {
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>((kt - 1) / 2);
  for (std::size_t co = 0; co < c_out; ++co) {
    for (std::size_t ci = 0; ci < c_in; ++ci) {
      for (std::size_t k = 0; k < kt; ++k) {
        S acc = S(0);
        for (std::size_t nb = 0; nb < n; ++nb) {
          for (std::size_t to = 0; to < t_out; ++to) {
            const std::ptrdiff_t ti =
                static_cast<std::ptrdiff_t>(to * stride + k) - pad;
            if (ti < 0 || ti >= static_cast<std::ptrdiff_t>(t_in)) continue;
            const S* gyr = gy + ((nb * c_out + co) * t_out + to) * v;
            const S* xr = x + ((nb * c_in + ci) * t_in +
                               static_cast<std::size_t>(ti)) *
                                  v;
            for (std::size_t u = 0; u < v; ++u) acc += gyr[u] * xr[u];
          }
        }
        gw[(co * c_in + ci) * kt + k] += acc;
      }
    }
  }
}

template <class S>
void temporal_conv_bwd_b(const S* gy, S* gb, std::size_t n, std::size_t c_out,
                         std::size_t t_out, std::size_t v) {
  for (std::size_t co = 0; co < c_out; ++co) {
    S acc = S(0);
    for (std::size_t nb = 0; nb < n; ++nb) {
      const S* gyr = gy + (nb * c_out + co) * t_out * v;
      for (std::size_t i = 0; i < t_out * v; ++i) acc += gyr[i];
    }
    gb[co] += acc;
  }
}

template <class S>
void bn_stats(const S* x, S* mean, S* var, std::size_t n, std::size_t c,
              std::size_t t, std::size_t v) {
  const std::size_t tv = t * v;
  const S inv_m = S(1) / static_cast<S>(n * tv);
  for (std::size_t ch = 0; ch < c; ++ch) {
    S s = S(0);
    for (std::size_t nb = 0; nb < n; ++nb) {
      const S* xr = x + (nb * c + ch) * tv;
      for (std::size_t i = 0; i < tv; ++i) s += xr[i];
    }
    const S mu = s * inv_m;
    S sq = S(0);
    for (std::size_t nb = 0; nb < n; ++nb) {
      const S* xr = x + (nb * c + ch) * tv;
      for (std::size_t i = 0; i < tv; ++i) {
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
              const S* beta, S eps, S* y, std::size_t n, std::size_t c,
              std::size_t t, std::size_t v) {
  const std::size_t tv = t * v;
  for (std::size_t nb = 0; nb < n; ++nb) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const S inv_sigma = S(1) / std::sqrt(var[ch] + eps);
      const S g = gamma[ch] * inv_sigma;
      const S b = beta[ch] - mean[ch] * g;
      const S* xr = x + (nb * c + ch) * tv;
      S* yr = y + (nb * c + ch) * tv;
      for (std::size_t i = 0; i < tv; ++i) yr[i] = g * xr[i] + b;
    }
  }
}

template <class S>
void bn_bwd_train(const S* x, const S* mean, const S* var, const S* gamma,
                  const S* gy, S eps, S* gx, S* ggamma, S* gbeta,
                  std::size_t n, std::size_t c, std::size_t t, std::size_t v) {
  const std::size_t tv = t * v;
  const S inv_m = S(1) / static_cast<S>(n * tv);
  for (std::size_t ch = 0; ch < c; ++ch) {
    const S inv_sigma = S(1) / std::sqrt(var[ch] + eps);
    // s1 = sum gy, s2 = sum gy * xhat, accumulated in row-major order.
    S s1 = S(0), s2 = S(0);
    for (std::size_t nb = 0; nb < n; ++nb) {
      const S* xr = x + (nb * c + ch) * tv;
      const S* gr = gy + (nb * c + ch) * tv;
      for (std::size_t i = 0; i < tv; ++i) {
        s1 += gr[i];
        s2 += gr[i] * (xr[i] - mean[ch]) * inv_sigma;
      }
    }
    gbeta[ch] += s1;
    ggamma[ch] += s2;
    const S gscale = gamma[ch] * inv_sigma;
    for (std::size_t nb = 0; nb < n; ++nb) {
      const S* xr = x + (nb * c + ch) * tv;
      const S* gr = gy + (nb * c + ch) * tv;
      S* or_ = gx + (nb * c + ch) * tv;
      for (std::size_t i = 0; i < tv; ++i) {
        const S xhat = (xr[i] - mean[ch]) * inv_sigma;
        or_[i] += gscale * (gr[i] - inv_m * s1 - xhat * inv_m * s2);
      }
    }
  }
}

template <class S>
void bn_bwd_eval(const S* x, const S* mean, const S* var, const S* gamma,
                 const S* gy, S eps, S* gx, S* ggamma, S* gbeta, std::size_t n,
                 std::size_t c, std::size_t t, std::size_t v) {
  const std::size_t tv = t * v;
  for (std::size_t ch = 0; ch < c; ++ch) {
    const S inv_sigma = S(1) / std::sqrt(var[ch] + eps);
    S s1 = S(0), s2 = S(0);
    for (std::size_t nb = 0; nb < n; ++nb) {
      const S* xr = x + (nb * c + ch) * tv;
      const S* gr = gy + (nb * c + ch) * tv;
      for (std::size_t i = 0; i < tv; ++i) {
        s1 += gr[i];
        s2 += gr[i] * (xr[i] - mean[ch]) * inv_sigma;
      }
    }
    gbeta[ch] += s1;
    ggamma[ch] += s2;
    const S gscale = gamma[ch] * inv_sigma;
    for (std::size_t nb = 0; nb < n; ++nb) {
      const S* gr = gy + (nb * c + ch) * tv;
      S* or_ = gx + (nb * c + ch) * tv;
      for (std::size_t i = 0; i < tv; ++i) or_[i] += gscale * gr[i];
    }
  }
}

template <class S>
void gap_fwd(const S* x, S* y, std::size_t n, std::size_t c, std::size_t tv) {
  const S inv = S(1) / static_cast<S>(tv);
  for (std::size_t nb = 0; nb < n; ++nb) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const S* xr = x + (nb * c + ch) * tv;
      S acc = S(0);
      for (std::size_t i = 0; i < tv; ++i) acc += xr[i];
      y[nb * c + ch] = acc * inv;
    }
  }
}

template <class S>
void gap_bwd(const S* gy, S* gx, std::size_t n, std::size_t c, std::size_t tv) {
  const S inv = S(1) / static_cast<S>(tv);
  for (std::size_t nb = 0; nb < n; ++nb) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const S g = gy[nb * c + ch] * inv;
      S* gr = gx + (nb * c + ch) * tv;
      for (std::size_t i = 0; i < tv; ++i) gr[i] += g;
    }
  }
}

template <class S>
void linear_fwd(const S* x, const S* w, const S* b, S* y, std::size_t n,
                std::size_t in_f, std::size_t out_f) {
  for (std::size_t nb = 0; nb < n; ++nb) {
    const S* xr = x + nb * in_f;
    for (std::size_t o = 0; o < out_f; ++o) {
      const S* wr = w + o * in_f;
      S acc = b ? b[o] : S(0);
      for (std::size_t i = 0; i < in_f; ++i) acc += wr[i] * xr[i];
      y[nb * out_f + o] = acc;
    }
  }
}

template <class S>
void linear_bwd_x(const S* gy, const S* w, S* gx, std::size_t n,
                  std::size_t in_f, std::size_t out_f) {
  for (std::size_t nb = 0; nb < n; ++nb) {
    const S* gr = gy + nb * out_f;
    S* gxr = gx + nb * in_f;
    for (std::size_t i = 0; i < in_f; ++i) {
      S acc = S(0);
      for (std::size_t o = 0; o < out_f; ++o) acc += gr[o] * w[o * in_f + i];
      gxr[i] += acc;
    }
  }
}

template <class S>
void linear_bwd_w(const S* gy, const S* x, S* gw, std::size_t n,
                  std::size_t in_f, std::size_t out_f) {
  for (std::size_t o = 0; o < out_f; ++o) {
    for (std::size_t i = 0; i < in_f; ++i) {
      S acc = S(0);
      for (std::size_t nb = 0; nb < n; ++nb)
        acc += gy[nb * out_f + o] * x[nb * in_f + i];
      gw[o * in_f + i] += acc;
    }
  }
}

template <class S>
void linear_bwd_b(const S* gy, S* gb, std::size_t n, std::size_t out_f) {
  for (std::size_t o = 0; o < out_f; ++o) {
    S acc = S(0);
    for (std::size_t nb = 0; nb < n; ++nb) acc += gy[nb * out_f + o];
    gb[o] += acc;
  }
}

template <class S>
void softmax_fwd(const S* x, S* y, std::size_t n, std::size_t k) {
  for (std::size_t r = 0; r < n; ++r) {
    const S* xr = x + r * k;
    S* yr = y + r * k;
    S m = xr[0];
    for (std::size_t i = 1; i < k; ++i) m = xr[i] > m ? xr[i] : m;
    S z = S(0);
    for (std::size_t i = 0; i < k; ++i) {
      yr[i] = std::exp(xr[i] - m);
      z += yr[i];
    }
    const S inv = S(1) / z;
    for (std::size_t i = 0; i < k; ++i) yr[i] *= inv;
  }
}

template <class S>
void softmax_bwd(const S* y, const S* gy, S* gx, std::size_t n, std::size_t k) {
  for (std::size_t r = 0; r < n; ++r) {
    const S* yr = y + r * k;
    const S* gr = gy + r * k;
    S dot = S(0);
    for (std::size_t i = 0; i < k; ++i) dot += gr[i] * yr[i];
    S* gxr = gx + r * k;
    for (std::size_t i = 0; i < k; ++i) gxr[i] += yr[i] * (gr[i] - dot);
  }
}

template <class S>
void gather_cols_fwd(const S* x, S* y, std::size_t rows, std::size_t v_in,
                     const std::size_t* idx, std::size_t v_out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const S* xr = x + r * v_in;
    S* yr = y + r * v_out;
    for (std::size_t s = 0; s < v_out; ++s) yr[s] = xr[idx[s]];
  }
}

template <class S>
void gather_cols_bwd(const S* gy, S* gx, std::size_t rows, std::size_t v_in,
                     const std::size_t* idx, std::size_t v_out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const S* gr = gy + r * v_out;
    S* gxr = gx + r * v_in;
    for (std::size_t s = 0; s < v_out; ++s) gxr[idx[s]] += gr[s];
  }
}

template <class S>
void fold_persons_fwd(const S* x, S* y, std::size_t n, std::size_t c,
                      std::size_t t, std::size_t v, std::size_t m) {
  for (std::size_t nb = 0; nb < n; ++nb) {
    for (std::size_t p = 0; p < m; ++p) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t ts = 0; ts < t; ++ts) {
          const S* xr = x + (((nb * c + ch) * t + ts) * v) * m;
          S* yr = y + (((nb * m + p) * c + ch) * t + ts) * v;
          for (std::size_t u = 0; u < v; ++u) yr[u] = xr[u * m + p];
        }
      }
    }
  }
}

template <class S>
void fold_persons_bwd(const S* gy, S* gx, std::size_t n, std::size_t c,
                      std::size_t t, std::size_t v, std::size_t m) {
  for (std::size_t nb = 0; nb < n; ++nb) {
    for (std::size_t p = 0; p < m; ++p) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t ts = 0; ts < t; ++ts) {
          const S* gr = gy + (((nb * m + p) * c + ch) * t + ts) * v;
          S* gxr = gx + (((nb * c + ch) * t + ts) * v) * m;
          for (std::size_t u = 0; u < v; ++u) gxr[u * m + p] += gr[u];
        }
      }
    }
  }
}

template <class S>
void person_mean_fwd(const S* x, S* y, std::size_t n, std::size_t m,
                     std::size_t c) {
  const S inv = S(1) / static_cast<S>(m);
  for (std::size_t nb = 0; nb < n; ++nb) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      S acc = S(0);
      for (std::size_t p = 0; p < m; ++p) acc += x[(nb * m + p) * c + ch];
      y[nb * c + ch] = acc * inv;
    }
  }
}

template <class S>
void person_mean_bwd(const S* gy, S* gx, std::size_t n, std::size_t m,
                     std::size_t c) {
  const S inv = S(1) / static_cast<S>(m);
  for (std::size_t nb = 0; nb < n; ++nb) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const S g = gy[nb * c + ch] * inv;
      for (std::size_t p = 0; p < m; ++p) gx[(nb * m + p) * c + ch] += g;
    }
  }
}

#include "kernel_instantiations.h"
TGN_INSTANTIATE_KERNELS(float)
TGN_INSTANTIATE_KERNELS(double)

}  // namespace tgn::kernels::serial
