#pragma once

#include <cstddef>

namespace tgn::kernels {

/// Which implementation the dispatch layer routes to. The parallel backend
/// must produce bit-identical results to the serial one for every kernel and
/// every thread count: parallel loops only split independent output elements
/// and never reorder an accumulation.
enum class Backend { serial, parallel };

Backend backend();
void set_backend(Backend b);
bool parallel_available();
int parallel_threads();

#define TGN_DECLARE_KERNELS(NS)                                                \
  namespace NS {                                                               \
  template <class S>                                                           \
  void add(const S* a, const S* b, S* y, std::size_t n);                       \
  template <class S>                                                           \
  void mul(const S* a, const S* b, S* y, std::size_t n);                       \
  template <class S>                                                           \
  void axpy(S alpha, const S* x, S* y, std::size_t n);                         \
  template <class S>                                                           \
  void scale(const S* x, S* y, S alpha, std::size_t n);                        \
  template <class S>                                                           \
  void relu_fwd(const S* x, S* y, std::size_t n);                              \
  template <class S>                                                           \
  void relu_bwd(const S* x, const S* gy, S* gx, std::size_t n);                \
  /* x,y: [rows, v] contiguous rows; adj: [v, v]; y[r,i] = sum_j adj[i,j] x[r,j] */ \
  template <class S>                                                           \
  void graph_mix_fwd(const S* adj, const S* x, S* y, std::size_t rows,         \
                     std::size_t v);                                           \
  /* gadj[i,j] += sum_r gy[r,i] * x[r,j] */                                    \
  template <class S>                                                           \
  void graph_mix_bwd_adj(const S* gy, const S* x, S* gadj, std::size_t rows,   \
                         std::size_t v);                                       \
  template <class S>                                                           \
  void transpose2d(const S* a, S* at, std::size_t rows, std::size_t cols);     \
  /* x: [n, c_in, t_in, v]; w: [c_out, c_in, kt]; b: [c_out] or null.          \
     y[nb,co,to,u] = b[co] + sum_{ci,k} w[co,ci,k] * x[nb,ci,to*stride+k-pad,u]\
     with pad = (kt-1)/2 and zero padding outside [0, t_in). */                \
  template <class S>                                                           \
  void temporal_conv_fwd(const S* x, const S* w, const S* b, S* y,             \
                         std::size_t n, std::size_t c_in, std::size_t t_in,    \
                         std::size_t v, std::size_t c_out, std::size_t kt,     \
                         std::size_t stride, std::size_t t_out);               \
  template <class S>                                                           \
  void temporal_conv_bwd_x(const S* gy, const S* w, S* gx, std::size_t n,      \
                           std::size_t c_in, std::size_t t_in, std::size_t v,  \
                           std::size_t c_out, std::size_t kt,                  \
                           std::size_t stride, std::size_t t_out);             \
  template <class S>                                                           \
  void temporal_conv_bwd_w(const S* gy, const S* x, S* gw, std::size_t n,      \
                           std::size_t c_in, std::size_t t_in, std::size_t v,  \
                           std::size_t c_out, std::size_t kt,                  \
                           std::size_t stride, std::size_t t_out);             \
  template <class S>                                                           \
  void temporal_conv_bwd_b(const S* gy, S* gb, std::size_t n,                  \
                           std::size_t c_out, std::size_t t_out,               \
                           std::size_t v);                                     \
  /* x: [n, c, t, v]; per-channel mean and biased variance over n*t*v */       \
  template <class S>                                                           \
  void bn_stats(const S* x, S* mean, S* var, std::size_t n, std::size_t c,     \
                std::size_t t, std::size_t v);                                 \
  template <class S>                                                           \
  void bn_apply(const S* x, const S* mean, const S* var, const S* gamma,       \
                const S* beta, S eps, S* y, std::size_t n, std::size_t c,      \
                std::size_t t, std::size_t v);                                 \
  /* batch statistics are functions of x (training mode) */                    \
  template <class S>                                                           \
  void bn_bwd_train(const S* x, const S* mean, const S* var, const S* gamma,   \
                    const S* gy, S eps, S* gx, S* ggamma, S* gbeta,            \
                    std::size_t n, std::size_t c, std::size_t t,               \
                    std::size_t v);                                            \
  /* statistics are constants (eval mode, running stats) */                    \
  template <class S>                                                           \
  void bn_bwd_eval(const S* x, const S* mean, const S* var, const S* gamma,    \
                   const S* gy, S eps, S* gx, S* ggamma, S* gbeta,             \
                   std::size_t n, std::size_t c, std::size_t t,                \
                   std::size_t v);                                             \
  /* x: [n, c, tv] -> y: [n, c], mean over the last axis */                    \
  template <class S>                                                           \
  void gap_fwd(const S* x, S* y, std::size_t n, std::size_t c,                 \
               std::size_t tv);                                                \
  template <class S>                                                           \
  void gap_bwd(const S* gy, S* gx, std::size_t n, std::size_t c,               \
               std::size_t tv);                                                \
  /* x: [n, in_f]; w: [out_f, in_f]; b: [out_f] or null; y: [n, out_f] */      \
  template <class S>                                                           \
  void linear_fwd(const S* x, const S* w, const S* b, S* y, std::size_t n,     \
                  std::size_t in_f, std::size_t out_f);                        \
  template <class S>                                                           \
  void linear_bwd_x(const S* gy, const S* w, S* gx, std::size_t n,             \
                    std::size_t in_f, std::size_t out_f);                      \
  template <class S>                                                           \
  void linear_bwd_w(const S* gy, const S* x, S* gw, std::size_t n,             \
                    std::size_t in_f, std::size_t out_f);                      \
  template <class S>                                                           \
  void linear_bwd_b(const S* gy, S* gb, std::size_t n, std::size_t out_f);     \
  /* row-wise, max-shifted */                                                  \
  template <class S>                                                           \
  void softmax_fwd(const S* x, S* y, std::size_t n, std::size_t k);            \
  template <class S>                                                           \
  void softmax_bwd(const S* y, const S* gy, S* gx, std::size_t n,              \
                   std::size_t k);                                             \
  /* y[r,s] = x[r, idx[s]]; idx entries must be distinct and < v_in */         \
  template <class S>                                                           \
  void gather_cols_fwd(const S* x, S* y, std::size_t rows, std::size_t v_in,   \
                       const std::size_t* idx, std::size_t v_out);             \
  template <class S>                                                           \
  void gather_cols_bwd(const S* gy, S* gx, std::size_t rows, std::size_t v_in, \
                       const std::size_t* idx, std::size_t v_out);             \
  /* x: [n, c, t, v, m] -> y: [n*m, c, t, v], person-major within each n */    \
  template <class S>                                                           \
  void fold_persons_fwd(const S* x, S* y, std::size_t n, std::size_t c,        \
                        std::size_t t, std::size_t v, std::size_t m);          \
  template <class S>                                                           \
  void fold_persons_bwd(const S* gy, S* gx, std::size_t n, std::size_t c,      \
                        std::size_t t, std::size_t v, std::size_t m);          \
  /* x: [n*m, c] -> y: [n, c], mean over the person axis */                    \
  template <class S>                                                           \
  void person_mean_fwd(const S* x, S* y, std::size_t n, std::size_t m,         \
                       std::size_t c);                                         \
  template <class S>                                                           \
  void person_mean_bwd(const S* gy, S* gx, std::size_t n, std::size_t m,       \
                       std::size_t c);                                         \
  }

TGN_DECLARE_KERNELS(serial)
TGN_DECLARE_KERNELS(parallel)
TGN_DECLARE_KERNELS(dispatch)

#undef TGN_DECLARE_KERNELS

}  // namespace tgn::kernels
