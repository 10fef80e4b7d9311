// Backend selection and the dispatch layer the op library calls into.

#include "tgn/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace tgn::kernels {

namespace {

Backend initial_backend() {
  if (const char* env = std::getenv("TGN_BACKEND")) {
    if (std::strcmp(env, "serial") == 0) return Backend::serial;
    if (std::strcmp(env, "parallel") == 0) return Backend::parallel;
  }
  return parallel_available() ? Backend::parallel : Backend::serial;
}

std::atomic<Backend> g_backend{initial_backend()};

}  // namespace

Backend backend() { return g_backend.load(std::memory_order_relaxed); }
void set_backend(Backend b) { g_backend.store(b, std::memory_order_relaxed); }

}  // namespace tgn::kernels

namespace tgn::kernels::dispatch {

#define TGN_ROUTE(call)                  \
  if (backend() == Backend::parallel) {  \
    parallel::call;                      \
  } else {                               \
    serial::call;                        \
  }                                      \
  static_assert(true, "")

template <class S>
void add(const S* a, const S* b, S* y, std::size_t n) {
  TGN_ROUTE(add(a, b, y, n));
}
template <class S>
void mul(const S* a, const S* b, S* y, std::size_t n) {
  TGN_ROUTE(mul(a, b, y, n));
}
template <class S>
void axpy(S alpha, const S* x, S* y, std::size_t n) {
  TGN_ROUTE(axpy(alpha, x, y, n));
}
template <class S>
void scale(const S* x, S* y, S alpha, std::size_t n) {
  TGN_ROUTE(scale(x, y, alpha, n));
}
template <class S>
void relu_fwd(const S* x, S* y, std::size_t n) {
  TGN_ROUTE(relu_fwd(x, y, n));
}
template <class S>
void relu_bwd(const S* x, const S* gy, S* gx, std::size_t n) {
  TGN_ROUTE(relu_bwd(x, gy, gx, n));
}
template <class S>
void graph_mix_fwd(const S* adj, const S* x, S* y, std::size_t rows,
                   std::size_t v) {
  TGN_ROUTE(graph_mix_fwd(adj, x, y, rows, v));
}
template <class S>
void graph_mix_bwd_adj(const S* gy, const S* x, S* gadj, std::size_t rows,
                       std::size_t v) {
  TGN_ROUTE(graph_mix_bwd_adj(gy, x, gadj, rows, v));
}
template <class S>
void transpose2d(const S* a, S* at, std::size_t rows, std::size_t cols) {
  TGN_ROUTE(transpose2d(a, at, rows, cols));
}
template <class S>
void temporal_conv_fwd(const S* x, const S* w, const S* b, S* y, std::size_t n,
                       std::size_t c_in, std::size_t t_in, std::size_t v,
                       std::size_t c_out, std::size_t kt, std::size_t stride,
                       std::size_t t_out) {
  TGN_ROUTE(temporal_conv_fwd(x, w, b, y, n, c_in, t_in, v, c_out, kt, stride,
                              t_out));
}
template <class S>
void temporal_conv_bwd_x(const S* gy, const S* w, S* gx, std::size_t n,
                         std::size_t c_in, std::size_t t_in, std::size_t v,
                         std::size_t c_out, std::size_t kt, std::size_t stride,
                         std::size_t t_out) {
  TGN_ROUTE(temporal_conv_bwd_x(gy, w, gx, n, c_in, t_in, v, c_out, kt, stride,
                                t_out));
}
template <class S>
void temporal_conv_bwd_w(const S* gy, const S* x, S* gw, std::size_t n,
                         std::size_t c_in, std::size_t t_in, std::size_t v,
                         std::size_t c_out, std::size_t kt, std::size_t stride,
                         std::size_t t_out) {
  TGN_ROUTE(temporal_conv_bwd_w(gy, x, gw, n, c_in, t_in, v, c_out, kt, stride,
                                t_out));
}
template <class S>
void temporal_conv_bwd_b(const S* gy, S* gb, std::size_t n, std::size_t c_out,
                         std::size_t t_out, std::size_t v) {
  TGN_ROUTE(temporal_conv_bwd_b(gy, gb, n, c_out, t_out, v));
}
template <class S>
void bn_stats(const S* x, S* mean, S* var, std::size_t n, std::size_t c,
              std::size_t t, std::size_t v) {
  TGN_ROUTE(bn_stats(x, mean, var, n, c, t, v));
}
template <class S>
void bn_apply(const S* x, const S* mean, const S* var, const S* gamma,
              const S* beta, S eps, S* y, std::size_t n, std::size_t c,
              std::size_t t, std::size_t v) {
  TGN_ROUTE(bn_apply(x, mean, var, gamma, beta, eps, y, n, c, t, v));
}
template <class S>
void bn_bwd_train(const S* x, const S* mean, const S* var, const S* gamma,
                  const S* gy, S eps, S* gx, S* ggamma, S* gbeta,
                  std::size_t n, std::size_t c, std::size_t t, std::size_t v) {
  TGN_ROUTE(
      bn_bwd_train(x, mean, var, gamma, gy, eps, gx, ggamma, gbeta, n, c, t, v));
}
template <class S>
void bn_bwd_eval(const S* x, const S* mean, const S* var, const S* gamma,
                 const S* gy, S eps, S* gx, S* ggamma, S* gbeta, std::size_t n,
                 std::size_t c, std::size_t t, std::size_t v) {
  TGN_ROUTE(
      bn_bwd_eval(x, mean, var, gamma, gy, eps, gx, ggamma, gbeta, n, c, t, v));
}
template <class S>
void gap_fwd(const S* x, S* y, std::size_t n, std::size_t c, std::size_t tv) {
  TGN_ROUTE(gap_fwd(x, y, n, c, tv));
}
template <class S>
void gap_bwd(const S* gy, S* gx, std::size_t n, std::size_t c,
             std::size_t tv) {
  TGN_ROUTE(gap_bwd(gy, gx, n, c, tv));
}
template <class S>
void linear_fwd(const S* x, const S* w, const S* b, S* y, std::size_t n,
                std::size_t in_f, std::size_t out_f) {
  TGN_ROUTE(linear_fwd(x, w, b, y, n, in_f, out_f));
}
template <class S>
void linear_bwd_x(const S* gy, const S* w, S* gx, std::size_t n,
                  std::size_t in_f, std::size_t out_f) {
  TGN_ROUTE(linear_bwd_x(gy, w, gx, n, in_f, out_f));
}
template <class S>
void linear_bwd_w(const S* gy, const S* x, S* gw, std::size_t n,
                  std::size_t in_f, std::size_t out_f) {
  TGN_ROUTE(linear_bwd_w(gy, x, gw, n, in_f, out_f));
}
template <class S>
void linear_bwd_b(const S* gy, S* gb, std::size_t n, std::size_t out_f) {
  TGN_ROUTE(linear_bwd_b(gy, gb, n, out_f));
}
template <class S>
void softmax_fwd(const S* x, S* y, std::size_t n, std::size_t k) {
  TGN_ROUTE(softmax_fwd(x, y, n, k));
}
template <class S>
void softmax_bwd(const S* y, const S* gy, S* gx, std::size_t n,
                 std::size_t k) {
  TGN_ROUTE(softmax_bwd(y, gy, gx, n, k));
}
template <class S>
void gather_cols_fwd(const S* x, S* y, std::size_t rows, std::size_t v_in,
                     const std::size_t* idx, std::size_t v_out) {
  TGN_ROUTE(gather_cols_fwd(x, y, rows, v_in, idx, v_out));
}
template <class S>
void gather_cols_bwd(const S* gy, S* gx, std::size_t rows, std::size_t v_in,
                     const std::size_t* idx, std::size_t v_out) {
  TGN_ROUTE(gather_cols_bwd(gy, gx, rows, v_in, idx, v_out));
}
template <class S>
void fold_persons_fwd(const S* x, S* y, std::size_t n, std::size_t c,
                      std::size_t t, std::size_t v, std::size_t m) {
  TGN_ROUTE(fold_persons_fwd(x, y, n, c, t, v, m));
}
template <class S>
void fold_persons_bwd(const S* gy, S* gx, std::size_t n, std::size_t c,
                      std::size_t t, std::size_t v, std::size_t m) {
  TGN_ROUTE(fold_persons_bwd(gy, gx, n, c, t, v, m));
}
template <class S>
void person_mean_fwd(const S* x, S* y, std::size_t n, std::size_t m,
                     std::size_t c) {
  TGN_ROUTE(person_mean_fwd(x, y, n, m, c));
}
template <class S>
void person_mean_bwd(const S* gy, S* gx, std::size_t n, std::size_t m,
                     std::size_t c) {
  TGN_ROUTE(person_mean_bwd(gy, gx, n, m, c));
}

#undef TGN_ROUTE

#include "kernel_instantiations.h"
TGN_INSTANTIATE_KERNELS(float)
TGN_INSTANTIATE_KERNELS(double)

}  // namespace tgn::kernels::dispatch
