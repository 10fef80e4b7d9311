// Op library: forward evaluation plus backward closures over the Tape.
// Shapes are validated here; numerical loops live in the kernel layer.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "tgn/kernels.hpp"
#include "tgn/ops.hpp"

namespace tgn::ops {

namespace kd = tgn::kernels::dispatch;
using std::size_t;

namespace {

template <class S>
void accumulate(Tensor<S>& dst, const Tensor<S>& src) {
  require(dst.same_shape(src), "gradient accumulate: shape mismatch");
  kd::axpy(S(1), src.ptr(), dst.ptr(), dst.numel());
}

template <class S>
void check_rank(const Tensor<S>& x, size_t rank, const char* what) {
  if (x.rank() != rank) {
    throw DimensionError(std::string(what) + ": expected rank " +
                         std::to_string(rank) + ", got " + x.shape_string());
  }
}

}  // namespace

template <class S>
Var add(Tape<S>& t, Var a, Var b) {
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  require(av.same_shape(bv), "add: shape mismatch " + av.shape_string() +
                                 " vs " + bv.shape_string());
  Tensor<S> y(av.shape);
  kd::add(av.ptr(), bv.ptr(), y.ptr(), y.numel());
  const bool ng = t.needs_grad(a) || t.needs_grad(b);
  return t.emplace("add", std::move(y), ng, [a, b](Tape<S>& tp, int self) {
    const auto& gy = tp.grad(Var{self});
    if (tp.needs_grad(a)) accumulate(tp.grad_buffer(a), gy);
    if (tp.needs_grad(b)) accumulate(tp.grad_buffer(b), gy);
  });
}

template <class S>
Var mul(Tape<S>& t, Var a, Var b) {
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  require(av.same_shape(bv), "mul: shape mismatch " + av.shape_string() +
                                 " vs " + bv.shape_string());
  Tensor<S> y(av.shape);
  kd::mul(av.ptr(), bv.ptr(), y.ptr(), y.numel());
  const bool ng = t.needs_grad(a) || t.needs_grad(b);
  return t.emplace("mul", std::move(y), ng, [a, b](Tape<S>& tp, int self) {
    const auto& gy = tp.grad(Var{self});
    Tensor<S> tmp(gy.shape);
    if (tp.needs_grad(a)) {
      kd::mul(gy.ptr(), tp.value(b).ptr(), tmp.ptr(), tmp.numel());
      accumulate(tp.grad_buffer(a), tmp);
    }
    if (tp.needs_grad(b)) {
      kd::mul(gy.ptr(), tp.value(a).ptr(), tmp.ptr(), tmp.numel());
      accumulate(tp.grad_buffer(b), tmp);
    }
  });
}

template <class S>
Var scale(Tape<S>& t, Var a, double alpha) {
  const auto& av = t.value(a);
  Tensor<S> y(av.shape);
  kd::scale(av.ptr(), y.ptr(), static_cast<S>(alpha), y.numel());
  return t.emplace("scale", std::move(y), t.needs_grad(a),
                   [a, alpha](Tape<S>& tp, int self) {
                     const auto& gy = tp.grad(Var{self});
                     kd::axpy(static_cast<S>(alpha), gy.ptr(),
                              tp.grad_buffer(a).ptr(), gy.numel());
                   });
}

template <class S>
Var relu(Tape<S>& t, Var x) {
  const auto& xv = t.value(x);
  Tensor<S> y(xv.shape);
  kd::relu_fwd(xv.ptr(), y.ptr(), y.numel());
  return t.emplace("relu", std::move(y), t.needs_grad(x),
                   [x](Tape<S>& tp, int self) {
                     const auto& gy = tp.grad(Var{self});
                     kd::relu_bwd(tp.value(x).ptr(), gy.ptr(),
                                  tp.grad_buffer(x).ptr(), gy.numel());
                   });
}

template <class S>
Var graph_mix(Tape<S>& t, Var adjacency, Var x) {
  const auto& av = t.value(adjacency);
  const auto& xv = t.value(x);
  check_rank(av, 2, "graph_mix adjacency");
  check_rank(xv, 4, "graph_mix input");
  const size_t v = xv.extent(3);
  require(av.extent(0) == v && av.extent(1) == v,
          "graph_mix: adjacency " + av.shape_string() +
              " does not match joint count " + std::to_string(v));
  const size_t rows = xv.numel() / v;
  Tensor<S> y(xv.shape);
  kd::graph_mix_fwd(av.ptr(), xv.ptr(), y.ptr(), rows, v);
  const bool ng = t.needs_grad(adjacency) || t.needs_grad(x);
  return t.emplace(
      "graph_mix", std::move(y), ng,
      [adjacency, x, rows, v](Tape<S>& tp, int self) {
        const auto& gy = tp.grad(Var{self});
        if (tp.needs_grad(adjacency)) {
          kd::graph_mix_bwd_adj(gy.ptr(), tp.value(x).ptr(),
                                tp.grad_buffer(adjacency).ptr(), rows, v);
        }
        if (tp.needs_grad(x)) {
          const auto& av2 = tp.value(adjacency);
          Tensor<S> at({v, v});
          kd::transpose2d(av2.ptr(), at.ptr(), v, v);
          Tensor<S> tmp(gy.shape);
          kd::graph_mix_fwd(at.ptr(), gy.ptr(), tmp.ptr(), rows, v);
          accumulate(tp.grad_buffer(x), tmp);
        }
      });
}

template <class S>
Var temporal_conv(Tape<S>& t, Var x, Var weight, std::optional<Var> bias,
                  size_t stride) {
  const auto& xv = t.value(x);
  const auto& wv = t.value(weight);
  check_rank(xv, 4, "temporal_conv input");
  check_rank(wv, 3, "temporal_conv weight");
  const size_t n = xv.extent(0), c_in = xv.extent(1), t_in = xv.extent(2),
               v = xv.extent(3);
  const size_t c_out = wv.extent(0), kt = wv.extent(2);
  if (kt % 2 == 0) {
    throw ConfigError("temporal_conv: kernel width must be odd, got " +
                      std::to_string(kt));
  }
  if (stride < 1) throw ConfigError("temporal_conv: stride must be >= 1");
  require(wv.extent(1) == c_in, "temporal_conv: weight " + wv.shape_string() +
                                    " does not accept " +
                                    std::to_string(c_in) + " input channels");
  const S* bptr = nullptr;
  if (bias) {
    const auto& bv = t.value(*bias);
    check_rank(bv, 1, "temporal_conv bias");
    require(bv.extent(0) == c_out, "temporal_conv: bias size mismatch");
    bptr = bv.ptr();
  }
  const size_t t_out = (t_in + stride - 1) / stride;
  Tensor<S> y({n, c_out, t_out, v});
  kd::temporal_conv_fwd(xv.ptr(), wv.ptr(), bptr, y.ptr(), n, c_in, t_in, v,
                        c_out, kt, stride, t_out);
  bool ng = t.needs_grad(x) || t.needs_grad(weight) ||
            (bias && t.needs_grad(*bias));
  return t.emplace(
      "temporal_conv", std::move(y), ng,
      [x, weight, bias, n, c_in, t_in, v, c_out, kt, stride,
       t_out](Tape<S>& tp, int self) {
        const auto& gy = tp.grad(Var{self});
        if (tp.needs_grad(x)) {
          kd::temporal_conv_bwd_x(gy.ptr(), tp.value(weight).ptr(),
                                  tp.grad_buffer(x).ptr(), n, c_in, t_in, v,
                                  c_out, kt, stride, t_out);
        }
        if (tp.needs_grad(weight)) {
          kd::temporal_conv_bwd_w(gy.ptr(), tp.value(x).ptr(),
                                  tp.grad_buffer(weight).ptr(), n, c_in, t_in,
                                  v, c_out, kt, stride, t_out);
        }
        if (bias && tp.needs_grad(*bias)) {
          kd::temporal_conv_bwd_b(gy.ptr(), tp.grad_buffer(*bias).ptr(), n,
                                  c_out, t_out, v);
        }
      });
}

template <class S>
Var linear(Tape<S>& t, Var x, Var weight, std::optional<Var> bias) {
  const auto& xv = t.value(x);
  const auto& wv = t.value(weight);
  check_rank(xv, 2, "linear input");
  check_rank(wv, 2, "linear weight");
  const size_t n = xv.extent(0), in_f = xv.extent(1), out_f = wv.extent(0);
  require(wv.extent(1) == in_f, "linear: weight " + wv.shape_string() +
                                    " does not accept " +
                                    std::to_string(in_f) + " features");
  const S* bptr = nullptr;
  if (bias) {
    const auto& bv = t.value(*bias);
    check_rank(bv, 1, "linear bias");
    require(bv.extent(0) == out_f, "linear: bias size mismatch");
    bptr = bv.ptr();
  }
  Tensor<S> y({n, out_f});
  kd::linear_fwd(xv.ptr(), wv.ptr(), bptr, y.ptr(), n, in_f, out_f);
  bool ng = t.needs_grad(x) || t.needs_grad(weight) ||
            (bias && t.needs_grad(*bias));
  return t.emplace(
      "linear", std::move(y), ng,
      [x, weight, bias, n, in_f, out_f](Tape<S>& tp, int self) {
        const auto& gy = tp.grad(Var{self});
        if (tp.needs_grad(x)) {
          kd::linear_bwd_x(gy.ptr(), tp.value(weight).ptr(),
                           tp.grad_buffer(x).ptr(), n, in_f, out_f);
        }
        if (tp.needs_grad(weight)) {
          kd::linear_bwd_w(gy.ptr(), tp.value(x).ptr(),
                           tp.grad_buffer(weight).ptr(), n, in_f, out_f);
        }
        if (bias && tp.needs_grad(*bias)) {
          kd::linear_bwd_b(gy.ptr(), tp.grad_buffer(*bias).ptr(), n, out_f);
        }
      });
}

template <class S>
Var batch_norm(Tape<S>& t, Var x, Var gamma, Var beta,
               BatchNormState<S>& state, Mode mode, double momentum,
               double eps) {
  const auto& xv = t.value(x);
  check_rank(xv, 4, "batch_norm input");
  const size_t n = xv.extent(0), c = xv.extent(1), tt = xv.extent(2),
               v = xv.extent(3);
  require(n * tt * v > 0, "batch_norm: zero-extent reduction axis");
  const auto& gv = t.value(gamma);
  const auto& bv = t.value(beta);
  require(gv.rank() == 1 && gv.extent(0) == c, "batch_norm: gamma shape");
  require(bv.rank() == 1 && bv.extent(0) == c, "batch_norm: beta shape");
  require(state.running_mean.numel() == c && state.running_var.numel() == c,
          "batch_norm: running stats sized for " +
              std::to_string(state.running_mean.numel()) + " channels, input has " +
              std::to_string(c));

  Tensor<S> mean({c}), var({c});
  if (mode == Mode::train) {
    kd::bn_stats(xv.ptr(), mean.ptr(), var.ptr(), n, c, tt, v);
    const S mom = static_cast<S>(momentum);
    for (size_t ch = 0; ch < c; ++ch) {
      state.running_mean[ch] =
          (S(1) - mom) * state.running_mean[ch] + mom * mean[ch];
      state.running_var[ch] =
          (S(1) - mom) * state.running_var[ch] + mom * var[ch];
    }
  } else {
    mean = state.running_mean;
    var = state.running_var;
  }

  Tensor<S> y(xv.shape);
  kd::bn_apply(xv.ptr(), mean.ptr(), var.ptr(), gv.ptr(), bv.ptr(),
               static_cast<S>(eps), y.ptr(), n, c, tt, v);
  bool ng = t.needs_grad(x) || t.needs_grad(gamma) || t.needs_grad(beta);
  return t.emplace(
      "batch_norm", std::move(y), ng,
      [x, gamma, beta, mean, var, mode, eps, n, c, tt, v](Tape<S>& tp,
                                                          int self) {
        const auto& gy = tp.grad(Var{self});
        // gamma and beta gradients fall out of both kernel variants; x's
        // gradient couples to the batch statistics only in training mode.
        Tensor<S> gg({c}), gb({c});
        Tensor<S> scratch;
        Tensor<S>* gx;
        if (tp.needs_grad(x)) {
          gx = &tp.grad_buffer(x);
        } else {
          scratch = Tensor<S>({n, c, tt, v});
          gx = &scratch;
        }
        if (mode == Mode::train) {
          kd::bn_bwd_train(tp.value(x).ptr(), mean.ptr(), var.ptr(),
                           tp.value(gamma).ptr(), gy.ptr(),
                           static_cast<S>(eps), gx->ptr(), gg.ptr(), gb.ptr(),
                           n, c, tt, v);
        } else {
          kd::bn_bwd_eval(tp.value(x).ptr(), mean.ptr(), var.ptr(),
                          tp.value(gamma).ptr(), gy.ptr(), static_cast<S>(eps),
                          gx->ptr(), gg.ptr(), gb.ptr(), n, c, tt, v);
        }
        if (tp.needs_grad(gamma)) accumulate(tp.grad_buffer(gamma), gg);
        if (tp.needs_grad(beta)) accumulate(tp.grad_buffer(beta), gb);
      });
}

template <class S>
Var global_avg_pool(Tape<S>& t, Var x) {
  const auto& xv = t.value(x);
  check_rank(xv, 4, "global_avg_pool input");
  const size_t n = xv.extent(0), c = xv.extent(1),
               tv = xv.extent(2) * xv.extent(3);
  if (tv == 0) throw DimensionError("global_avg_pool: zero-extent reduction axis");
  Tensor<S> y({n, c});
  kd::gap_fwd(xv.ptr(), y.ptr(), n, c, tv);
  return t.emplace("global_avg_pool", std::move(y), t.needs_grad(x),
                   [x, n, c, tv](Tape<S>& tp, int self) {
                     const auto& gy = tp.grad(Var{self});
                     kd::gap_bwd(gy.ptr(), tp.grad_buffer(x).ptr(), n, c, tv);
                   });
}

template <class S>
Var softmax(Tape<S>& t, Var scores) {
  const auto& xv = t.value(scores);
  check_rank(xv, 2, "softmax input");
  const size_t n = xv.extent(0), k = xv.extent(1);
  if (k == 0) throw DimensionError("softmax: zero-extent rows");
  Tensor<S> y(xv.shape);
  kd::softmax_fwd(xv.ptr(), y.ptr(), n, k);
  return t.emplace("softmax", std::move(y), t.needs_grad(scores),
                   [scores, n, k](Tape<S>& tp, int self) {
                     const auto& gy = tp.grad(Var{self});
                     kd::softmax_bwd(tp.value(Var{self}).ptr(), gy.ptr(),
                                     tp.grad_buffer(scores).ptr(), n, k);
                   });
}

template <class S>
Var cross_entropy(Tape<S>& t, Var scores, const std::vector<int>& labels) {
  const auto& xv = t.value(scores);
  check_rank(xv, 2, "cross_entropy scores");
  const size_t n = xv.extent(0), k = xv.extent(1);
  require(labels.size() == n, "cross_entropy: " + std::to_string(labels.size()) +
                                  " labels for " + std::to_string(n) + " rows");
  for (int lab : labels) {
    if (lab < 0 || static_cast<size_t>(lab) >= k) {
      throw ContractError("cross_entropy: label " + std::to_string(lab) +
                           " outside [0," + std::to_string(k) + ")");
    }
  }
  // loss = mean_r [ logsumexp(x_r) - x_r[label_r] ], computed max-shifted.
  double total = 0.0;
  for (size_t r = 0; r < n; ++r) {
    const S* xr = xv.ptr() + r * k;
    double m = static_cast<double>(xr[0]);
    for (size_t i = 1; i < k; ++i) m = std::max(m, static_cast<double>(xr[i]));
    double z = 0.0;
    for (size_t i = 0; i < k; ++i) z += std::exp(static_cast<double>(xr[i]) - m);
    total += m + std::log(z) - static_cast<double>(xr[static_cast<size_t>(labels[r])]);
  }
  Tensor<S> y({1});
  y[0] = static_cast<S>(total / static_cast<double>(n));
  auto labs = std::make_shared<const std::vector<int>>(labels);
  return t.emplace(
      "cross_entropy", std::move(y), t.needs_grad(scores),
      [scores, labs, n, k](Tape<S>& tp, int self) {
        const S g = tp.grad(Var{self})[0] / static_cast<S>(n);
        const auto& xv2 = tp.value(scores);
        Tensor<S> probs(xv2.shape);
        kd::softmax_fwd(xv2.ptr(), probs.ptr(), n, k);
        Tensor<S>& gx = tp.grad_buffer(scores);
        for (size_t r = 0; r < n; ++r) {
          S* gr = gx.ptr() + r * k;
          const S* pr = probs.ptr() + r * k;
          for (size_t i = 0; i < k; ++i) gr[i] += g * pr[i];
          gr[static_cast<size_t>((*labs)[r])] -= g;
        }
      });
}

template <class S>
Var gather_joints(Tape<S>& t, Var x, const std::vector<size_t>& subset) {
  const auto& xv = t.value(x);
  check_rank(xv, 4, "gather_joints input");
  const size_t v_in = xv.extent(3);
  require(!subset.empty(), "gather_joints: empty subset");
  std::vector<bool> seen(v_in, false);
  for (size_t j : subset) {
    require(j < v_in, "gather_joints: joint " + std::to_string(j) +
                          " outside layout of " + std::to_string(v_in));
    require(!seen[j], "gather_joints: duplicate joint " + std::to_string(j));
    seen[j] = true;
  }
  const size_t v_out = subset.size();
  const size_t rows = xv.numel() / v_in;
  Tensor<S> y({xv.extent(0), xv.extent(1), xv.extent(2), v_out});
  auto idx = std::make_shared<const std::vector<size_t>>(subset);
  kd::gather_cols_fwd(xv.ptr(), y.ptr(), rows, v_in, idx->data(), v_out);
  return t.emplace("gather_joints", std::move(y), t.needs_grad(x),
                   [x, idx, rows, v_in, v_out](Tape<S>& tp, int self) {
                     const auto& gy = tp.grad(Var{self});
                     kd::gather_cols_bwd(gy.ptr(), tp.grad_buffer(x).ptr(),
                                         rows, v_in, idx->data(), v_out);
                   });
}

template <class S>
Var slice_axis0(Tape<S>& t, Var x, size_t index) {
  const auto& xv = t.value(x);
  require(xv.rank() >= 2, "slice_axis0: need rank >= 2, got " +
                              xv.shape_string());
  const size_t k = xv.extent(0);
  require(index < k, "slice_axis0: index " + std::to_string(index) +
                         " outside leading extent " + std::to_string(k));
  std::vector<size_t> shape(xv.shape.begin() + 1, xv.shape.end());
  Tensor<S> y(shape);
  const size_t slab = y.numel();
  std::copy_n(xv.ptr() + index * slab, slab, y.ptr());
  return t.emplace("slice_axis0", std::move(y), t.needs_grad(x),
                   [x, index, slab](Tape<S>& tp, int self) {
                     const auto& gy = tp.grad(Var{self});
                     S* gx = tp.grad_buffer(x).ptr() + index * slab;
                     for (size_t i = 0; i < slab; ++i) gx[i] += gy[i];
                   });
}

template <class S>
Var bias_add(Tape<S>& t, Var x, Var b) {
  const auto& xv = t.value(x);
  const auto& bv = t.value(b);
  require(xv.rank() >= 2, "bias_add: need rank >= 2, got " + xv.shape_string());
  check_rank(bv, 1, "bias_add bias");
  const size_t n = xv.extent(0), c = xv.extent(1);
  require(bv.extent(0) == c, "bias_add: bias extent " +
                                 std::to_string(bv.extent(0)) +
                                 " != channel extent " + std::to_string(c));
  const size_t inner = xv.numel() / (n * c);
  Tensor<S> y = xv;
  for (size_t i = 0; i < n; ++i)
    for (size_t ch = 0; ch < c; ++ch) {
      S* row = y.ptr() + (i * c + ch) * inner;
      const S add = bv[ch];
      for (size_t e = 0; e < inner; ++e) row[e] += add;
    }
  return t.emplace(
      "bias_add", std::move(y), t.needs_grad(x) || t.needs_grad(b),
      [x, b, n, c, inner](Tape<S>& tp, int self) {
        const auto& gy = tp.grad(Var{self});
        if (tp.needs_grad(x)) accumulate(tp.grad_buffer(x), gy);
        if (tp.needs_grad(b)) {
          Tensor<S>& gb = tp.grad_buffer(b);
          for (size_t i = 0; i < n; ++i)
            for (size_t ch = 0; ch < c; ++ch) {
              const S* row = gy.ptr() + (i * c + ch) * inner;
              S sum = S(0);
              for (size_t e = 0; e < inner; ++e) sum += row[e];
              gb[ch] += sum;
            }
        }
      });
}

template <class S>
Var fold_persons(Tape<S>& t, Var x) {
  const auto& xv = t.value(x);
  check_rank(xv, 5, "fold_persons input");
  const size_t n = xv.extent(0), c = xv.extent(1), tt = xv.extent(2),
               v = xv.extent(3), m = xv.extent(4);
  Tensor<S> y({n * m, c, tt, v});
  kd::fold_persons_fwd(xv.ptr(), y.ptr(), n, c, tt, v, m);
  return t.emplace("fold_persons", std::move(y), t.needs_grad(x),
                   [x, n, c, tt, v, m](Tape<S>& tp, int self) {
                     const auto& gy = tp.grad(Var{self});
                     kd::fold_persons_bwd(gy.ptr(), tp.grad_buffer(x).ptr(), n,
                                          c, tt, v, m);
                   });
}

template <class S>
Var person_mean(Tape<S>& t, Var x, size_t m) {
  const auto& xv = t.value(x);
  check_rank(xv, 2, "person_mean input");
  require(m >= 1, "person_mean: person count must be >= 1");
  const size_t nm = xv.extent(0), c = xv.extent(1);
  require(nm % m == 0, "person_mean: batch extent " + std::to_string(nm) +
                           " not divisible by person count " +
                           std::to_string(m));
  const size_t n = nm / m;
  Tensor<S> y({n, c});
  kd::person_mean_fwd(xv.ptr(), y.ptr(), n, m, c);
  return t.emplace("person_mean", std::move(y), t.needs_grad(x),
                   [x, n, m, c](Tape<S>& tp, int self) {
                     const auto& gy = tp.grad(Var{self});
                     kd::person_mean_bwd(gy.ptr(), tp.grad_buffer(x).ptr(), n,
                                         m, c);
                   });
}

template <class S>
Var sum_all(Tape<S>& t, Var x) {
  const auto& xv = t.value(x);
  S total = S(0);
  for (size_t i = 0; i < xv.numel(); ++i) total += xv[i];
  Tensor<S> y({1});
  y[0] = total;
  return t.emplace("sum_all", std::move(y), t.needs_grad(x),
                   [x](Tape<S>& tp, int self) {
                     const S g = tp.grad(Var{self})[0];
                     Tensor<S>& gx = tp.grad_buffer(x);
                     for (size_t i = 0; i < gx.numel(); ++i) gx[i] += g;
                   });
}

#define TGN_INSTANTIATE_OPS(S)                                                 \
  template Var add<S>(Tape<S>&, Var, Var);                                     \
  template Var mul<S>(Tape<S>&, Var, Var);                                     \
  template Var scale<S>(Tape<S>&, Var, double);                                \
  template Var relu<S>(Tape<S>&, Var);                                         \
  template Var graph_mix<S>(Tape<S>&, Var, Var);                               \
  template Var temporal_conv<S>(Tape<S>&, Var, Var, std::optional<Var>,        \
                                std::size_t);                                  \
  template Var linear<S>(Tape<S>&, Var, Var, std::optional<Var>);              \
  template Var batch_norm<S>(Tape<S>&, Var, Var, Var, BatchNormState<S>&,      \
                             Mode, double, double);                            \
  template Var global_avg_pool<S>(Tape<S>&, Var);                              \
  template Var softmax<S>(Tape<S>&, Var);                                      \
  template Var cross_entropy<S>(Tape<S>&, Var, const std::vector<int>&);       \
  template Var slice_axis0<S>(Tape<S>&, Var, std::size_t);                     \
  template Var bias_add<S>(Tape<S>&, Var, Var);                                \
  template Var gather_joints<S>(Tape<S>&, Var,                                 \
                                const std::vector<std::size_t>&);              \
  template Var fold_persons<S>(Tape<S>&, Var);                                 \
  template Var person_mean<S>(Tape<S>&, Var, std::size_t);                     \
  template Var sum_all<S>(Tape<S>&, Var);

TGN_INSTANTIATE_OPS(float)
TGN_INSTANTIATE_OPS(double)

}  // namespace tgn::ops
