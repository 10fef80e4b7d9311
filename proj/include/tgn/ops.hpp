#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "tgn/autograd.hpp"
#include "tgn/tensor.hpp"

namespace tgn::ops {

/// Running statistics owned by a model layer, updated as a side effect of
/// recording batch_norm in training mode. The running variance uses the same
/// biased estimator as normalization itself.
template <class S>
struct BatchNormState {
  Tensor<S> running_mean;
  Tensor<S> running_var;

  BatchNormState() = default;
  explicit BatchNormState(std::size_t channels)
      : running_mean({channels}, S(0)),
        running_var({channels}, S(1)) {}
};

template <class S>
Var add(Tape<S>& t, Var a, Var b);
template <class S>
Var mul(Tape<S>& t, Var a, Var b);
template <class S>
Var scale(Tape<S>& t, Var a, double alpha);
template <class S>
Var relu(Tape<S>& t, Var x);

/// out[n,c,t,v] = sum_j adjacency[v,j] * x[n,c,t,j]. adjacency is [V,V] and
/// V must match x's last extent; differentiable in both arguments.
template <class S>
Var graph_mix(Tape<S>& t, Var adjacency, Var x);

/// Per-joint 1-D convolution over time with zero padding (kt-1)/2, identical
/// weights for every joint. x: [N,C_in,T,V]; weight: [C_out,C_in,kt]; bias:
/// [C_out] or absent. Output time extent is ceil(T/stride). Even kernel
/// width or stride < 1 is a configuration error.
template <class S>
Var temporal_conv(Tape<S>& t, Var x, Var weight, std::optional<Var> bias,
                  std::size_t stride);

/// x: [N,F] times weight [K,F] plus bias [K] (optional) -> [N,K].
template <class S>
Var linear(Tape<S>& t, Var x, Var weight, std::optional<Var> bias);

/// Per-channel normalization of [N,C,T,V]. Training mode normalizes by batch
/// statistics (biased variance) and folds them into state's running values
/// with the given momentum; eval mode uses the running statistics only.
template <class S>
Var batch_norm(Tape<S>& t, Var x, Var gamma, Var beta, BatchNormState<S>& state,
               Mode mode, double momentum = 0.1, double eps = 1e-5);

/// [N,C,T,V] -> [N,C], mean over T and V; both extents must be nonzero.
template <class S>
Var global_avg_pool(Tape<S>& t, Var x);

/// Row-wise softmax of [N,K].
template <class S>
Var softmax(Tape<S>& t, Var scores);

/// Mean over the batch of -log softmax(scores)[label]; labels in [0,K).
template <class S>
Var cross_entropy(Tape<S>& t, Var scores, const std::vector<int>& labels);

/// Keeps the listed joints of [N,C,T,V], in subset order -> [N,C,T,|subset|].
template <class S>
Var gather_joints(Tape<S>& t, Var x, const std::vector<std::size_t>& subset);

/// Slab `index` along the leading axis: [K,...] -> [...]. The slab is
/// contiguous, so this is a copy forward and an offset accumulate backward.
template <class S>
Var slice_axis0(Tape<S>& t, Var x, std::size_t index);

/// y[n,c,...] = x[n,c,...] + b[c] for x of rank >= 2 with channel axis 1.
template <class S>
Var bias_add(Tape<S>& t, Var x, Var b);

/// [N,C,T,V,M] -> [N*M,C,T,V]; bodies become independent batch entries,
/// person-major within each n.
template <class S>
Var fold_persons(Tape<S>& t, Var x);

/// [N*M,C] -> [N,C], mean over each n's M body entries.
template <class S>
Var person_mean(Tape<S>& t, Var x, std::size_t m);

/// Sum of all entries -> scalar [1].
template <class S>
Var sum_all(Tape<S>& t, Var x);

}  // namespace tgn::ops
