#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "tgn/errors.hpp"
#include "tgn/tensor.hpp"

namespace tgn {

enum class Mode { train, eval };

/// A trainable tensor. grad always has the same shape as value and is exactly
/// zero after construction or zero_grad(); backward passes accumulate into it.
template <class S>
struct Param {
  std::string id;
  Tensor<S> value;
  Tensor<S> grad;

  Param() = default;
  Param(std::string id_in, Tensor<S> value_in)
      : id(std::move(id_in)),
        value(std::move(value_in)),
        grad(value.shape) {}

  void zero_grad() {
    for (auto& g : grad.data) g = S(0);
  }
};

/// Handle to a node on a Tape. Only meaningful for the tape that created it.
struct Var {
  int index = -1;
};

/// Dynamically recorded operation graph. Nodes are appended in evaluation
/// order, so the record order is already topological; backward() walks it in
/// reverse. One tape serves one forward/backward evaluation and is
/// single-threaded; parallelism lives inside the kernels.
template <class S>
class Tape {
 public:
  /// Leaf that never receives a gradient.
  Var constant(Tensor<S> value) { return leaf(std::move(value), false); }

  /// Leaf input; differentiable on request (used by the gradient checker).
  Var input(Tensor<S> value, bool needs_grad = false) {
    return leaf(std::move(value), needs_grad);
  }

  /// Leaf bound to a Param: value is copied at record time and backward()
  /// accumulates the node gradient into p.grad.
  Var parameter(Param<S>& p) {
    Var v = leaf(p.value, true);
    nodes_[static_cast<std::size_t>(v.index)].bound = &p;
    return v;
  }

  /// Appends an op result. When finiteness checking is on (default), a
  /// non-finite entry in value raises NumericError naming the op.
  Var emplace(const char* op_name, Tensor<S> value, bool needs_grad,
              std::function<void(Tape&, int)> backward) {
    if (check_finite_ && !value.all_finite()) {
      throw NumericError(std::string("non-finite values produced by ") +
                         op_name);
    }
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    if (needs_grad) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  const Tensor<S>& value(Var v) const { return node(v).value; }

  bool needs_grad(Var v) const { return node(v).needs_grad; }

  /// Gradient of the last backward() w.r.t. this node; zeros if untouched.
  const Tensor<S>& grad(Var v) { return grad_buffer(v); }

  /// Accumulation target for backward closures; allocated as zeros on first
  /// use with the node's value shape.
  Tensor<S>& grad_buffer(Var v) {
    Node& n = node(v);
    if (n.grad.empty() && n.value.numel() > 0) n.grad = Tensor<S>(n.value.shape);
    return n.grad;
  }

  /// Reverse sweep from a scalar root. Node gradients are cleared first, so
  /// each call computes exactly d(root)/d(leaf); bound Params accumulate
  /// across calls until their grads are zeroed explicitly.
  void backward(Var root) {
    if (node(root).value.numel() != 1) {
      throw ContractError("backward: root must be scalar, got shape " +
                          node(root).value.shape_string());
    }
    for (auto& n : nodes_) n.grad = Tensor<S>{};
    if (!node(root).needs_grad) return;
    grad_buffer(root)[0] = S(1);
    for (int i = root.index; i >= 0; --i) {
      Node& n = nodes_[static_cast<std::size_t>(i)];
      if (!n.needs_grad || n.grad.empty()) continue;
      if (n.backward) n.backward(*this, i);
      if (n.bound) {
        require(n.bound->grad.same_shape(n.grad),
                "backward: param grad shape mismatch for " + n.bound->id);
        for (std::size_t k = 0; k < n.grad.numel(); ++k)
          n.bound->grad[k] += n.grad[k];
      }
    }
  }

  std::size_t size() const { return nodes_.size(); }

  void set_check_finite(bool on) { check_finite_ = on; }
  bool check_finite() const { return check_finite_; }

 private:
  struct Node {
    Tensor<S> value;
    Tensor<S> grad;
    bool needs_grad = false;
    Param<S>* bound = nullptr;
    std::function<void(Tape&, int)> backward;
  };

  Var leaf(Tensor<S> value, bool needs_grad) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  Node& node(Var v) {
    if (v.index < 0 || v.index >= static_cast<int>(nodes_.size()))
      throw ContractError("invalid tape handle");
    return nodes_[static_cast<std::size_t>(v.index)];
  }
  const Node& node(Var v) const {
    return const_cast<Tape*>(this)->node(v);
  }

  std::vector<Node> nodes_;
  bool check_finite_ = true;
};

}  // namespace tgn
