#pragma once

#include <functional>
#include <vector>

#include "tgn/autograd.hpp"
#include "tgn/tensor.hpp"

namespace tgn {

/// Central-difference verification of reverse-mode gradients, in double
/// precision. Both checkers return the max over coordinates of
///   |analytic - central difference| / max(1, |analytic|).
/// The expression builder must produce a scalar; anything else is a
/// contract error.

/// Checks d(root)/d(x) for f recording root from a differentiable input x.
double gradcheck_input(
    const std::function<Var(Tape<double>&, Var)>& f, const Tensor<double>& x,
    double epsilon = 1e-5);

/// Checks d(root)/d(p) for every param in params; f records root from the
/// params' current values. Values are perturbed in place and restored.
double gradcheck_params(
    const std::function<Var(Tape<double>&)>& f,
    const std::vector<Param<double>*>& params, double epsilon = 1e-5);

}  // namespace tgn
