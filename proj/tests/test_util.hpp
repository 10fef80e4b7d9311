#pragma once

#include <cstddef>
#include <vector>

#include "tgn/kernels.hpp"
#include "tgn/rng.hpp"
#include "tgn/tensor.hpp"

namespace testutil {

template <class S>
std::vector<S> random_vec(tgn::Rng& rng, std::size_t n, double lo = -1.0,
                          double hi = 1.0) {
  std::vector<S> v(n);
  for (auto& x : v) x = static_cast<S>(rng.uniform(lo, hi));
  return v;
}

template <class S>
tgn::Tensor<S> random_tensor(tgn::Rng& rng, std::vector<std::size_t> shape,
                             double lo = -1.0, double hi = 1.0) {
  tgn::Tensor<S> t(std::move(shape));
  for (auto& x : t.data) x = static_cast<S>(rng.uniform(lo, hi));
  return t;
}

/// Runs f once per backend and returns the produced vectors; callers assert
/// they are bit-identical. f receives no arguments; it must read the backend
/// through the dispatch layer.
template <class F>
auto under_backend(tgn::kernels::Backend b, F f) {
  const auto prev = tgn::kernels::backend();
  tgn::kernels::set_backend(b);
  auto out = f();
  tgn::kernels::set_backend(prev);
  return out;
}

inline double rel_err(double analytic, double reference) {
  double d = analytic - reference;
  if (d < 0) d = -d;
  double a = analytic < 0 ? -analytic : analytic;
  return d / (a > 1.0 ? a : 1.0);
}

}  // namespace testutil
