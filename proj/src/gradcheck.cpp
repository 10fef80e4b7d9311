#include "tgn/gradcheck.hpp"

#include <cmath>
#include <cstddef>

namespace tgn {

namespace {

double scalar_eval(const std::function<Var(Tape<double>&, Var)>& f,
                   const Tensor<double>& x) {
  Tape<double> tape;
  Var root = f(tape, tape.input(x));
  if (tape.value(root).numel() != 1)
    throw ContractError("gradcheck: expression is not scalar");
  return tape.value(root)[0];
}

double worst_rel_err(const Tensor<double>& analytic,
                     const Tensor<double>& numeric) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.numel(); ++i) {
    const double a = analytic[i];
    const double err =
        std::abs(a - numeric[i]) / std::max(1.0, std::abs(a));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace

double gradcheck_input(const std::function<Var(Tape<double>&, Var)>& f,
                       const Tensor<double>& x, double epsilon) {
  Tape<double> tape;
  Var xv = tape.input(x, /*needs_grad=*/true);
  Var root = f(tape, xv);
  if (tape.value(root).numel() != 1)
    throw ContractError("gradcheck: expression is not scalar");
  tape.backward(root);
  const Tensor<double> analytic = tape.grad(xv);

  Tensor<double> numeric(x.shape);
  Tensor<double> probe = x;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    probe[i] = x[i] + epsilon;
    const double hi = scalar_eval(f, probe);
    probe[i] = x[i] - epsilon;
    const double lo = scalar_eval(f, probe);
    probe[i] = x[i];
    numeric[i] = (hi - lo) / (2.0 * epsilon);
  }
  return worst_rel_err(analytic, numeric);
}

double gradcheck_params(const std::function<Var(Tape<double>&)>& f,
                        const std::vector<Param<double>*>& params,
                        double epsilon) {
  for (Param<double>* p : params) p->zero_grad();
  {
    Tape<double> tape;
    Var root = f(tape);
    if (tape.value(root).numel() != 1)
      throw ContractError("gradcheck: expression is not scalar");
    tape.backward(root);
  }

  auto eval = [&f]() {
    Tape<double> tape;
    Var root = f(tape);
    return tape.value(root)[0];
  };

  double worst = 0.0;
  for (Param<double>* p : params) {
    Tensor<double> numeric(p->value.shape);
    for (std::size_t i = 0; i < p->value.numel(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + epsilon;
      const double hi = eval();
      p->value[i] = saved - epsilon;
      const double lo = eval();
      p->value[i] = saved;
      numeric[i] = (hi - lo) / (2.0 * epsilon);
    }
    worst = std::max(worst, worst_rel_err(p->grad, numeric));
  }
  return worst;
}

}  // namespace tgn
