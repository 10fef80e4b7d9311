// Times the serial and OpenMP kernel backends on model-realistic shapes and
// verifies, for every benchmarked kernel, that the two produce bit-identical
// outputs. The parallel backend only distributes independent output elements,
// so any nonzero difference is a bug, not noise.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tgn/graph.hpp"
#include "tgn/kernels.hpp"
#include "tgn/model.hpp"
#include "tgn/ops.hpp"
#include "tgn/rng.hpp"
#include "tgn/skeleton.hpp"
#include "tgn/tensor.hpp"

using namespace tgn;
using std::size_t;

namespace {

struct Row {
  std::string name;
  double serial_ms = 0.0;
  double parallel_ms = 0.0;
  bool identical = false;
};

double time_best_ms(const std::function<void()>& f, int trials) {
  double best = 1e300;
  for (int i = 0; i < trials; ++i) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    double ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    if (ms < best) best = ms;
  }
  return best;
}

std::vector<double> random_vec(Rng& rng, size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

class Suite {
 public:
  explicit Suite(int trials) : trials_(trials) {}

  /// run(out) must fully overwrite out; both backends get fresh buffers.
  void add(const std::string& name, size_t out_n,
           const std::function<void(const char* backend, double* out)>& run) {
    std::vector<double> ys(out_n, 0.0), yp(out_n, 0.0);
    Row row;
    row.name = name;
    run("serial", ys.data());  // warmup + identity reference
    run("parallel", yp.data());
    row.identical = ys == yp;
    row.serial_ms =
        time_best_ms([&] { run("serial", ys.data()); }, trials_);
    row.parallel_ms =
        time_best_ms([&] { run("parallel", yp.data()); }, trials_);
    rows_.push_back(row);
  }

  const std::vector<Row>& rows() const { return rows_; }

 private:
  int trials_;
  std::vector<Row> rows_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs OpenMP kernel benchmark"};
  int trials = 3;
  size_t batch = 2, frames = 300;
  app.add_option("--trials", trials, "repetitions per measurement (best-of)");
  app.add_option("--batch", batch, "batch size for the kernel shapes");
  app.add_option("--frames", frames, "sequence length for the kernel shapes");
  CLI11_PARSE(app, argc, argv);

  const size_t c = 64, v = 25, kt = 3;
  const size_t n = batch, t = frames;
  Rng rng(42);

  std::printf("backends: serial + %s (%d thread%s)\n",
              kernels::parallel_available() ? "OpenMP" : "OpenMP (disabled)",
              kernels::parallel_threads(),
              kernels::parallel_threads() == 1 ? "" : "s");
  std::printf("shapes: batch %zu, %zu channels, %zu frames, %zu joints\n\n",
              n, c, t, v);

  Suite suite(trials);

  // temporal convolution, the dominant cost
  {
    auto x = random_vec(rng, n * c * t * v);
    auto w = random_vec(rng, c * c * kt);
    auto b = random_vec(rng, c);
    suite.add("temporal_conv_fwd", n * c * t * v,
              [&](const char* be, double* out) {
                if (be[0] == 's')
                  kernels::serial::temporal_conv_fwd(x.data(), w.data(),
                                                     b.data(), out, n, c, t, v,
                                                     c, kt, 1, t);
                else
                  kernels::parallel::temporal_conv_fwd(x.data(), w.data(),
                                                       b.data(), out, n, c, t,
                                                       v, c, kt, 1, t);
              });
    auto gy = random_vec(rng, n * c * t * v);
    suite.add("temporal_conv_bwd_x", n * c * t * v,
              [&](const char* be, double* out) {
                std::fill(out, out + n * c * t * v, 0.0);
                if (be[0] == 's')
                  kernels::serial::temporal_conv_bwd_x(gy.data(), w.data(), out,
                                                       n, c, t, v, c, kt, 1, t);
                else
                  kernels::parallel::temporal_conv_bwd_x(gy.data(), w.data(),
                                                         out, n, c, t, v, c, kt,
                                                         1, t);
              });
    suite.add("temporal_conv_bwd_w", c * c * kt,
              [&](const char* be, double* out) {
                std::fill(out, out + c * c * kt, 0.0);
                if (be[0] == 's')
                  kernels::serial::temporal_conv_bwd_w(gy.data(), x.data(), out,
                                                       n, c, t, v, c, kt, 1, t);
                else
                  kernels::parallel::temporal_conv_bwd_w(gy.data(), x.data(),
                                                         out, n, c, t, v, c, kt,
                                                         1, t);
              });
  }

  // graph mixing over the full 25-joint adjacency
  {
    const size_t rows = n * c * t;
    auto adj = random_vec(rng, v * v);
    auto x = random_vec(rng, rows * v);
    auto gy = random_vec(rng, rows * v);
    suite.add("graph_mix_fwd", rows * v, [&](const char* be, double* out) {
      if (be[0] == 's')
        kernels::serial::graph_mix_fwd(adj.data(), x.data(), out, rows, v);
      else
        kernels::parallel::graph_mix_fwd(adj.data(), x.data(), out, rows, v);
    });
    suite.add("graph_mix_bwd_adj", v * v, [&](const char* be, double* out) {
      std::fill(out, out + v * v, 0.0);
      if (be[0] == 's')
        kernels::serial::graph_mix_bwd_adj(gy.data(), x.data(), out, rows, v);
      else
        kernels::parallel::graph_mix_bwd_adj(gy.data(), x.data(), out, rows,
                                             v);
    });
  }

  // batch normalization
  {
    auto x = random_vec(rng, n * c * t * v);
    auto gy = random_vec(rng, n * c * t * v);
    auto gamma = random_vec(rng, c);
    auto beta = random_vec(rng, c);
    std::vector<double> mean(c), var(c);
    kernels::serial::bn_stats(x.data(), mean.data(), var.data(), n, c, t, v);
    suite.add("bn_stats", 2 * c, [&](const char* be, double* out) {
      if (be[0] == 's')
        kernels::serial::bn_stats(x.data(), out, out + c, n, c, t, v);
      else
        kernels::parallel::bn_stats(x.data(), out, out + c, n, c, t, v);
    });
    suite.add("bn_apply", n * c * t * v, [&](const char* be, double* out) {
      if (be[0] == 's')
        kernels::serial::bn_apply(x.data(), mean.data(), var.data(),
                                  gamma.data(), beta.data(), 1e-5, out, n, c,
                                  t, v);
      else
        kernels::parallel::bn_apply(x.data(), mean.data(), var.data(),
                                    gamma.data(), beta.data(), 1e-5, out, n, c,
                                    t, v);
    });
    suite.add("bn_bwd_train", n * c * t * v + 2 * c,
              [&](const char* be, double* out) {
                double* gx = out;
                double* gg = out + n * c * t * v;
                double* gb = gg + c;
                std::fill(gg, gb + c, 0.0);
                if (be[0] == 's')
                  kernels::serial::bn_bwd_train(x.data(), mean.data(),
                                                var.data(), gamma.data(),
                                                gy.data(), 1e-5, gx, gg, gb, n,
                                                c, t, v);
                else
                  kernels::parallel::bn_bwd_train(x.data(), mean.data(),
                                                  var.data(), gamma.data(),
                                                  gy.data(), 1e-5, gx, gg, gb,
                                                  n, c, t, v);
              });
  }

  // classifier-sized linear layer and the elementwise tail
  {
    const size_t rows = 512, in_f = 256, out_f = 60;
    auto x = random_vec(rng, rows * in_f);
    auto w = random_vec(rng, out_f * in_f);
    auto b = random_vec(rng, out_f);
    suite.add("linear_fwd", rows * out_f, [&](const char* be, double* out) {
      if (be[0] == 's')
        kernels::serial::linear_fwd(x.data(), w.data(), b.data(), out, rows,
                                    in_f, out_f);
      else
        kernels::parallel::linear_fwd(x.data(), w.data(), b.data(), out, rows,
                                      in_f, out_f);
    });
  }
  {
    auto x = random_vec(rng, n * c * t * v);
    suite.add("relu_fwd", n * c * t * v, [&](const char* be, double* out) {
      if (be[0] == 's')
        kernels::serial::relu_fwd(x.data(), out, n * c * t * v);
      else
        kernels::parallel::relu_fwd(x.data(), out, n * c * t * v);
    });
  }

  std::printf("%-22s %12s %12s %9s  %s\n", "kernel", "serial ms",
              "parallel ms", "speedup", "bit-identical");
  bool all_identical = true;
  for (const Row& r : suite.rows()) {
    std::printf("%-22s %12.3f %12.3f %8.2fx  %s\n", r.name.c_str(),
                r.serial_ms, r.parallel_ms,
                r.parallel_ms > 0 ? r.serial_ms / r.parallel_ms : 0.0,
                r.identical ? "yes" : "NO");
    if (!r.identical) all_identical = false;
  }

  // Whole-block forward+backward through the tape, switching the dispatch
  // backend. The gradients must also match bit for bit.
  {
    const SkeletonLayout& lay = layout("ntu25");
    GraphSpec g{lay.id, lay.num_joints, lay.edges, lay.center_joint};
    AdjacencyStack stack = build_adjacency(g, PartitionStrategy::spatial);

    LayerPlan plan;
    plan.c_in = c;
    plan.c_out = c;
    Rng brng(7);
    TgnBlock<double> block(plan, stack.partitions.size(), brng);
    Tensor<double> x({n, c, t / 2, v});
    for (auto& e : x.data) e = brng.uniform(-1.0, 1.0);

    auto run = [&](kernels::Backend be, Tensor<double>* wgrad) {
      kernels::set_backend(be);
      Tape<double> tape;
      std::vector<Var> adj;
      for (const auto& a : stack.partitions) adj.push_back(tape.constant(a));
      Var y = block.forward(tape, tape.constant(x), adj, Mode::train);
      Var loss = ops::sum_all(tape, y);
      block.weight.zero_grad();
      tape.backward(loss);
      if (wgrad) *wgrad = block.weight.grad;
      kernels::set_backend(kernels::Backend::parallel);
      return tape.value(loss)[0];
    };

    Tensor<double> gws, gwp;
    const double ls = run(kernels::Backend::serial, &gws);
    const double lp = run(kernels::Backend::parallel, &gwp);
    const bool same =
        ls == lp && gws.data == gwp.data;
    if (!same) all_identical = false;

    const double ser_ms = time_best_ms(
        [&] { (void)run(kernels::Backend::serial, nullptr); }, trials);
    const double par_ms = time_best_ms(
        [&] { (void)run(kernels::Backend::parallel, nullptr); }, trials);
    std::printf("%-22s %12.3f %12.3f %8.2fx  %s\n", "tgn_block fwd+bwd",
                ser_ms, par_ms, par_ms > 0 ? ser_ms / par_ms : 0.0,
                same ? "yes" : "NO");
  }

  std::printf("\n%s\n", all_identical
                            ? "all backends agree bit for bit"
                            : "BACKEND MISMATCH DETECTED");
  return all_identical ? 0 : 1;
}
