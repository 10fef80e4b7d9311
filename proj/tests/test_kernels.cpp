#include <cmath>
#include <cstddef>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "tgn/kernels.hpp"
#include "tgn/rng.hpp"

using namespace tgn;
namespace kd = tgn::kernels::dispatch;
namespace ks = tgn::kernels::serial;
namespace kp = tgn::kernels::parallel;
using std::size_t;
using std::vector;

TEST_CASE("graph_mix: two-node clique rows average the two joints") {
  // Normalized clique adjacency is all 0.5; a row [1, 3] mixes to [2, 2].
  const vector<double> adj{0.5, 0.5, 0.5, 0.5};
  const vector<double> x{1.0, 3.0};
  vector<double> y(2, -1.0);
  ks::graph_mix_fwd(adj.data(), x.data(), y.data(), 1, 2);
  CHECK(y[0] == doctest::Approx(2.0));
  CHECK(y[1] == doctest::Approx(2.0));
}

TEST_CASE("temporal_conv: averaging filter with zero padding") {
  const vector<double> x{1, 2, 3, 4};  // n=1 c=1 t=4 v=1
  const vector<double> w{1.0 / 3, 1.0 / 3, 1.0 / 3};
  vector<double> y(4, 0.0);
  ks::temporal_conv_fwd<double>(x.data(), w.data(), nullptr, y.data(), 1, 1, 4, 1, 1,
                        3, 1, 4);
  CHECK(y[0] == doctest::Approx(1.0));       // (0 + 1 + 2) / 3
  CHECK(y[1] == doctest::Approx(2.0));
  CHECK(y[2] == doctest::Approx(3.0));
  CHECK(y[3] == doctest::Approx(7.0 / 3.0));  // (3 + 4 + 0) / 3

  SUBCASE("stride 2 keeps outputs whose center is in range") {
    vector<double> y2(2, 0.0);
    ks::temporal_conv_fwd<double>(x.data(), w.data(), nullptr, y2.data(), 1, 1, 4, 1,
                          1, 3, 2, 2);
    CHECK(y2[0] == doctest::Approx(1.0));
    CHECK(y2[1] == doctest::Approx(3.0));
  }

  SUBCASE("kernel width 1 is a per-frame channel map") {
    const vector<double> w1{2.0};
    vector<double> y1(4, 0.0);
    ks::temporal_conv_fwd<double>(x.data(), w1.data(), nullptr, y1.data(), 1, 1, 4, 1,
                          1, 1, 1, 4);
    CHECK(y1 == vector<double>{2, 4, 6, 8});
  }

  SUBCASE("bias is added once per output channel") {
    const vector<double> b{10.0};
    vector<double> yb(4, 0.0);
    ks::temporal_conv_fwd(x.data(), w.data(), b.data(), yb.data(), 1, 1, 4, 1,
                          1, 3, 1, 4);
    CHECK(yb[1] == doctest::Approx(12.0));
  }
}

TEST_CASE("batch norm: hand statistics and affine map") {
  const vector<double> x{1, 2, 3, 4};  // n=1 c=1 t=4 v=1
  vector<double> mean(1), var(1);
  ks::bn_stats(x.data(), mean.data(), var.data(), 1, 1, 4, 1);
  CHECK(mean[0] == doctest::Approx(2.5));
  CHECK(var[0] == doctest::Approx(1.25));  // biased variance

  const vector<double> gamma{2.0}, beta{1.0};
  vector<double> y(4);
  ks::bn_apply(x.data(), mean.data(), var.data(), gamma.data(), beta.data(),
               0.0, y.data(), 1, 1, 4, 1);
  const double s = std::sqrt(1.25);
  CHECK(y[0] == doctest::Approx((1 - 2.5) / s * 2 + 1));
  CHECK(y[3] == doctest::Approx((4 - 2.5) / s * 2 + 1));
}

TEST_CASE("linear: hand case") {
  const vector<double> x{1, 2};
  const vector<double> w{1, 0, 0, 1, 1, 1};  // [3, 2]
  const vector<double> b{0.5, -0.5, 0};
  vector<double> y(3);
  ks::linear_fwd(x.data(), w.data(), b.data(), y.data(), 1, 2, 3);
  CHECK(y == vector<double>{1.5, 1.5, 3.0});
}

TEST_CASE("softmax: known two-logit case and row sums") {
  const vector<double> x{0.0, std::log(3.0)};
  vector<double> y(2);
  ks::softmax_fwd(x.data(), y.data(), 1, 2);
  CHECK(y[0] == doctest::Approx(0.25));
  CHECK(y[1] == doctest::Approx(0.75));

  Rng rng(7);
  auto big = testutil::random_vec<double>(rng, 6 * 5, -30.0, 30.0);
  vector<double> out(30);
  ks::softmax_fwd(big.data(), out.data(), 6, 5);
  for (size_t r = 0; r < 6; ++r) {
    double s = 0;
    for (size_t i = 0; i < 5; ++i) {
      CHECK(out[r * 5 + i] >= 0.0);
      s += out[r * 5 + i];
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("pooling and person folding hand cases") {
  const vector<double> x{1, 2, 3, 4};
  vector<double> y(1);
  ks::gap_fwd(x.data(), y.data(), 1, 1, 4);
  CHECK(y[0] == doctest::Approx(2.5));

  // [n=1, m=2, c=2] person-major rows.
  const vector<double> pm{1, 2, 3, 4};
  vector<double> ym(2);
  ks::person_mean_fwd(pm.data(), ym.data(), 1, 2, 2);
  CHECK(ym == vector<double>{2.0, 3.0});

  // [n=1, c=2, t=1, v=2, m=2] -> [2, 2, 1, 2]
  const vector<double> x5{1, 2, 3, 4, 5, 6, 7, 8};
  vector<double> folded(8);
  ks::fold_persons_fwd(x5.data(), folded.data(), 1, 2, 1, 2, 2);
  CHECK(folded == vector<double>{1, 3, 5, 7, 2, 4, 6, 8});
}

TEST_CASE("gather columns: forward picks, backward scatters") {
  const vector<double> x{10, 20, 30, 40};  // one row, v_in=4
  const vector<size_t> idx{3, 1};
  vector<double> y(2);
  ks::gather_cols_fwd(x.data(), y.data(), 1, 4, idx.data(), 2);
  CHECK(y == vector<double>{40, 20});

  vector<double> gx(4, 0.0);
  const vector<double> gy{1.0, 2.0};
  ks::gather_cols_bwd(gy.data(), gx.data(), 1, 4, idx.data(), 2);
  CHECK(gx == vector<double>{0, 2, 0, 1});
}

namespace {

// Central-difference check of a kernel backward against its forward.
// loss = sum(y * r) so dloss/dy = r.
template <class Fwd>
vector<double> fd_grad(Fwd fwd, vector<double> x, const vector<double>& r,
                       size_t out_n, double eps = 1e-6) {
  vector<double> g(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    auto lo = x, hi = x;
    hi[i] += eps;
    lo[i] -= eps;
    vector<double> yh(out_n, 0.0), yl(out_n, 0.0);
    fwd(hi, yh);
    fwd(lo, yl);
    double dh = 0, dl = 0;
    for (size_t k = 0; k < out_n; ++k) {
      dh += yh[k] * r[k];
      dl += yl[k] * r[k];
    }
    g[i] = (dh - dl) / (2 * eps);
  }
  return g;
}

void check_close(const vector<double>& a, const vector<double>& b,
                 double tol = 1e-6) {
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i)
    CHECK(testutil::rel_err(a[i], b[i]) < tol);
}

}  // namespace

TEST_CASE("temporal_conv backward matches finite differences (stride 2)") {
  const size_t n = 2, c_in = 3, t_in = 7, v = 4, c_out = 2, kt = 3, stride = 2;
  const size_t t_out = (t_in + stride - 1) / stride;
  Rng rng(11);
  auto x = testutil::random_vec<double>(rng, n * c_in * t_in * v);
  auto w = testutil::random_vec<double>(rng, c_out * c_in * kt);
  auto b = testutil::random_vec<double>(rng, c_out);
  auto r = testutil::random_vec<double>(rng, n * c_out * t_out * v);

  vector<double> gx(x.size(), 0.0), gw(w.size(), 0.0), gb(b.size(), 0.0);
  ks::temporal_conv_bwd_x(r.data(), w.data(), gx.data(), n, c_in, t_in, v,
                          c_out, kt, stride, t_out);
  ks::temporal_conv_bwd_w(r.data(), x.data(), gw.data(), n, c_in, t_in, v,
                          c_out, kt, stride, t_out);
  ks::temporal_conv_bwd_b(r.data(), gb.data(), n, c_out, t_out, v);

  auto fwd_x = [&](const vector<double>& xv, vector<double>& y) {
    ks::temporal_conv_fwd(xv.data(), w.data(), b.data(), y.data(), n, c_in,
                          t_in, v, c_out, kt, stride, t_out);
  };
  auto fwd_w = [&](const vector<double>& wv, vector<double>& y) {
    ks::temporal_conv_fwd(x.data(), wv.data(), b.data(), y.data(), n, c_in,
                          t_in, v, c_out, kt, stride, t_out);
  };
  auto fwd_b = [&](const vector<double>& bv, vector<double>& y) {
    ks::temporal_conv_fwd(x.data(), w.data(), bv.data(), y.data(), n, c_in,
                          t_in, v, c_out, kt, stride, t_out);
  };
  check_close(gx, fd_grad(fwd_x, x, r, r.size()));
  check_close(gw, fd_grad(fwd_w, w, r, r.size()));
  check_close(gb, fd_grad(fwd_b, b, r, r.size()));
}

TEST_CASE("graph_mix backward matches finite differences") {
  const size_t rows = 5, v = 4;
  Rng rng(13);
  auto adj = testutil::random_vec<double>(rng, v * v);
  auto x = testutil::random_vec<double>(rng, rows * v);
  auto r = testutil::random_vec<double>(rng, rows * v);

  vector<double> gadj(v * v, 0.0);
  ks::graph_mix_bwd_adj(r.data(), x.data(), gadj.data(), rows, v);
  auto fwd_a = [&](const vector<double>& av, vector<double>& y) {
    ks::graph_mix_fwd(av.data(), x.data(), y.data(), rows, v);
  };
  check_close(gadj, fd_grad(fwd_a, adj, r, rows * v));

  // d/dx goes through the transposed adjacency.
  vector<double> at(v * v), gx(rows * v, 0.0);
  ks::transpose2d(adj.data(), at.data(), v, v);
  ks::graph_mix_fwd(at.data(), r.data(), gx.data(), rows, v);
  auto fwd_x = [&](const vector<double>& xv, vector<double>& y) {
    ks::graph_mix_fwd(adj.data(), xv.data(), y.data(), rows, v);
  };
  check_close(gx, fd_grad(fwd_x, x, r, rows * v));
}

TEST_CASE("batch norm backward (training stats) matches finite differences") {
  const size_t n = 2, c = 2, t = 3, v = 2;
  const double eps = 1e-5;
  Rng rng(17);
  auto x = testutil::random_vec<double>(rng, n * c * t * v);
  auto gamma = testutil::random_vec<double>(rng, c, 0.5, 1.5);
  auto beta = testutil::random_vec<double>(rng, c);
  auto r = testutil::random_vec<double>(rng, x.size());

  vector<double> mean(c), var(c);
  ks::bn_stats(x.data(), mean.data(), var.data(), n, c, t, v);
  vector<double> gx(x.size(), 0.0), gg(c, 0.0), gb(c, 0.0);
  ks::bn_bwd_train(x.data(), mean.data(), var.data(), gamma.data(), r.data(),
                   eps, gx.data(), gg.data(), gb.data(), n, c, t, v);

  auto fwd = [&](const vector<double>& xv, vector<double>& y) {
    vector<double> m(c), s(c);
    ks::bn_stats(xv.data(), m.data(), s.data(), n, c, t, v);
    ks::bn_apply(xv.data(), m.data(), s.data(), gamma.data(), beta.data(), eps,
                 y.data(), n, c, t, v);
  };
  check_close(gx, fd_grad(fwd, x, r, x.size()), 1e-5);
}

// Every kernel must produce bit-identical output under both backends.
TEST_CASE_TEMPLATE("serial and parallel backends agree exactly", S, float,
                   double) {
  Rng rng(23);
  const size_t n = 3, c_in = 4, t_in = 10, v = 5, c_out = 6, kt = 3,
               stride = 2;
  const size_t t_out = (t_in + stride - 1) / stride;

  auto x = testutil::random_vec<S>(rng, n * c_in * t_in * v);
  auto w = testutil::random_vec<S>(rng, c_out * c_in * kt);
  auto b = testutil::random_vec<S>(rng, c_out);
  auto gy = testutil::random_vec<S>(rng, n * c_out * t_out * v);
  auto adj = testutil::random_vec<S>(rng, v * v);

  {
    vector<S> ys(n * c_out * t_out * v, S(0)), yp = ys;
    ks::temporal_conv_fwd(x.data(), w.data(), b.data(), ys.data(), n, c_in,
                          t_in, v, c_out, kt, stride, t_out);
    kp::temporal_conv_fwd(x.data(), w.data(), b.data(), yp.data(), n, c_in,
                          t_in, v, c_out, kt, stride, t_out);
    CHECK(ys == yp);

    vector<S> gxs(x.size(), S(0)), gxp = gxs;
    ks::temporal_conv_bwd_x(gy.data(), w.data(), gxs.data(), n, c_in, t_in, v,
                            c_out, kt, stride, t_out);
    kp::temporal_conv_bwd_x(gy.data(), w.data(), gxp.data(), n, c_in, t_in, v,
                            c_out, kt, stride, t_out);
    CHECK(gxs == gxp);

    vector<S> gws(w.size(), S(0)), gwp = gws;
    ks::temporal_conv_bwd_w(gy.data(), x.data(), gws.data(), n, c_in, t_in, v,
                            c_out, kt, stride, t_out);
    kp::temporal_conv_bwd_w(gy.data(), x.data(), gwp.data(), n, c_in, t_in, v,
                            c_out, kt, stride, t_out);
    CHECK(gws == gwp);

    vector<S> gbs(c_out, S(0)), gbp = gbs;
    ks::temporal_conv_bwd_b(gy.data(), gbs.data(), n, c_out, t_out, v);
    kp::temporal_conv_bwd_b(gy.data(), gbp.data(), n, c_out, t_out, v);
    CHECK(gbs == gbp);
  }

  {
    const size_t rows = n * c_in * t_in;
    vector<S> ys(rows * v), yp(rows * v);
    ks::graph_mix_fwd(adj.data(), x.data(), ys.data(), rows, v);
    kp::graph_mix_fwd(adj.data(), x.data(), yp.data(), rows, v);
    CHECK(ys == yp);

    vector<S> gas(v * v, S(0)), gap_ = gas;
    ks::graph_mix_bwd_adj(ys.data(), x.data(), gas.data(), rows, v);
    kp::graph_mix_bwd_adj(ys.data(), x.data(), gap_.data(), rows, v);
    CHECK(gas == gap_);
  }

  {
    vector<S> ms(c_in), vs(c_in), mp(c_in), vp(c_in);
    ks::bn_stats(x.data(), ms.data(), vs.data(), n, c_in, t_in, v);
    kp::bn_stats(x.data(), mp.data(), vp.data(), n, c_in, t_in, v);
    CHECK(ms == mp);
    CHECK(vs == vp);

    auto gamma = testutil::random_vec<S>(rng, c_in, 0.5, 1.5);
    auto beta = testutil::random_vec<S>(rng, c_in);
    vector<S> as(x.size()), ap(x.size());
    ks::bn_apply(x.data(), ms.data(), vs.data(), gamma.data(), beta.data(),
                 S(1e-5), as.data(), n, c_in, t_in, v);
    kp::bn_apply(x.data(), mp.data(), vp.data(), gamma.data(), beta.data(),
                 S(1e-5), ap.data(), n, c_in, t_in, v);
    CHECK(as == ap);

    vector<S> gxs(x.size(), S(0)), gxp = gxs, ggs(c_in, S(0)), ggp = ggs,
              gbs(c_in, S(0)), gbp = gbs;
    ks::bn_bwd_train(x.data(), ms.data(), vs.data(), gamma.data(), as.data(),
                     S(1e-5), gxs.data(), ggs.data(), gbs.data(), n, c_in,
                     t_in, v);
    kp::bn_bwd_train(x.data(), mp.data(), vp.data(), gamma.data(), ap.data(),
                     S(1e-5), gxp.data(), ggp.data(), gbp.data(), n, c_in,
                     t_in, v);
    CHECK(gxs == gxp);
    CHECK(ggs == ggp);
    CHECK(gbs == gbp);
  }

  {
    const size_t rows = 7, in_f = 9, out_f = 8;
    auto xl = testutil::random_vec<S>(rng, rows * in_f);
    auto wl = testutil::random_vec<S>(rng, out_f * in_f);
    auto bl = testutil::random_vec<S>(rng, out_f);
    vector<S> ys(rows * out_f), yp(rows * out_f);
    ks::linear_fwd(xl.data(), wl.data(), bl.data(), ys.data(), rows, in_f,
                   out_f);
    kp::linear_fwd(xl.data(), wl.data(), bl.data(), yp.data(), rows, in_f,
                   out_f);
    CHECK(ys == yp);

    vector<S> ss(rows * out_f), sp(rows * out_f);
    ks::softmax_fwd(ys.data(), ss.data(), rows, out_f);
    kp::softmax_fwd(yp.data(), sp.data(), rows, out_f);
    CHECK(ss == sp);
  }

  {
    vector<S> rs(x.size()), rp(x.size());
    ks::relu_fwd(x.data(), rs.data(), x.size());
    kp::relu_fwd(x.data(), rp.data(), x.size());
    CHECK(rs == rp);

    vector<S> gs(n * c_in), gp(n * c_in);
    ks::gap_fwd(x.data(), gs.data(), n, c_in, t_in * v);
    kp::gap_fwd(x.data(), gp.data(), n, c_in, t_in * v);
    CHECK(gs == gp);
  }
}

TEST_CASE("dispatch layer routes by backend") {
  const vector<double> a{1, 2}, b{3, 4};
  vector<double> y(2);
  auto r1 = testutil::under_backend(kernels::Backend::serial, [&] {
    kd::add(a.data(), b.data(), y.data(), 2);
    return y;
  });
  auto r2 = testutil::under_backend(kernels::Backend::parallel, [&] {
    kd::add(a.data(), b.data(), y.data(), 2);
    return y;
  });
  CHECK(r1 == vector<double>{4, 6});
  CHECK(r1 == r2);
}
