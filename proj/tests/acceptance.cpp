// Acceptance gate: one pass/fail line per shipped claim, exit 0 only if all
// hold. Tolerances are pinned here, next to the checks they gate.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "json.hpp"
#include "tgn/config.hpp"
#include "tgn/gradcheck.hpp"
#include "tgn/graph.hpp"
#include "tgn/model.hpp"
#include "tgn/ops.hpp"
#include "tgn/rng.hpp"
#include "tgn/skeleton.hpp"
#include "tgn/training.hpp"

using namespace tgn;
using std::size_t;

namespace {

constexpr double kGradTolerance = 1e-4;   // max relative error, eps 1e-6
constexpr double kGradEps = 1e-6;
constexpr int kGradSeeds = 20;
constexpr double kGradBudgetSec = 60.0;

constexpr double kEquivTolerance = 1e-10;  // fused vs factored, linear mode
constexpr int kEquivInstances = 100;
constexpr double kEquivBudgetSec = 10.0;

constexpr long long kParamLo = 2000000, kParamHi = 3300000;
constexpr long long kFlopLo = 12000000000LL, kFlopHi = 18000000000LL;

constexpr double kOverfitTarget = 0.95;   // train top-1
constexpr int kOverfitMaxEpochs = 200;
constexpr double kOverfitBudgetSec = 600.0;

constexpr double kPermTolerance = 1e-12;
constexpr double kRowSumTolerance = 1e-12;

int g_failures = 0;

void report(const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(const char* pattern, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

// ---------------------------------------------------------------------------
// Criterion 1: reverse-mode gradients match central differences on a toy
// two-layer multi-scale network (4 joints, 2 scales, 2 bodies, shared
// blocks, edge masks, pooling, classifier, cross-entropy), across fixed
// seeds, plus the input gradient.

struct ToyNet {
  std::vector<std::vector<size_t>> subsets;
  std::vector<AdjacencyStack> stacks;
  TgnBlock<double> b1, b2;
  std::vector<std::vector<Param<double>>> masks;  // [scale][layer]
  Param<double> cls_w, cls_b;
  std::vector<int> labels;

  static LayerPlan plan1() {
    LayerPlan p;
    p.c_in = 2, p.c_out = 3, p.window = 3, p.stride = 1, p.residual = false;
    return p;
  }
  static LayerPlan plan2() {
    LayerPlan p;
    p.c_in = 3, p.c_out = 4, p.window = 3, p.stride = 2, p.residual = true;
    return p;
  }

  explicit ToyNet(Rng& rng)
      : b1(plan1(), 3, rng, {}, "toy.l0"), b2(plan2(), 3, rng, {}, "toy.l1") {
    GraphSpec all{"all", 4, {{0, 1}, {1, 2}, {2, 3}}, 1};
    GraphSpec half{"half", 3, {{0, 1}, {1, 2}}, 1};
    subsets = {{0, 1, 2, 3}, {0, 1, 2}};
    stacks.push_back(build_adjacency(all, PartitionStrategy::spatial));
    stacks.push_back(build_adjacency(half, PartitionStrategy::spatial));
    for (size_t s = 0; s < 2; ++s) {
      const size_t vs = stacks[s].partitions[0].extent(0);
      masks.emplace_back();
      for (size_t l = 0; l < 2; ++l) {
        masks[s].emplace_back("mask" + std::to_string(s) + std::to_string(l),
                              Tensor<double>({3, vs, vs}, 1.0));
      }
    }
    cls_w = Param<double>("cls.w", Tensor<double>({2, 4}));
    for (auto& w : cls_w.value.data) w = rng.normal(0.0, 0.5);
    cls_b = Param<double>("cls.b", Tensor<double>({2}));
  }

  std::vector<Param<double>*> parameters() {
    std::vector<Param<double>*> out;
    b1.collect(out);
    b2.collect(out);
    for (auto& per_scale : masks)
      for (auto& m : per_scale) out.push_back(&m);
    out.push_back(&cls_w);
    out.push_back(&cls_b);
    return out;
  }

  Var forward(Tape<double>& t, Var x, Mode mode) {
    const size_t m = 2;
    Var folded = ops::fold_persons(t, x);
    Var fused{};
    for (size_t s = 0; s < 2; ++s) {
      Var h = ops::gather_joints(t, folded, subsets[s]);
      TgnBlock<double>* blocks[2] = {&b1, &b2};
      for (size_t l = 0; l < 2; ++l) {
        std::vector<Var> adj;
        Var mask = t.parameter(masks[s][l]);
        for (size_t p = 0; p < stacks[s].partitions.size(); ++p) {
          Var a = t.constant(stacks[s].partitions[p]);
          adj.push_back(ops::mul(t, a, ops::slice_axis0(t, mask, p)));
        }
        h = blocks[l]->forward(t, h, adj, mode);
      }
      Var pooled = ops::person_mean(t, ops::global_avg_pool(t, h), m);
      Var score = ops::linear(t, pooled, t.parameter(cls_w),
                              t.parameter(cls_b));
      fused = s == 0 ? score : ops::add(t, fused, score);
    }
    return ops::scale(t, fused, 0.5);
  }

  Var loss(Tape<double>& t, Var x, Mode mode) {
    return ops::cross_entropy(t, forward(t, x, mode), labels);
  }
};

void criterion_gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int worst_seed = -1;

  for (int seed = 1; seed <= kGradSeeds; ++seed) {
    Rng rng(Rng::mix(1234, static_cast<std::uint64_t>(seed)));
    ToyNet net(rng);
    Tensor<double> x({2, 2, 8, 4, 2});
    for (auto& e : x.data) e = rng.uniform(-1.0, 1.0);
    net.labels = {static_cast<int>(rng.below(2)),
                  static_cast<int>(rng.below(2))};

    double err_p = gradcheck_params(
        [&](Tape<double>& t) {
          return net.loss(t, t.constant(x), Mode::train);
        },
        net.parameters(), kGradEps);
    double err_x = gradcheck_input(
        [&](Tape<double>& t, Var xv) { return net.loss(t, xv, Mode::train); },
        x, kGradEps);
    const double err = std::max(err_p, err_x);
    if (err > worst) {
      worst = err;
      worst_seed = seed;
    }
  }
  const double secs = seconds_since(t0);
  const bool pass =
      worst < kGradTolerance && secs < kGradBudgetSec;
  report("C1 gradient verification", pass,
         fmt("worst rel err %.3g (seed %.0f of 20, toy 2-layer 2-scale net, "
             "eps 1e-6) in %.1fs",
             worst, static_cast<double>(worst_seed), secs));
}

// ---------------------------------------------------------------------------
// Criterion 2: with bias, normalization, activation, and residual off, the
// fused block equals the factored reference (identity 1x1 stage, same
// temporal weights) on random square-channel instances.

void criterion_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;

  for (int i = 0; i < kEquivInstances; ++i) {
    Rng rng(Rng::mix(777, static_cast<std::uint64_t>(i)));
    const size_t v = 2 + rng.below(5);                 // 2..6
    const size_t tlen = 4 + rng.below(13);             // 4..16
    const size_t c = 1 + rng.below(4);                 // 1..4
    const size_t window = 1 + 2 * rng.below(3);        // 1,3,5
    const size_t stride = 1 + rng.below(2);            // 1,2
    const size_t n = 1 + rng.below(2);                 // 1,2

    // random connected graph: spanning tree plus a few extras
    GraphSpec g;
    g.name = "rand";
    g.num_nodes = v;
    g.center = 0;
    for (size_t u = 1; u < v; ++u)
      g.edges.push_back({static_cast<int>(rng.below(u)), static_cast<int>(u)});
    for (size_t extra = rng.below(3); extra > 0 && v > 1; --extra) {
      int a = static_cast<int>(rng.below(v));
      int b = static_cast<int>(rng.below(v));
      if (a != b) g.edges.push_back({a, b});
    }
    AdjacencyStack stack = build_adjacency(g, PartitionStrategy::uniform);

    LayerPlan plan;
    plan.c_in = c;
    plan.c_out = c;
    plan.window = window;
    plan.stride = stride;
    plan.residual = false;
    BlockOptions bare;
    bare.bias = false;
    bare.norm = false;
    bare.act = false;

    Rng wrng(Rng::mix(778, static_cast<std::uint64_t>(i)));
    TgnBlock<double> fused(plan, 1, wrng, bare, "fused");
    BaselineBlock<double> split(plan, 1, wrng, bare, "split");
    // identity 1x1 mixing stage, shared temporal weights
    for (auto& e : split.mix_weight.value.data) e = 0.0;
    for (size_t ch = 0; ch < c; ++ch)
      split.mix_weight.value[ch * c + ch] = 1.0;
    split.time_weight.value = fused.weight.value;
    split.time_weight.value.shape = {c, c, window};

    Tensor<double> x({n, c, tlen, v});
    for (auto& e : x.data) e = rng.uniform(-1.0, 1.0);

    Tape<double> t;
    std::vector<Var> adj = {t.constant(stack.partitions[0])};
    Var xa = t.constant(x);
    const Tensor<double> ya =
        t.value(fused.forward(t, xa, adj, Mode::eval));
    const Tensor<double> yb =
        t.value(split.forward(t, t.constant(x), adj, Mode::eval));
    worst = std::max(worst, max_abs_diff(ya, yb));
  }
  const double secs = seconds_since(t0);
  const bool pass = worst < kEquivTolerance && secs < kEquivBudgetSec;
  report("C2 fused/factored equivalence", pass,
         fmt("max abs diff %.3g over 100 linear-mode instances in %.2fs",
             worst, secs));
}

// ---------------------------------------------------------------------------
// Criterion 3: temporal receptive fields are exactly local. Perturbing one
// input frame moves eval-mode outputs only within the stacked window radius;
// everything outside matches bit for bit.

void criterion_locality() {
  Rng rng(99);
  GraphSpec g{"path", 4, {{0, 1}, {1, 2}, {2, 3}}, 1};
  AdjacencyStack stack = build_adjacency(g, PartitionStrategy::spatial);

  LayerPlan p1, p2;
  p1.c_in = 2, p1.c_out = 3, p1.window = 3, p1.stride = 1, p1.residual = false;
  p2.c_in = 3, p2.c_out = 3, p2.window = 3, p2.stride = 1, p2.residual = true;
  TgnBlock<double> b1(p1, 3, rng, {}, "loc.l0");
  TgnBlock<double> b2(p2, 3, rng, {}, "loc.l1");

  const size_t t_len = 16, t_hit = 7, radius = 2;  // two windows of 3
  Tensor<double> x({1, 2, t_len, 4});
  for (auto& e : x.data) e = rng.uniform(-1.0, 1.0);

  auto run = [&](const Tensor<double>& in) {
    Tape<double> t;
    std::vector<Var> adj;
    for (const auto& a : stack.partitions) adj.push_back(t.constant(a));
    Var h = b1.forward(t, t.constant(in), adj, Mode::eval);
    return t.value(b2.forward(t, h, adj, Mode::eval));
  };

  const Tensor<double> base = run(x);
  Tensor<double> poked = x;
  for (size_t ch = 0; ch < 2; ++ch)
    for (size_t v = 0; v < 4; ++v)
      poked[(ch * t_len + t_hit) * 4 + v] += 0.5;
  const Tensor<double> out = run(poked);

  bool outside_exact = true, inside_moved = false;
  for (size_t ch = 0; ch < 3; ++ch) {
    for (size_t tt = 0; tt < t_len; ++tt) {
      for (size_t v = 0; v < 4; ++v) {
        const double d =
            out[(ch * t_len + tt) * 4 + v] - base[(ch * t_len + tt) * 4 + v];
        const bool inside = tt + radius >= t_hit && tt <= t_hit + radius;
        if (!inside && d != 0.0) outside_exact = false;
        if (tt == t_hit && d != 0.0) inside_moved = true;
      }
    }
  }
  report("C3 temporal locality", outside_exact && inside_moved,
         std::string("frame 7 perturbation: outside +-2 frames ") +
             (outside_exact ? "bitwise unchanged" : "CHANGED") +
             ", at frame 7 " + (inside_moved ? "responds" : "SILENT"));
}

// ---------------------------------------------------------------------------
// Criterion 4: closed-form accounting. The default model lands in the
// published envelope and undercuts the factored window-9 reference on both
// parameters and work, at matched scale sets.

void criterion_accounting() {
  RunConfig def = load_run_config("ntu25_default");
  ModelConfig base_cfg = def.model;
  base_cfg.block = BlockKind::baseline;
  base_cfg.temporal_window = 0;  // re-resolve to the baseline default (9)
  base_cfg.layers.clear();
  base_cfg = resolve(base_cfg);

  const long long params = count_params(def.model).total;
  const long long flops = count_flops(def.model, 1, 300).total;
  const long long b_params = count_params(base_cfg).total;
  const long long b_flops = count_flops(base_cfg, 1, 300).total;

  ModelConfig single = def.model;
  single.scales = {def.model.scales[0]};
  ModelConfig b_single = base_cfg;
  b_single.scales = {base_cfg.scales[0]};

  const bool envelope = params >= kParamLo && params <= kParamHi &&
                        flops >= kFlopLo && flops <= kFlopHi;
  const bool cheaper =
      params < b_params && flops < b_flops &&
      count_params(single).total < count_params(b_single).total &&
      count_flops(single, 1, 300).total < count_flops(b_single, 1, 300).total;

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "params %lld in [2.0M, 3.3M], flops %lld in [12G, 18G]; "
                "factored t=9 reference needs %lld params / %lld flops",
                params, flops, b_params, b_flops);
  report("C4 parameter and work envelope", envelope && cheaper, buf);
}

// ---------------------------------------------------------------------------
// Criterion 5: the shipped preset overfits the deterministic 2-class
// synthetic set to >= 95% train top-1 within the epoch budget, inside the
// wall-clock budget, and a rerun reproduces the report byte for byte.

void criterion_overfit() {
  RunConfig cfg = load_run_config("synth_overfit");
  if (cfg.train.epochs > kOverfitMaxEpochs) {
    report("C5 synthetic overfit", false,
           fmt("preset asks for %.0f epochs, budget is %.0f",
               cfg.train.epochs, kOverfitMaxEpochs));
    return;
  }
  SynthSpec spec;  // defaults: 2 classes x 32 train, 64 frames, seed 1
  SynthDataset ds = synth_dataset(spec);
  PreparedData data = prepare_from_synth(ds, cfg.data, "train");

  MsTgnModel<double> model(cfg.model);
  RunReport first = train_model(model, data, cfg);

  MsTgnModel<double> twin(cfg.model);
  RunReport second = train_model(twin, data, cfg);

  nlohmann::json ja = report_to_json(first);
  nlohmann::json jb = report_to_json(second);
  const double wall = first.wall_seconds + second.wall_seconds;
  ja["wall_seconds"] = 0.0;
  jb["wall_seconds"] = 0.0;

  bool params_match = true;
  auto pa = model.parameters();
  auto pb = twin.parameters();
  for (size_t i = 0; i < pa.size(); ++i) {
    if (pa[i]->value.data != pb[i]->value.data) params_match = false;
  }

  // Loss trend: past warmup the run should sit at its converged floor.
  // Per-epoch comparisons are meaningless there (batch statistics jitter
  // the floor, with rare one-epoch excursions that recover immediately),
  // so the gate is scale-aware: the median post-warmup loss and the final
  // loss must both sit below 5% of the epoch-0 loss.
  bool trending = true;
  if (first.epochs.size() > 21) {
    const double band = 0.05 * std::max(first.epochs[0].loss, 0.2);
    std::vector<double> tail;
    for (size_t e = 21; e < first.epochs.size(); ++e)
      tail.push_back(first.epochs[e].loss);
    std::nth_element(tail.begin(), tail.begin() + tail.size() / 2, tail.end());
    trending = tail[tail.size() / 2] < band &&
               first.epochs.back().loss < band;
  }

  const bool pass = first.final_train_top1 >= kOverfitTarget &&
                    wall < kOverfitBudgetSec && ja.dump() == jb.dump() &&
                    params_match && trending;
  report("C5 synthetic overfit", pass,
         fmt("train top-1 %.4f after %.0f epochs, %.1fs for two runs",
             first.final_train_top1,
             static_cast<double>(first.epochs.size()), wall) +
             (ja.dump() == jb.dump() && params_match
                  ? ", rerun byte-identical"
                  : ", RERUN DIVERGED") +
             (trending ? "" : ", LOSS NOT TRENDING DOWN"));
}

// ---------------------------------------------------------------------------
// Criterion 6: the scale ablation produces its five standard rows on a
// small synthetic set.

void criterion_ablation() {
  RunConfig cfg = load_run_config("synth_overfit");
  cfg.train.epochs = 2;
  cfg.data.pad_frames = 32;

  SynthSpec spec;
  spec.per_class_train = 4;
  spec.per_class_test = 2;
  spec.frames = 32;
  spec.seed = 2;
  SynthDataset ds = synth_dataset(spec);
  PreparedData train = prepare_from_synth(ds, cfg.data, "train");
  PreparedData test = prepare_from_synth(ds, cfg.data, "test");

  AblationReport rep = ablation_run<double>(cfg, train, test, {});
  const char* expect[5] = {"full", "part", "core", "full+part",
                           "full+part+core"};
  bool pass = rep.rows.size() == 5;
  for (size_t i = 0; pass && i < 5; ++i) {
    if (rep.rows[i].name != expect[i]) pass = false;
    if (!(rep.rows[i].test_top1 >= 0.0 && rep.rows[i].test_top1 <= 1.0))
      pass = false;
  }
  report("C6 scale ablation", pass,
         pass ? "5 rows (full, part, core, full+part, full+part+core)"
              : "row set or accuracies malformed");
  if (pass) std::printf("%s", ablation_table(rep).c_str());
}

// ---------------------------------------------------------------------------
// Criterion 7: structural invariants.

void criterion_invariants() {
  std::string failures;

  // 2-clique normalizes to 0.5 everywhere under every strategy.
  for (auto strat : {PartitionStrategy::uniform, PartitionStrategy::distance,
                     PartitionStrategy::spatial}) {
    GraphSpec g{"pair", 2, {{0, 1}}, 0};
    AdjacencyStack st = build_adjacency(g, strat);
    Tensor<double> total({2, 2});
    for (const auto& p : st.partitions)
      for (size_t i = 0; i < 4; ++i) total[i] += p[i];
    for (size_t i = 0; i < 4; ++i) {
      if (std::abs(total[i] - 0.5) > 1e-15) failures += " clique";
    }
  }

  // Relabeling joints permutes block outputs accordingly.
  {
    Rng rng(5);
    GraphSpec g{"star", 4, {{0, 1}, {0, 2}, {0, 3}}, 0};
    const std::vector<size_t> perm = {2, 0, 3, 1};  // new <- old
    GraphSpec pg{"star_p", 4, {}, static_cast<int>(perm[0])};
    for (auto [a, b] : g.edges)
      pg.edges.push_back({static_cast<int>(perm[static_cast<size_t>(a)]),
                          static_cast<int>(perm[static_cast<size_t>(b)])});
    AdjacencyStack st = build_adjacency(g, PartitionStrategy::spatial);
    AdjacencyStack pst = build_adjacency(pg, PartitionStrategy::spatial);

    LayerPlan plan;
    plan.c_in = 2, plan.c_out = 3, plan.window = 3, plan.residual = false;
    TgnBlock<double> block(plan, 3, rng, {}, "perm");
    Tensor<double> x({2, 2, 6, 4});
    for (auto& e : x.data) e = rng.uniform(-1.0, 1.0);
    Tensor<double> px(x.shape);
    for (size_t r = 0; r < x.numel() / 4; ++r)
      for (size_t v = 0; v < 4; ++v) px[r * 4 + perm[v]] = x[r * 4 + v];

    auto run = [&](const AdjacencyStack& s, const Tensor<double>& in) {
      Tape<double> t;
      std::vector<Var> adj;
      for (const auto& a : s.partitions) adj.push_back(t.constant(a));
      return t.value(block.forward(t, t.constant(in), adj, Mode::eval));
    };
    const Tensor<double> y = run(st, x);
    const Tensor<double> py = run(pst, px);
    double worst = 0.0;
    for (size_t r = 0; r < y.numel() / 4; ++r)
      for (size_t v = 0; v < 4; ++v)
        worst = std::max(worst,
                         std::abs(py[r * 4 + perm[v]] - y[r * 4 + v]));
    if (worst > kPermTolerance) failures += " permutation";
  }

  // Replay padding tiles the true frames.
  {
    SkeletonSequence seq;
    seq.layout_id = "ntu25";
    seq.true_frames = 5;
    seq.data = Tensor<double>({3, 5, 25, 2});
    Rng rng(6);
    for (auto& e : seq.data.data) e = rng.uniform(-1.0, 1.0);
    SkeletonSequence padded = pad_replay(seq, 299);
    bool ok = padded.frames() == 299 && padded.true_frames == 5;
    for (size_t ch = 0; ch < 3 && ok; ++ch)
      for (size_t t = 0; t < 299 && ok; ++t)
        for (size_t j = 0; j < 50 && ok; ++j)
          ok = padded.data[(ch * 299 + t) * 50 + j] ==
               seq.data[(ch * 5 + t % 5) * 50 + j];
    if (!ok) failures += " pad";
  }

  // Bone differencing zeroes the root joint.
  {
    SynthSpec spec;
    spec.per_class_train = 1;
    spec.frames = 8;
    SynthDataset ds = synth_dataset(spec);
    SkeletonSequence bones = bone_transform(ds.sequences[0]);
    const SkeletonLayout& lay = layout("ntu25");
    int root = -1;
    for (size_t j = 0; j < lay.parent.size(); ++j)
      if (lay.parent[j] < 0) root = static_cast<int>(j);
    const size_t t_n = bones.frames(), v_n = 25, m_n = 2;
    for (size_t ch = 0; ch < 3; ++ch)
      for (size_t t = 0; t < t_n; ++t)
        for (size_t m = 0; m < m_n; ++m)
          if (bones.data[((ch * t_n + t) * v_n +
                          static_cast<size_t>(root)) *
                             m_n +
                         m] != 0.0)
            failures += " bone-root";
  }

  // Softmax rows sum to one.
  {
    Rng rng(7);
    Tensor<double> s({8, 60});
    for (auto& e : s.data) e = rng.uniform(-10.0, 10.0);
    Tape<double> t;
    const Tensor<double>& p = t.value(ops::softmax(t, t.constant(s)));
    for (size_t r = 0; r < 8; ++r) {
      double sum = 0.0;
      for (size_t k = 0; k < 60; ++k) sum += p[r * 60 + k];
      if (std::abs(sum - 1.0) > kRowSumTolerance) failures += " softmax";
    }
  }

  // Fusion: exact weighted mean, and agreement on the argmax survives it.
  {
    Tensor<double> a = Tensor<double>::from({1, 2}, {1.0, 0.0});
    Tensor<double> b = Tensor<double>::from({1, 2}, {0.0, 1.0});
    Tensor<double> f = fuse_scores({a, b}, {3.0, 1.0});
    if (f[0] != 0.75 || f[1] != 0.25) failures += " fuse-mean";

    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
      Tensor<double> s1({1, 5}), s2({1, 5});
      for (auto& e : s1.data) e = rng.uniform(0.0, 1.0);
      for (auto& e : s2.data) e = rng.uniform(0.0, 1.0);
      const size_t top = rng.below(5);
      s1[top] += 1.0;
      s2[top] += 1.0;  // both streams favor `top`
      Tensor<double> fu =
          fuse_scores({s1, s2}, {rng.uniform(0.1, 3.0), rng.uniform(0.1, 3.0)});
      size_t arg = 0;
      for (size_t k = 1; k < 5; ++k)
        if (fu[k] > fu[arg]) arg = k;
      if (arg != top) failures += " fuse-argmax";
    }
  }

  report("C7 structural invariants", failures.empty(),
         failures.empty()
             ? "clique, permutation, padding, bone root, softmax, fusion"
             : "failing:" + failures);
}

}  // namespace

int main() {
  std::printf("acceptance checks\n=================\n");
  criterion_gradients();
  criterion_equivalence();
  criterion_locality();
  criterion_accounting();
  criterion_overfit();
  criterion_ablation();
  criterion_invariants();
  std::printf("=================\n%s (%d failure%s)\n",
              g_failures == 0 ? "ACCEPTED" : "REJECTED", g_failures,
              g_failures == 1 ? "" : "s");
  return g_failures == 0 ? 0 : 1;
}
