#include "tgn/model.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tgn/config.hpp"
#include "tgn/errors.hpp"

namespace tgn {

using nlohmann::json;
using std::size_t;

std::vector<LayerPlan> default_layer_plan(size_t in_channels, size_t window) {
  std::vector<LayerPlan> plan;
  auto stage = [&](size_t c_in, size_t c_out, size_t stride, bool residual) {
    plan.push_back({c_in, c_out, window, stride, residual});
  };
  stage(in_channels, 64, 1, false);
  stage(64, 64, 1, true);
  stage(64, 64, 1, true);
  stage(64, 64, 1, true);
  stage(64, 128, 2, true);
  stage(128, 128, 1, true);
  stage(128, 128, 1, true);
  stage(128, 256, 2, true);
  stage(256, 256, 1, true);
  stage(256, 256, 1, true);
  return plan;
}

BlockKind block_kind_from(const std::string& name) {
  if (name == "tgn") return BlockKind::tgn;
  if (name == "baseline") return BlockKind::baseline;
  throw ConfigError("unknown block kind '" + name + "'");
}

std::string to_string(BlockKind k) {
  return k == BlockKind::tgn ? "tgn" : "baseline";
}

ModelConfig resolve(ModelConfig cfg) {
  const SkeletonLayout& lay = layout(cfg.layout_id);
  if (cfg.class_count < 2)
    throw ConfigError("model: class_count must be >= 2, got " +
                      std::to_string(cfg.class_count));
  if (cfg.temporal_window == 0)
    cfg.temporal_window = cfg.block == BlockKind::tgn ? 3 : 9;
  if (cfg.temporal_window % 2 == 0)
    throw ConfigError("model: temporal_window must be odd, got " +
                      std::to_string(cfg.temporal_window));
  if (cfg.scales.empty()) cfg.scales = default_scales(lay);
  std::vector<std::string> names;
  for (const auto& s : cfg.scales) {
    validate_scale(s, lay);
    for (const auto& n : names)
      if (n == s.name)
        throw ConfigError("model: duplicate scale name '" + s.name + "'");
    names.push_back(s.name);
  }
  if (cfg.layers.empty())
    cfg.layers = default_layer_plan(lay.channels(), cfg.temporal_window);
  if (cfg.layers.front().c_in != lay.channels())
    throw ConfigError("model: first layer expects " +
                      std::to_string(cfg.layers.front().c_in) +
                      " channels but layout " + lay.id + " provides " +
                      std::to_string(lay.channels()));
  for (size_t l = 0; l < cfg.layers.size(); ++l) {
    const auto& p = cfg.layers[l];
    if (p.c_in == 0 || p.c_out == 0)
      throw ConfigError("model: layer " + std::to_string(l) +
                        " has a zero channel extent");
    if (p.window % 2 == 0)
      throw ConfigError("model: layer " + std::to_string(l) +
                        " has even temporal window " +
                        std::to_string(p.window));
    if (p.stride < 1)
      throw ConfigError("model: layer " + std::to_string(l) + " has stride 0");
    if (l > 0 && p.c_in != cfg.layers[l - 1].c_out)
      throw ConfigError("model: layer " + std::to_string(l) + " expects " +
                        std::to_string(p.c_in) + " channels but layer " +
                        std::to_string(l - 1) + " emits " +
                        std::to_string(cfg.layers[l - 1].c_out));
  }
  return cfg;
}

namespace {

size_t partition_count(PartitionStrategy s) {
  switch (s) {
    case PartitionStrategy::uniform: return 1;
    case PartitionStrategy::distance: return 2;
    case PartitionStrategy::spatial: return 3;
  }
  return 0;
}

template <class S>
Tensor<S> normal_init(Rng& rng, std::vector<size_t> shape, double sd) {
  Tensor<S> t(std::move(shape));
  for (auto& e : t.data) e = static_cast<S>(rng.normal() * sd);
  return t;
}

size_t ceil_div(size_t a, size_t b) { return (a + b - 1) / b; }

}  // namespace

template <class S>
TgnBlock<S>::TgnBlock(const LayerPlan& plan, size_t partitions, Rng& rng,
                      BlockOptions opts, const std::string& tag)
    : weight(tag + ".weight",
             normal_init<S>(rng, {partitions, plan.c_out, plan.c_in,
                                  plan.window},
                            std::sqrt(2.0 / static_cast<double>(
                                                plan.c_in * plan.window)))),
      bias_param(tag + ".bias", Tensor<S>({plan.c_out})),
      gamma(tag + ".gamma", Tensor<S>({plan.c_out}, S(1))),
      beta(tag + ".beta", Tensor<S>({plan.c_out})),
      residual_weight(tag + ".residual", Tensor<S>({0})),
      norm_state(plan.c_out),
      plan_(plan),
      partitions_(partitions),
      opts_(opts) {
  require(partitions >= 1, "tgn block: need at least one partition");
  mapped_residual_ =
      plan.residual && !(plan.c_in == plan.c_out && plan.stride == 1);
  if (mapped_residual_)
    residual_weight = Param<S>(
        tag + ".residual",
        normal_init<S>(rng, {plan.c_out, plan.c_in, 1},
                       std::sqrt(2.0 / static_cast<double>(plan.c_in))));
}

template <class S>
Var TgnBlock<S>::forward(Tape<S>& t, Var x, const std::vector<Var>& adjacency,
                         Mode mode) {
  require(adjacency.size() == partitions_,
          "tgn block: " + std::to_string(adjacency.size()) +
              " adjacency vars for " + std::to_string(partitions_) +
              " partitions");
  Var w = t.parameter(weight);
  Var z{};
  for (size_t p = 0; p < partitions_; ++p) {
    Var wp = ops::slice_axis0(t, w, p);
    Var cp = ops::temporal_conv(t, x, wp, std::nullopt, plan_.stride);
    Var mp = ops::graph_mix(t, adjacency[p], cp);
    z = p == 0 ? mp : ops::add(t, z, mp);
  }
  if (opts_.bias) z = ops::bias_add(t, z, t.parameter(bias_param));
  if (opts_.norm)
    z = ops::batch_norm(t, z, t.parameter(gamma), t.parameter(beta),
                        norm_state, mode);
  if (plan_.residual) {
    Var r = mapped_residual_
                ? ops::temporal_conv(t, x, t.parameter(residual_weight),
                                     std::nullopt, plan_.stride)
                : x;
    z = ops::add(t, z, r);
  }
  if (opts_.act) z = ops::relu(t, z);
  return z;
}

template <class S>
void TgnBlock<S>::collect(std::vector<Param<S>*>& out) {
  out.push_back(&weight);
  if (opts_.bias) out.push_back(&bias_param);
  if (opts_.norm) {
    out.push_back(&gamma);
    out.push_back(&beta);
  }
  if (mapped_residual_) out.push_back(&residual_weight);
}

template <class S>
BaselineBlock<S>::BaselineBlock(const LayerPlan& plan, size_t partitions,
                                Rng& rng, BlockOptions opts,
                                const std::string& tag)
    : mix_weight(tag + ".mix_weight",
                 normal_init<S>(
                     rng, {partitions, plan.c_out, plan.c_in, 1},
                     std::sqrt(2.0 / static_cast<double>(plan.c_in)))),
      mix_bias(tag + ".mix_bias", Tensor<S>({plan.c_out})),
      gamma(tag + ".gamma", Tensor<S>({plan.c_out}, S(1))),
      beta(tag + ".beta", Tensor<S>({plan.c_out})),
      time_weight(tag + ".time_weight",
                  normal_init<S>(rng, {plan.c_out, plan.c_out, plan.window},
                                 std::sqrt(2.0 / static_cast<double>(
                                                     plan.c_out *
                                                     plan.window)))),
      time_bias(tag + ".time_bias", Tensor<S>({plan.c_out})),
      norm_state(plan.c_out),
      plan_(plan),
      partitions_(partitions),
      opts_(opts) {
  require(partitions >= 1, "baseline block: need at least one partition");
}

template <class S>
Var BaselineBlock<S>::forward(Tape<S>& t, Var x,
                              const std::vector<Var>& adjacency, Mode mode) {
  require(adjacency.size() == partitions_,
          "baseline block: " + std::to_string(adjacency.size()) +
              " adjacency vars for " + std::to_string(partitions_) +
              " partitions");
  Var w = t.parameter(mix_weight);
  Var z{};
  for (size_t p = 0; p < partitions_; ++p) {
    Var wp = ops::slice_axis0(t, w, p);
    Var cp = ops::temporal_conv(t, x, wp, std::nullopt, 1);
    Var mp = ops::graph_mix(t, adjacency[p], cp);
    z = p == 0 ? mp : ops::add(t, z, mp);
  }
  if (opts_.bias) z = ops::bias_add(t, z, t.parameter(mix_bias));
  if (opts_.norm)
    z = ops::batch_norm(t, z, t.parameter(gamma), t.parameter(beta),
                        norm_state, mode);
  if (opts_.act) z = ops::relu(t, z);
  std::optional<Var> tb;
  if (opts_.bias) tb = t.parameter(time_bias);
  return ops::temporal_conv(t, z, t.parameter(time_weight), tb, plan_.stride);
}

template <class S>
void BaselineBlock<S>::collect(std::vector<Param<S>*>& out) {
  out.push_back(&mix_weight);
  if (opts_.bias) out.push_back(&mix_bias);
  if (opts_.norm) {
    out.push_back(&gamma);
    out.push_back(&beta);
  }
  out.push_back(&time_weight);
  if (opts_.bias) out.push_back(&time_bias);
}

template <class S>
MsTgnModel<S>::MsTgnModel(ModelConfig cfg) : cfg_(resolve(std::move(cfg))) {
  const SkeletonLayout& lay = layout(cfg_.layout_id);
  const size_t k_n = partition_count(cfg_.strategy);

  for (const auto& scale : cfg_.scales) {
    std::vector<size_t> subset;
    for (int v : scale.nodes) subset.push_back(static_cast<size_t>(v));
    subsets_.push_back(std::move(subset));
    stacks_.push_back(build_adjacency(scale_graph(scale, lay), cfg_.strategy));
    std::vector<Tensor<S>> cast;
    for (const auto& p : stacks_.back().partitions)
      cast.push_back(tensor_cast<double, S>(p));
    adj_.push_back(std::move(cast));
  }

  Rng rng(cfg_.init_seed);
  const size_t n_stacks = cfg_.share_across_scales ? 1 : cfg_.scales.size();
  for (size_t i = 0; i < n_stacks; ++i) {
    if (cfg_.block == BlockKind::tgn) {
      std::vector<TgnBlock<S>> stack;
      for (size_t l = 0; l < cfg_.layers.size(); ++l)
        stack.emplace_back(cfg_.layers[l], k_n, rng, BlockOptions{},
                           "s" + std::to_string(i) + ".l" + std::to_string(l));
      tgn_.push_back(std::move(stack));
    } else {
      std::vector<BaselineBlock<S>> stack;
      for (size_t l = 0; l < cfg_.layers.size(); ++l)
        stack.emplace_back(cfg_.layers[l], k_n, rng, BlockOptions{},
                           "s" + std::to_string(i) + ".l" + std::to_string(l));
      base_.push_back(std::move(stack));
    }
  }

  if (cfg_.edge_masks) {
    for (size_t s = 0; s < cfg_.scales.size(); ++s) {
      const size_t v_s = subsets_[s].size();
      std::vector<Param<S>> per_layer;
      for (size_t l = 0; l < cfg_.layers.size(); ++l)
        per_layer.emplace_back(
            "scale" + std::to_string(s) + ".l" + std::to_string(l) + ".mask",
            Tensor<S>({k_n, v_s, v_s}, S(1)));
      masks_.push_back(std::move(per_layer));
    }
  }

  const size_t c_final = cfg_.layers.back().c_out;
  const auto classes = static_cast<size_t>(cfg_.class_count);
  for (size_t i = 0; i < n_stacks; ++i) {
    cls_weight_.emplace_back(
        "s" + std::to_string(i) + ".cls.weight",
        normal_init<S>(rng, {classes, c_final},
                       std::sqrt(1.0 / static_cast<double>(c_final))));
    cls_bias_.emplace_back("s" + std::to_string(i) + ".cls.bias",
                           Tensor<S>({classes}));
  }
}

template <class S>
size_t MsTgnModel<S>::stack_count() const {
  return cfg_.share_across_scales ? 1 : cfg_.scales.size();
}

template <class S>
size_t MsTgnModel<S>::stack_of(size_t scale) const {
  return cfg_.share_across_scales ? 0 : scale;
}

template <class S>
const std::vector<size_t>& MsTgnModel<S>::joint_subset(size_t scale) const {
  require(scale < subsets_.size(), "joint_subset: scale index out of range");
  return subsets_[scale];
}

template <class S>
const AdjacencyStack& MsTgnModel<S>::adjacency(size_t scale) const {
  require(scale < stacks_.size(), "adjacency: scale index out of range");
  return stacks_[scale];
}

template <class S>
std::vector<Var> MsTgnModel<S>::adjacency_vars(Tape<S>& tape, size_t scale,
                                               size_t layer) {
  std::vector<Var> out;
  Var mask{};
  if (cfg_.edge_masks) mask = tape.parameter(masks_[scale][layer]);
  for (size_t p = 0; p < adj_[scale].size(); ++p) {
    Var a = tape.constant(adj_[scale][p]);
    if (cfg_.edge_masks)
      a = ops::mul(tape, a, ops::slice_axis0(tape, mask, p));
    out.push_back(a);
  }
  return out;
}

template <class S>
Var MsTgnModel<S>::features(Tape<S>& tape, Var x, size_t scale, Mode mode) {
  require(scale < cfg_.scales.size(), "features: scale index out of range");
  const auto& xv = tape.value(x);
  require(xv.rank() == 4, "features: expected [N,C,T,V], got " +
                              xv.shape_string());
  require(xv.extent(1) == cfg_.layers.front().c_in,
          "features: channel extent mismatch");
  require(xv.extent(3) == subsets_[scale].size(),
          "features: joint extent " + std::to_string(xv.extent(3)) +
              " != scale size " + std::to_string(subsets_[scale].size()));
  Var h = x;
  const size_t stack = stack_of(scale);
  for (size_t l = 0; l < cfg_.layers.size(); ++l) {
    const auto adj = adjacency_vars(tape, scale, l);
    h = cfg_.block == BlockKind::tgn
            ? tgn_[stack][l].forward(tape, h, adj, mode)
            : base_[stack][l].forward(tape, h, adj, mode);
  }
  return h;
}

template <class S>
std::vector<Var> MsTgnModel<S>::scale_scores(Tape<S>& tape, Var x, Mode mode) {
  const SkeletonLayout& lay = layout(cfg_.layout_id);
  const auto& xv = tape.value(x);
  require(xv.rank() == 5, "model: expected [N,C,T,V,M], got " +
                              xv.shape_string());
  require(xv.extent(1) == cfg_.layers.front().c_in,
          "model: input has " + std::to_string(xv.extent(1)) +
              " channels, stack expects " +
              std::to_string(cfg_.layers.front().c_in));
  require(xv.extent(3) == lay.num_joints,
          "model: input has " + std::to_string(xv.extent(3)) +
              " joints, layout " + lay.id + " has " +
              std::to_string(lay.num_joints));
  require(xv.extent(4) == lay.max_persons,
          "model: input has " + std::to_string(xv.extent(4)) +
              " bodies, layout " + lay.id + " carries " +
              std::to_string(lay.max_persons));
  const size_t m = xv.extent(4);

  Var folded = ops::fold_persons(tape, x);
  std::vector<Var> scores;
  for (size_t s = 0; s < cfg_.scales.size(); ++s) {
    Var h = ops::gather_joints(tape, folded, subsets_[s]);
    const size_t stack = stack_of(s);
    for (size_t l = 0; l < cfg_.layers.size(); ++l) {
      const auto adj = adjacency_vars(tape, s, l);
      h = cfg_.block == BlockKind::tgn
              ? tgn_[stack][l].forward(tape, h, adj, mode)
              : base_[stack][l].forward(tape, h, adj, mode);
    }
    Var pooled = ops::global_avg_pool(tape, h);
    Var merged = ops::person_mean(tape, pooled, m);
    scores.push_back(ops::linear(tape, merged,
                                 tape.parameter(cls_weight_[stack]),
                                 tape.parameter(cls_bias_[stack])));
  }
  return scores;
}

template <class S>
Var MsTgnModel<S>::forward(Tape<S>& tape, Var x, Mode mode) {
  const auto scores = scale_scores(tape, x, mode);
  Var acc = scores.front();
  for (size_t s = 1; s < scores.size(); ++s)
    acc = ops::add(tape, acc, scores[s]);
  return ops::scale(tape, acc, 1.0 / static_cast<double>(scores.size()));
}

template <class S>
std::vector<Param<S>*> MsTgnModel<S>::parameters() {
  std::vector<Param<S>*> out;
  for (auto& stack : tgn_)
    for (auto& block : stack) block.collect(out);
  for (auto& stack : base_)
    for (auto& block : stack) block.collect(out);
  for (auto& per_scale : masks_)
    for (auto& mask : per_scale) out.push_back(&mask);
  for (size_t i = 0; i < cls_weight_.size(); ++i) {
    out.push_back(&cls_weight_[i]);
    out.push_back(&cls_bias_[i]);
  }
  return out;
}

template <class S>
std::vector<ops::BatchNormState<S>*> MsTgnModel<S>::norm_states() {
  std::vector<ops::BatchNormState<S>*> out;
  for (auto& stack : tgn_)
    for (auto& block : stack) out.push_back(&block.norm_state);
  for (auto& stack : base_)
    for (auto& block : stack) out.push_back(&block.norm_state);
  return out;
}

CountReport count_params(const ModelConfig& raw) {
  const ModelConfig cfg = resolve(raw);
  const auto k_n = static_cast<long long>(partition_count(cfg.strategy));
  CountReport report;
  auto add = [&](const std::string& name, long long count) {
    report.items.push_back({name, count});
    report.total += count;
  };
  const long long stacks =
      cfg.share_across_scales ? 1 : static_cast<long long>(cfg.scales.size());
  for (long long i = 0; i < stacks; ++i) {
    const std::string stag = "stack" + std::to_string(i);
    for (size_t l = 0; l < cfg.layers.size(); ++l) {
      const auto& p = cfg.layers[l];
      const auto c_in = static_cast<long long>(p.c_in);
      const auto c_out = static_cast<long long>(p.c_out);
      const auto w = static_cast<long long>(p.window);
      long long n = 0;
      if (cfg.block == BlockKind::tgn) {
        n = k_n * c_out * c_in * w;  // fused conv
        n += c_out;                  // bias
        n += 2 * c_out;              // norm affine
        const bool mapped =
            p.residual && !(p.c_in == p.c_out && p.stride == 1);
        if (mapped) n += c_out * c_in;  // shortcut map
      } else {
        n = k_n * c_out * c_in;  // 1x1 mixing convs
        n += c_out;              // mixing bias
        n += 2 * c_out;          // norm affine
        n += c_out * c_out * w;  // temporal conv
        n += c_out;              // temporal bias
      }
      add(stag + ".layer" + std::to_string(l), n);
    }
  }
  if (cfg.edge_masks)
    for (const auto& s : cfg.scales) {
      const auto v_s = static_cast<long long>(s.nodes.size());
      add("masks." + s.name,
          k_n * v_s * v_s * static_cast<long long>(cfg.layers.size()));
    }
  const auto c_final = static_cast<long long>(cfg.layers.back().c_out);
  const auto classes = static_cast<long long>(cfg.class_count);
  for (long long i = 0; i < stacks; ++i)
    add("stack" + std::to_string(i) + ".classifier",
        c_final * classes + classes);
  return report;
}

CountReport count_flops(const ModelConfig& raw, size_t batch, size_t frames) {
  const ModelConfig cfg = resolve(raw);
  const SkeletonLayout& lay = layout(cfg.layout_id);
  const auto k_n = static_cast<long long>(partition_count(cfg.strategy));
  const long long nm =
      static_cast<long long>(batch) * static_cast<long long>(lay.max_persons);
  CountReport report;
  auto add = [&](const std::string& name, long long count) {
    report.items.push_back({name, count});
    report.total += count;
  };

  for (const auto& scale : cfg.scales) {
    const auto v_s = static_cast<long long>(scale.nodes.size());
    long long conv = 0, mix = 0, shortcut = 0;
    size_t t_in = frames;
    for (const auto& p : cfg.layers) {
      const size_t t_out = ceil_div(t_in, p.stride);
      const auto c_in = static_cast<long long>(p.c_in);
      const auto c_out = static_cast<long long>(p.c_out);
      const auto w = static_cast<long long>(p.window);
      if (cfg.block == BlockKind::tgn) {
        conv += k_n * c_out * c_in * w * static_cast<long long>(t_out) * v_s;
        mix += c_out * static_cast<long long>(t_out) * v_s * v_s;
        if (p.residual && !(p.c_in == p.c_out && p.stride == 1))
          shortcut += c_out * c_in * static_cast<long long>(t_out) * v_s;
      } else {
        conv += k_n * c_out * c_in * static_cast<long long>(t_in) * v_s;
        conv += c_out * c_out * w * static_cast<long long>(t_out) * v_s;
        mix += c_out * static_cast<long long>(t_in) * v_s * v_s;
      }
      t_in = t_out;
    }
    add("scale." + scale.name + ".conv", conv * nm);
    add("scale." + scale.name + ".mix", mix * nm);
    if (shortcut != 0) add("scale." + scale.name + ".shortcut", shortcut * nm);
    add("scale." + scale.name + ".classifier",
        static_cast<long long>(cfg.layers.back().c_out) *
            static_cast<long long>(cfg.class_count) *
            static_cast<long long>(batch));
  }
  return report;
}

namespace {

const char* const kB64 =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const unsigned char* data, size_t n) {
  std::string out;
  out.reserve((n + 2) / 3 * 4);
  for (size_t i = 0; i < n; i += 3) {
    const unsigned b0 = data[i];
    const unsigned b1 = i + 1 < n ? data[i + 1] : 0;
    const unsigned b2 = i + 2 < n ? data[i + 2] : 0;
    out.push_back(kB64[b0 >> 2]);
    out.push_back(kB64[((b0 & 0x3) << 4) | (b1 >> 4)]);
    out.push_back(i + 1 < n ? kB64[((b1 & 0xF) << 2) | (b2 >> 6)] : '=');
    out.push_back(i + 2 < n ? kB64[b2 & 0x3F] : '=');
  }
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  int lookup[256];
  for (auto& v : lookup) v = -1;
  for (int i = 0; i < 64; ++i) lookup[static_cast<unsigned char>(kB64[i])] = i;
  std::vector<unsigned char> out;
  unsigned buffer = 0;
  int bits = 0;
  for (char ch : text) {
    if (ch == '=') break;
    const int v = lookup[static_cast<unsigned char>(ch)];
    if (v < 0) throw ParseError("checkpoint: invalid base64 payload");
    buffer = (buffer << 6) | static_cast<unsigned>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<unsigned char>((buffer >> bits) & 0xFF));
    }
  }
  return out;
}

template <class S>
std::string encode_tensor(const Tensor<S>& t) {
  std::vector<double> wide(t.numel());
  for (size_t i = 0; i < t.numel(); ++i) wide[i] = static_cast<double>(t[i]);
  return base64_encode(reinterpret_cast<const unsigned char*>(wide.data()),
                       wide.size() * sizeof(double));
}

template <class S>
void decode_into(const std::string& text, Tensor<S>& t, const std::string& id) {
  const auto bytes = base64_decode(text);
  if (bytes.size() != t.numel() * sizeof(double))
    throw ParseError("checkpoint: tensor '" + id + "' holds " +
                     std::to_string(bytes.size() / sizeof(double)) +
                     " values, expected " + std::to_string(t.numel()));
  std::vector<double> wide(t.numel());
  std::memcpy(wide.data(), bytes.data(), bytes.size());
  for (size_t i = 0; i < t.numel(); ++i) t[i] = static_cast<S>(wide[i]);
}

}  // namespace

template <class S>
void save_model(MsTgnModel<S>& model, const std::string& path) {
  json doc;
  doc["format"] = "tgn-model-v1";
  doc["dtype"] = dtype_of<S>() == Dtype::f32 ? "f32" : "f64";
  doc["config"] = model_config_to_json(model.config());
  json tensors = json::object();
  for (Param<S>* p : model.parameters()) {
    json entry;
    entry["shape"] = p->value.shape;
    entry["data"] = encode_tensor(p->value);
    tensors[p->id] = std::move(entry);
  }
  doc["tensors"] = std::move(tensors);
  json norms = json::array();
  for (auto* st : model.norm_states())
    norms.push_back({{"mean", encode_tensor(st->running_mean)},
                     {"var", encode_tensor(st->running_var)}});
  doc["norm"] = std::move(norms);
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write checkpoint '" + path + "'");
  out << doc.dump() << "\n";
}

template <class S>
MsTgnModel<S> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open checkpoint '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("checkpoint: invalid JSON: " + std::string(e.what()));
  }
  if (!doc.is_object() || doc.value("format", "") != "tgn-model-v1")
    throw ParseError("checkpoint: unrecognized format");
  MsTgnModel<S> model(model_config_from_json(doc.at("config")));

  const json& tensors = doc.at("tensors");
  for (Param<S>* p : model.parameters()) {
    if (!tensors.contains(p->id))
      throw ParseError("checkpoint: missing tensor '" + p->id + "'");
    const json& entry = tensors.at(p->id);
    const auto shape = entry.at("shape").get<std::vector<size_t>>();
    if (shape != p->value.shape)
      throw ParseError("checkpoint: tensor '" + p->id + "' has shape " +
                       Tensor<S>(shape).shape_string() + ", expected " +
                       p->value.shape_string());
    decode_into(entry.at("data").get<std::string>(), p->value, p->id);
  }
  const json& norms = doc.at("norm");
  auto states = model.norm_states();
  if (!norms.is_array() || norms.size() != states.size())
    throw ParseError("checkpoint: expected " + std::to_string(states.size()) +
                     " norm states");
  for (size_t i = 0; i < states.size(); ++i) {
    decode_into(norms[i].at("mean").get<std::string>(),
                states[i]->running_mean, "norm.mean");
    decode_into(norms[i].at("var").get<std::string>(), states[i]->running_var,
                "norm.var");
  }
  return model;
}

template class TgnBlock<float>;
template class TgnBlock<double>;
template class BaselineBlock<float>;
template class BaselineBlock<double>;
template class MsTgnModel<float>;
template class MsTgnModel<double>;
template void save_model<float>(MsTgnModel<float>&, const std::string&);
template void save_model<double>(MsTgnModel<double>&, const std::string&);
template MsTgnModel<float> load_model<float>(const std::string&);
template MsTgnModel<double> load_model<double>(const std::string&);

}  // namespace tgn
