#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tgn/graph.hpp"
#include "tgn/ops.hpp"
#include "tgn/rng.hpp"
#include "tgn/skeleton.hpp"

namespace tgn {

/// One stage of the feature stack. `window` is the temporal kernel width
/// (odd); stride 2 halves the frame axis. For the factored baseline block the
/// window applies to its separate temporal convolution.
struct LayerPlan {
  std::size_t c_in = 0, c_out = 0;
  std::size_t window = 3, stride = 1;
  bool residual = true;
};

/// The standard 10-stage channel plan: 64 x4, 128 x3, 256 x3, with temporal
/// halving at stages 5 and 8. The first stage takes the raw input channels
/// and has no residual.
std::vector<LayerPlan> default_layer_plan(std::size_t in_channels,
                                          std::size_t window);

enum class BlockKind { tgn, baseline };
BlockKind block_kind_from(const std::string& name);
std::string to_string(BlockKind k);

struct ModelConfig {
  std::string layout_id = "ntu25";
  int class_count = 60;
  PartitionStrategy strategy = PartitionStrategy::spatial;
  BlockKind block = BlockKind::tgn;
  bool share_across_scales = true;  // one parameter set serves every scale
  bool edge_masks = true;           // learned per-scale edge importance
  std::size_t temporal_window = 0;  // 0: kind default (tgn 3, baseline 9)
  std::vector<ScaleDefinition> scales;  // empty: default_scales(layout)
  std::vector<LayerPlan> layers;        // empty: default_layer_plan
  std::uint64_t init_seed = 1;
};

/// Fills defaulted fields and validates the result (channel chain, scale
/// subsets, class count). Throws ConfigError on contradictions.
ModelConfig resolve(ModelConfig cfg);

/// Ablation switches for single blocks: the linear core (convolution and
/// graph mixing) stays, everything around it can be turned off.
struct BlockOptions {
  bool bias = true;
  bool norm = true;
  bool act = true;
};

/// Fused block: per-partition temporal convolution feeding graph mixing,
///   y = relu(BN(bias + sum_p mix(adj_p, conv_p(x))) + residual(x)).
/// The weight is one tensor [K, c_out, c_in, window]; partition p owns
/// slab p. adjacency vars are supplied per call so masks stay outside.
template <class S>
class TgnBlock {
 public:
  TgnBlock(const LayerPlan& plan, std::size_t partitions, Rng& rng,
           BlockOptions opts = {}, const std::string& tag = "block");

  /// x: [N, c_in, T, V]; adjacency: one [V, V] var per partition.
  Var forward(Tape<S>& tape, Var x, const std::vector<Var>& adjacency,
              Mode mode);

  void collect(std::vector<Param<S>*>& out);

  const LayerPlan& plan() const { return plan_; }
  std::size_t partitions() const { return partitions_; }
  bool mapped_residual() const { return mapped_residual_; }

  Param<S> weight;             // [K, c_out, c_in, window]
  Param<S> bias_param;         // [c_out]
  Param<S> gamma, beta;        // [c_out]
  Param<S> residual_weight;    // [c_out, c_in, 1] when the shortcut is mapped
  ops::BatchNormState<S> norm_state;

 private:
  LayerPlan plan_;
  std::size_t partitions_;
  BlockOptions opts_;
  bool mapped_residual_ = false;
};

/// Factored reference block: 1x1 per-partition convolutions feeding graph
/// mixing, then a separate temporal convolution,
///   y = conv_t(relu(BN(bias + sum_p mix(adj_p, conv1x1_p(x))))).
/// No residual path; the stride lives in the temporal stage.
template <class S>
class BaselineBlock {
 public:
  BaselineBlock(const LayerPlan& plan, std::size_t partitions, Rng& rng,
                BlockOptions opts = {}, const std::string& tag = "block");

  Var forward(Tape<S>& tape, Var x, const std::vector<Var>& adjacency,
              Mode mode);

  void collect(std::vector<Param<S>*>& out);

  const LayerPlan& plan() const { return plan_; }

  Param<S> mix_weight;   // [K, c_out, c_in, 1]
  Param<S> mix_bias;     // [c_out]
  Param<S> gamma, beta;  // [c_out]
  Param<S> time_weight;  // [c_out, c_out, window]
  Param<S> time_bias;    // [c_out]
  ops::BatchNormState<S> norm_state;

 private:
  LayerPlan plan_;
  std::size_t partitions_;
  BlockOptions opts_;
};

/// The multi-scale network: per scale, gather the joint subset, run the
/// block stack over that scale's partitioned adjacency (elementwise-scaled
/// by a learned mask per block), pool, and classify. Scores fuse across
/// scales with equal weights. Bodies fold into the batch before the stack
/// and average back after pooling.
template <class S>
class MsTgnModel {
 public:
  explicit MsTgnModel(ModelConfig cfg);

  /// x: [N, C, T, V_full, M] -> fused class scores [N, class_count].
  Var forward(Tape<S>& tape, Var x, Mode mode);

  /// Per-scale scores, same order as config().scales.
  std::vector<Var> scale_scores(Tape<S>& tape, Var x, Mode mode);

  /// Runs one scale's stack on an already-gathered input [N, c_in, T, V_s]
  /// and returns the pre-pool feature map [N, c_final, T', V_s].
  Var features(Tape<S>& tape, Var x, std::size_t scale, Mode mode);

  /// All trainable parameters in a stable order.
  std::vector<Param<S>*> parameters();

  const ModelConfig& config() const { return cfg_; }
  std::size_t scale_count() const { return cfg_.scales.size(); }
  std::size_t stack_count() const;
  const std::vector<std::size_t>& joint_subset(std::size_t scale) const;
  const AdjacencyStack& adjacency(std::size_t scale) const;

  /// Norm states in parameter-stack order, for checkpointing.
  std::vector<ops::BatchNormState<S>*> norm_states();

 private:
  std::size_t stack_of(std::size_t scale) const;
  std::vector<Var> adjacency_vars(Tape<S>& tape, std::size_t scale,
                                  std::size_t layer);

  ModelConfig cfg_;
  std::vector<std::vector<std::size_t>> subsets_;
  std::vector<AdjacencyStack> stacks_;
  std::vector<std::vector<Tensor<S>>> adj_;          // [scale][partition]
  std::vector<std::vector<TgnBlock<S>>> tgn_;        // [stack][layer]
  std::vector<std::vector<BaselineBlock<S>>> base_;  // [stack][layer]
  std::vector<std::vector<Param<S>>> masks_;         // [scale][layer]
  std::vector<Param<S>> cls_weight_, cls_bias_;      // [stack]
};

/// Itemized closed-form parameter and work accounting, computed from the
/// config alone (cross-checked against live tensors in the tests).
struct CountItem {
  std::string name;
  long long count = 0;
};

struct CountReport {
  std::vector<CountItem> items;
  long long total = 0;
};

CountReport count_params(const ModelConfig& cfg);

/// Multiply-accumulate count for one forward pass over a batch of
/// `batch` sequences of `frames` frames (reported under the conventional
/// "FLOPs" label by the CLI). Graph mixing is charged once per block at its
/// dense V^2 cost: the partition supports are disjoint subsets of A + I, so
/// one dense pass bounds their combined work.
CountReport count_flops(const ModelConfig& cfg, std::size_t batch,
                        std::size_t frames);

/// Checkpoints: JSON envelope holding the resolved config, every parameter
/// tensor (base64 little-endian f64), and the normalization running stats.
template <class S>
void save_model(MsTgnModel<S>& model, const std::string& path);
template <class S>
MsTgnModel<S> load_model(const std::string& path);

}  // namespace tgn
