#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tgn/config.hpp"
#include "tgn/model.hpp"
#include "tgn/skeleton.hpp"

namespace tgn {

/// SGD with optional Nesterov momentum. Weight decay folds into the
/// gradient first, then per parameter:
///   v = mu * v + g
///   w -= lr * (g + mu * v)   [nesterov]
///   w -= lr * v              [plain]
template <class S>
class SgdOptimizer {
 public:
  SgdOptimizer(std::vector<Param<S>*> params, double momentum, bool nesterov,
               double weight_decay);

  void zero_grad();
  void step(double lr);

 private:
  std::vector<Param<S>*> params_;
  std::vector<Tensor<S>> velocity_;
  double momentum_;
  bool nesterov_;
  double weight_decay_;
};

/// Step schedule: base_lr * 0.1^(number of decay epochs <= epoch).
double lr_at(double base_lr, const std::vector<int>& decay_epochs, int epoch);

/// Fraction of rows whose label ranks in the top k. Ties resolve toward the
/// lower class index, so a label can only score when it beats every
/// equal-scored class above it.
double topk_accuracy(const Tensor<double>& scores,
                     const std::vector<int>& labels, int k);

/// Row-wise softmax over [N, K], numerically stabilized.
Tensor<double> softmax_rows(const Tensor<double>& scores);

/// Weighted mean of per-stream score rows (shapes must agree):
///   fused = sum_i w_i * scores_i / sum_i w_i.
/// An empty stream list is a contract error. Inputs are typically
/// probability rows from softmax_rows.
Tensor<double> fuse_scores(const std::vector<Tensor<double>>& streams,
                           const std::vector<double>& weights);

/// A whole split, preprocessed and stacked: [N, C, T, V, M] plus labels.
struct PreparedData {
  Tensor<double> x;
  std::vector<int> labels;
  std::string layout_id;
  int class_count = 0;

  std::size_t size() const { return labels.size(); }
};

/// Preprocessing per sequence: bone differencing when stream is "bone",
/// center anchoring when cfg.center, then replay padding to cfg.pad_frames.
PreparedData prepare_sequences(const std::vector<SkeletonSequence>& seqs,
                               const std::vector<int>& labels, int class_count,
                               const DataConfig& cfg);

/// Loads one split from a dataset directory (or an explicit manifest path).
PreparedData load_split(const std::string& path, const DataConfig& cfg,
                        const std::string& split);

/// In-memory variant for synthetic datasets.
PreparedData prepare_from_synth(const SynthDataset& ds, const DataConfig& cfg,
                                const std::string& split);

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double top1 = 0.0;
  double lr = 0.0;
};

struct EvalResult {
  double top1 = 0.0;
  double top5 = 0.0;
  Tensor<double> scores;  // fused logits [N, classes]
};

struct RunReport {
  RunConfig config;
  long long param_count = 0;
  long long flop_count = 0;
  std::vector<EpochStats> epochs;
  double final_train_top1 = 0.0;
  std::optional<EvalResult> eval;
  double wall_seconds = 0.0;
};

/// Everything except wall_seconds is a pure function of config and data, so
/// two runs with the same seeds serialize identically after dropping it.
nlohmann::json report_to_json(const RunReport& report);

/// Minibatch SGD over the prepared split. Epoch shuffles derive from
/// cfg.train.shuffle_seed and the epoch index only. A non-finite loss
/// aborts with a NumericError naming the epoch and batch.
template <class S>
RunReport train_model(MsTgnModel<S>& model, const PreparedData& data,
                      const RunConfig& cfg);

/// Eval-mode fused scores over the split, batched. Layout or class-count
/// disagreement between model and data is a configuration error.
template <class S>
EvalResult evaluate_model(MsTgnModel<S>& model, const PreparedData& data,
                          int batch_size);

struct AblationRow {
  std::string name;            // "+" joined scale names
  std::vector<std::string> scales;
  long long param_count = 0;
  double final_train_top1 = 0.0;
  double test_top1 = 0.0;
};

struct AblationReport {
  std::vector<AblationRow> rows;
};

/// Trains one model per scale subset (same seeds, same data) and evaluates
/// on the test split. Default rows: each scale alone, then cumulative
/// combinations in config order.
template <class S>
AblationReport ablation_run(const RunConfig& cfg, const PreparedData& train,
                            const PreparedData& test,
                            const std::vector<std::vector<std::string>>& rows);

std::vector<std::vector<std::string>> default_ablation_rows(
    const std::vector<ScaleDefinition>& scales);

nlohmann::json ablation_to_json(const AblationReport& report);
std::string ablation_table(const AblationReport& report);

}  // namespace tgn
