#include "tgn/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "tgn/ops.hpp"
#include "tgn/rng.hpp"

namespace tgn {

using nlohmann::json;
using std::size_t;

template <class S>
SgdOptimizer<S>::SgdOptimizer(std::vector<Param<S>*> params, double momentum,
                              bool nesterov, double weight_decay)
    : params_(std::move(params)),
      momentum_(momentum),
      nesterov_(nesterov),
      weight_decay_(weight_decay) {
  if (momentum_ < 0.0 || momentum_ >= 1.0) {
    throw ConfigError("optimizer: momentum must lie in [0, 1), got " +
                      std::to_string(momentum_));
  }
  if (weight_decay_ < 0.0) {
    throw ConfigError("optimizer: weight decay must be >= 0");
  }
  velocity_.reserve(params_.size());
  for (Param<S>* p : params_) velocity_.emplace_back(p->value.shape);
}

template <class S>
void SgdOptimizer<S>::zero_grad() {
  for (Param<S>* p : params_) p->zero_grad();
}

template <class S>
void SgdOptimizer<S>::step(double lr) {
  const S mu = static_cast<S>(momentum_);
  const S wd = static_cast<S>(weight_decay_);
  const S rate = static_cast<S>(lr);
  for (size_t i = 0; i < params_.size(); ++i) {
    Param<S>& p = *params_[i];
    Tensor<S>& v = velocity_[i];
    if (!p.grad.same_shape(p.value) || !v.same_shape(p.value)) {
      throw ContractError("optimizer: gradient/velocity shape drifted for " +
                          p.id + " (value " + p.value.shape_string() +
                          ", grad " + p.grad.shape_string() + ", velocity " +
                          v.shape_string() + ")");
    }
    for (size_t k = 0; k < p.value.numel(); ++k) {
      S g = p.grad[k] + wd * p.value[k];
      v[k] = mu * v[k] + g;
      p.value[k] -= rate * (nesterov_ ? g + mu * v[k] : v[k]);
    }
  }
}

double lr_at(double base_lr, const std::vector<int>& decay_epochs, int epoch) {
  int decays = 0;
  for (int e : decay_epochs) {
    if (e <= epoch) ++decays;
  }
  return base_lr * std::pow(0.1, decays);
}

double topk_accuracy(const Tensor<double>& scores,
                     const std::vector<int>& labels, int k) {
  if (scores.rank() != 2) {
    throw DimensionError("topk_accuracy: scores must be [N, classes], got " +
                         scores.shape_string());
  }
  const size_t n = scores.extent(0);
  const size_t classes = scores.extent(1);
  if (labels.size() != n) {
    throw DimensionError("topk_accuracy: " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(n) + " rows");
  }
  if (k < 1) throw ContractError("topk_accuracy: k must be >= 1");
  if (n == 0) throw ContractError("topk_accuracy: no rows");

  size_t hits = 0;
  for (size_t i = 0; i < n; ++i) {
    int label = labels[i];
    if (label < 0 || static_cast<size_t>(label) >= classes) {
      throw ContractError("topk_accuracy: label " + std::to_string(label) +
                          " outside [0, " + std::to_string(classes) + ")");
    }
    const double* row = scores.ptr() + i * classes;
    const double s = row[static_cast<size_t>(label)];
    // Ties break toward the lower class index: an equal-scored class with a
    // smaller index outranks the label.
    size_t rank = 0;
    for (size_t j = 0; j < classes; ++j) {
      if (row[j] > s || (row[j] == s && j < static_cast<size_t>(label))) ++rank;
    }
    if (rank < static_cast<size_t>(k)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

Tensor<double> softmax_rows(const Tensor<double>& scores) {
  if (scores.rank() != 2) {
    throw DimensionError("softmax_rows: expected [N, K], got " +
                         scores.shape_string());
  }
  const size_t n = scores.extent(0), k = scores.extent(1);
  Tensor<double> out(scores.shape);
  for (size_t i = 0; i < n; ++i) {
    const double* row = scores.ptr() + i * k;
    double* o = out.ptr() + i * k;
    double hi = row[0];
    for (size_t j = 1; j < k; ++j) hi = std::max(hi, row[j]);
    double total = 0.0;
    for (size_t j = 0; j < k; ++j) {
      o[j] = std::exp(row[j] - hi);
      total += o[j];
    }
    for (size_t j = 0; j < k; ++j) o[j] /= total;
  }
  return out;
}

Tensor<double> fuse_scores(const std::vector<Tensor<double>>& streams,
                           const std::vector<double>& weights) {
  if (streams.empty()) throw ContractError("fuse_scores: no streams");
  if (weights.size() != streams.size()) {
    throw DimensionError("fuse_scores: " + std::to_string(weights.size()) +
                         " weights for " + std::to_string(streams.size()) +
                         " streams");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ContractError("fuse_scores: weights must be >= 0");
    total += w;
  }
  if (total <= 0.0) throw ContractError("fuse_scores: weights sum to zero");

  Tensor<double> out(streams[0].shape);
  for (size_t s = 0; s < streams.size(); ++s) {
    if (!streams[s].same_shape(out)) {
      throw DimensionError("fuse_scores: stream " + std::to_string(s) +
                           " shape " + streams[s].shape_string() +
                           " != " + out.shape_string());
    }
    const double w = weights[s] / total;
    for (size_t i = 0; i < out.numel(); ++i) out[i] += w * streams[s][i];
  }
  return out;
}

PreparedData prepare_sequences(const std::vector<SkeletonSequence>& seqs,
                               const std::vector<int>& labels, int class_count,
                               const DataConfig& cfg) {
  if (seqs.empty()) throw ConfigError("prepare: no sequences");
  if (labels.size() != seqs.size()) {
    throw DimensionError("prepare: " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(seqs.size()) +
                         " sequences");
  }
  if (cfg.stream != "joint" && cfg.stream != "bone") {
    throw ConfigError("prepare: stream must be 'joint' or 'bone', got '" +
                      cfg.stream + "'");
  }
  if (class_count < 2) throw ConfigError("prepare: class_count must be >= 2");

  const std::string& layout_id = seqs[0].layout_id;
  const SkeletonLayout& lay = layout(layout_id);
  const size_t n = seqs.size();
  const size_t c = lay.channels(), t = cfg.pad_frames;
  const size_t v = lay.num_joints, m = lay.max_persons;

  PreparedData out;
  out.x = Tensor<double>({n, c, t, v, m});
  out.labels = labels;
  out.layout_id = layout_id;
  out.class_count = class_count;

  const size_t stride = c * t * v * m;
  for (size_t i = 0; i < n; ++i) {
    if (seqs[i].layout_id != layout_id) {
      throw ConfigError("prepare: sequence " + std::to_string(i) +
                        " uses layout '" + seqs[i].layout_id +
                        "' in a '" + layout_id + "' split");
    }
    if (labels[i] < 0 || labels[i] >= class_count) {
      throw ConfigError("prepare: label " + std::to_string(labels[i]) +
                        " outside [0, " + std::to_string(class_count) + ")");
    }
    SkeletonSequence s = seqs[i];
    if (cfg.stream == "bone") s = bone_transform(s);
    if (cfg.center) s = center_normalize(s);
    s = pad_replay(s, t);
    std::copy(s.data.data.begin(), s.data.data.end(),
              out.x.data.begin() + static_cast<std::ptrdiff_t>(i * stride));
  }
  return out;
}

namespace {

PreparedData prepare_split(const DatasetManifest& manifest,
                           const std::vector<SkeletonSequence>& sequences,
                           const DataConfig& cfg, const std::string& split) {
  if (split != "train" && split != "test") {
    throw ContractError("split must be 'train' or 'test', got '" + split +
                        "'");
  }
  std::vector<SkeletonSequence> seqs;
  std::vector<int> labels;
  for (size_t i = 0; i < manifest.entries.size(); ++i) {
    const ManifestEntry& e = manifest.entries[i];
    if (e.split != split) continue;
    const SkeletonSequence& s = sequences[i];
    if (s.label != e.label) {
      throw ParseError("dataset: '" + e.path + "' carries label " +
                       std::to_string(s.label) + " but the manifest says " +
                       std::to_string(e.label));
    }
    if (s.layout_id != manifest.layout_id) {
      throw ParseError("dataset: '" + e.path + "' uses layout '" +
                       s.layout_id + "', manifest says '" +
                       manifest.layout_id + "'");
    }
    seqs.push_back(s);
    labels.push_back(e.label);
  }
  if (seqs.empty()) throw ConfigError("dataset: split '" + split + "' is empty");
  return prepare_sequences(seqs, labels, manifest.class_count, cfg);
}

}  // namespace

PreparedData load_split(const std::string& path, const DataConfig& cfg,
                        const std::string& split) {
  namespace fs = std::filesystem;
  fs::path manifest_path(path);
  if (fs::is_directory(manifest_path)) manifest_path /= "manifest.json";
  DatasetManifest manifest = load_manifest(manifest_path.string());
  const fs::path base = manifest_path.parent_path();

  std::vector<SkeletonSequence> sequences;
  sequences.reserve(manifest.entries.size());
  for (const ManifestEntry& e : manifest.entries) {
    sequences.push_back(load_sequence_file((base / e.path).string()));
  }
  return prepare_split(manifest, sequences, cfg, split);
}

PreparedData prepare_from_synth(const SynthDataset& ds, const DataConfig& cfg,
                                const std::string& split) {
  return prepare_split(ds.manifest, ds.sequences, cfg, split);
}

json report_to_json(const RunReport& report) {
  json epochs = json::array();
  for (const EpochStats& e : report.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"loss", e.loss},
                      {"top1", e.top1},
                      {"lr", e.lr}});
  }
  json j = {{"config", run_config_to_json(report.config)},
            {"param_count", report.param_count},
            {"flop_count", report.flop_count},
            {"epochs", std::move(epochs)},
            {"final_train_top1", report.final_train_top1},
            {"wall_seconds", report.wall_seconds}};
  if (report.eval) {
    j["eval"] = {{"top1", report.eval->top1}, {"top5", report.eval->top5}};
  }
  return j;
}

namespace {

template <class S>
void check_model_data(const MsTgnModel<S>& model, const PreparedData& data,
                      const char* who) {
  const ModelConfig& cfg = model.config();
  if (cfg.layout_id != data.layout_id) {
    throw ConfigError(std::string(who) + ": model layout '" + cfg.layout_id +
                      "' does not match data layout '" + data.layout_id + "'");
  }
  if (cfg.class_count != data.class_count) {
    throw ConfigError(std::string(who) + ": model expects " +
                      std::to_string(cfg.class_count) + " classes, data has " +
                      std::to_string(data.class_count));
  }
}

/// Rows `order[start, start+count)` of data.x, cast to the compute type.
template <class S>
Tensor<S> gather_batch(const PreparedData& data,
                       const std::vector<size_t>& order, size_t start,
                       size_t count) {
  const auto& sh = data.x.shape;
  const size_t stride = sh[1] * sh[2] * sh[3] * sh[4];
  Tensor<S> out({count, sh[1], sh[2], sh[3], sh[4]});
  for (size_t b = 0; b < count; ++b) {
    const double* src = data.x.ptr() + order[start + b] * stride;
    S* dst = out.ptr() + b * stride;
    for (size_t k = 0; k < stride; ++k) dst[k] = static_cast<S>(src[k]);
  }
  return out;
}

}  // namespace

template <class S>
RunReport train_model(MsTgnModel<S>& model, const PreparedData& data,
                      const RunConfig& cfg) {
  check_model_data(model, data, "train");
  const TrainConfig& tc = cfg.train;
  if (tc.epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (tc.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");

  const size_t n = data.size();
  const size_t batch = static_cast<size_t>(tc.batch_size);
  SgdOptimizer<S> opt(model.parameters(), tc.momentum, tc.nesterov,
                      tc.weight_decay);

  RunReport report;
  report.config = cfg;
  report.config.model = model.config();
  report.param_count = count_params(model.config()).total;
  report.flop_count =
      count_flops(model.config(), 1, data.x.extent(2)).total;

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<size_t> order(n);
  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    const double lr = lr_at(tc.base_lr, tc.lr_decay_epochs, epoch);
    std::iota(order.begin(), order.end(), size_t{0});
    Rng shuffler(Rng::mix(tc.shuffle_seed, static_cast<std::uint64_t>(epoch)));
    shuffler.shuffle(order);

    double loss_sum = 0.0;
    size_t hits = 0;
    for (size_t start = 0, bi = 0; start < n; start += batch, ++bi) {
      const size_t count = std::min(batch, n - start);
      std::vector<int> labels_b(count);
      for (size_t b = 0; b < count; ++b)
        labels_b[b] = data.labels[order[start + b]];

      Tape<S> tape;
      double loss_val = 0.0;
      Tensor<double> scores_val;
      try {
        Var x = tape.constant(gather_batch<S>(data, order, start, count));
        Var scores = model.forward(tape, x, Mode::train);
        Var loss = ops::cross_entropy(tape, scores, labels_b);
        loss_val = static_cast<double>(tape.value(loss)[0]);
        scores_val = tensor_cast<S, double>(tape.value(scores));
        opt.zero_grad();
        tape.backward(loss);
        opt.step(lr);
      } catch (const NumericError& e) {
        throw NumericError("training aborted at epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(bi) + ": " + e.what());
      }
      if (!std::isfinite(loss_val)) {
        throw NumericError("training aborted at epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(bi) + ": loss is not finite");
      }
      loss_sum += loss_val * static_cast<double>(count);
      hits += static_cast<size_t>(
          topk_accuracy(scores_val, labels_b, 1) *
              static_cast<double>(count) +
          0.5);
    }

    EpochStats es;
    es.epoch = epoch;
    es.loss = loss_sum / static_cast<double>(n);
    es.top1 = static_cast<double>(hits) / static_cast<double>(n);
    es.lr = lr;
    report.epochs.push_back(es);
  }
  report.final_train_top1 = report.epochs.back().top1;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

template <class S>
EvalResult evaluate_model(MsTgnModel<S>& model, const PreparedData& data,
                          int batch_size) {
  check_model_data(model, data, "evaluate");
  if (batch_size < 1) throw ContractError("evaluate: batch_size must be >= 1");

  const size_t n = data.size();
  const size_t classes = static_cast<size_t>(model.config().class_count);
  const size_t batch = static_cast<size_t>(batch_size);
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});

  EvalResult result;
  result.scores = Tensor<double>({n, classes});
  for (size_t start = 0; start < n; start += batch) {
    const size_t count = std::min(batch, n - start);
    Tape<S> tape;
    Var x = tape.constant(gather_batch<S>(data, order, start, count));
    Var scores = model.forward(tape, x, Mode::eval);
    const Tensor<S>& sv = tape.value(scores);
    for (size_t b = 0; b < count; ++b) {
      for (size_t j = 0; j < classes; ++j) {
        result.scores[(start + b) * classes + j] =
            static_cast<double>(sv[b * classes + j]);
      }
    }
  }
  result.top1 = topk_accuracy(result.scores, data.labels, 1);
  result.top5 = topk_accuracy(result.scores, data.labels, 5);
  return result;
}

std::vector<std::vector<std::string>> default_ablation_rows(
    const std::vector<ScaleDefinition>& scales) {
  std::vector<std::vector<std::string>> rows;
  for (const ScaleDefinition& s : scales) rows.push_back({s.name});
  for (size_t len = 2; len <= scales.size(); ++len) {
    std::vector<std::string> row;
    for (size_t i = 0; i < len; ++i) row.push_back(scales[i].name);
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class S>
AblationReport ablation_run(const RunConfig& cfg, const PreparedData& train,
                            const PreparedData& test,
                            const std::vector<std::vector<std::string>>& rows) {
  const std::vector<std::vector<std::string>>& plan =
      rows.empty() ? default_ablation_rows(cfg.model.scales) : rows;

  AblationReport report;
  for (const std::vector<std::string>& names : plan) {
    RunConfig row_cfg = cfg;
    row_cfg.model.scales.clear();
    for (const std::string& name : names) {
      auto it = std::find_if(
          cfg.model.scales.begin(), cfg.model.scales.end(),
          [&](const ScaleDefinition& s) { return s.name == name; });
      if (it == cfg.model.scales.end()) {
        throw ConfigError("ablation: unknown scale '" + name + "'");
      }
      row_cfg.model.scales.push_back(*it);
    }

    MsTgnModel<S> model(row_cfg.model);
    RunReport run = train_model(model, train, row_cfg);
    EvalResult eval = evaluate_model(model, test, cfg.train.batch_size);

    AblationRow row;
    row.scales = names;
    for (size_t i = 0; i < names.size(); ++i) {
      if (i) row.name += '+';
      row.name += names[i];
    }
    row.param_count = count_params(model.config()).total;
    row.final_train_top1 = run.final_train_top1;
    row.test_top1 = eval.top1;
    report.rows.push_back(std::move(row));
  }
  return report;
}

json ablation_to_json(const AblationReport& report) {
  json rows = json::array();
  for (const AblationRow& r : report.rows) {
    rows.push_back({{"name", r.name},
                    {"scales", r.scales},
                    {"param_count", r.param_count},
                    {"train_top1", r.final_train_top1},
                    {"test_top1", r.test_top1}});
  }
  return json{{"rows", std::move(rows)}};
}

std::string ablation_table(const AblationReport& report) {
  size_t width = 6;
  for (const AblationRow& r : report.rows)
    width = std::max(width, r.name.size());

  std::ostringstream os;
  char line[128];
  std::snprintf(line, sizeof(line), "%-*s  %12s  %10s  %10s\n",
                static_cast<int>(width), "scales", "params", "train@1",
                "test@1");
  os << line;
  for (const AblationRow& r : report.rows) {
    std::snprintf(line, sizeof(line), "%-*s  %12lld  %10.4f  %10.4f\n",
                  static_cast<int>(width), r.name.c_str(), r.param_count,
                  r.final_train_top1, r.test_top1);
    os << line;
  }
  return os.str();
}

template class SgdOptimizer<float>;
template class SgdOptimizer<double>;

template RunReport train_model<float>(MsTgnModel<float>&, const PreparedData&,
                                      const RunConfig&);
template RunReport train_model<double>(MsTgnModel<double>&,
                                       const PreparedData&, const RunConfig&);
template EvalResult evaluate_model<float>(MsTgnModel<float>&,
                                          const PreparedData&, int);
template EvalResult evaluate_model<double>(MsTgnModel<double>&,
                                           const PreparedData&, int);
template AblationReport ablation_run<float>(
    const RunConfig&, const PreparedData&, const PreparedData&,
    const std::vector<std::vector<std::string>>&);
template AblationReport ablation_run<double>(
    const RunConfig&, const PreparedData&, const PreparedData&,
    const std::vector<std::vector<std::string>>&);

}  // namespace tgn
