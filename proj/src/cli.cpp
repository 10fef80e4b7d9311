#include "tgn/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tgn/config.hpp"
#include "tgn/gradcheck.hpp"
#include "tgn/model.hpp"
#include "tgn/ops.hpp"
#include "tgn/training.hpp"

namespace tgn {
namespace {

using nlohmann::json;
using std::size_t;

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : text) {
    if (ch == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  return parts;
}

/// Restricts the scale list to the named subset, keeping the requested order.
void filter_scales(ModelConfig& cfg, const std::string& csv) {
  if (csv.empty()) return;
  std::vector<ScaleDefinition> kept;
  for (const std::string& name : split_on(csv, ',')) {
    auto it = std::find_if(
        cfg.scales.begin(), cfg.scales.end(),
        [&](const ScaleDefinition& s) { return s.name == name; });
    if (it == cfg.scales.end()) {
      std::string have;
      for (const auto& s : cfg.scales) {
        if (!have.empty()) have += ", ";
        have += s.name;
      }
      throw ConfigError("--scales: unknown scale '" + name + "' (have: " +
                        have + ")");
    }
    kept.push_back(*it);
  }
  cfg.scales = std::move(kept);
}

std::filesystem::path manifest_path_of(const std::string& data) {
  std::filesystem::path p(data);
  if (std::filesystem::is_directory(p)) p /= "manifest.json";
  return p;
}

bool split_present(const std::string& data, const std::string& split) {
  DatasetManifest m = load_manifest(manifest_path_of(data).string());
  return std::any_of(m.entries.begin(), m.entries.end(),
                     [&](const ManifestEntry& e) { return e.split == split; });
}

std::string human_count(long long n) {
  char buf[64];
  if (n >= 1000000000)
    std::snprintf(buf, sizeof(buf), "%.2fG", static_cast<double>(n) * 1e-9);
  else if (n >= 1000000)
    std::snprintf(buf, sizeof(buf), "%.2fM", static_cast<double>(n) * 1e-6);
  else
    std::snprintf(buf, sizeof(buf), "%lld", n);
  return buf;
}

struct TrainFlags {
  std::string config;
  std::vector<std::string> sets;
  std::string data;
  std::string scales;
  std::string block;
  std::string stream;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

/// Shorthand flags become overrides so that they land before resolution
/// (switching the block kind must still pick up that kind's default window).
RunConfig load_cli_config(const TrainFlags& f) {
  std::vector<std::string> overrides = f.sets;
  if (!f.block.empty()) overrides.push_back("model.block=" + f.block);
  if (!f.stream.empty()) overrides.push_back("data.stream=" + f.stream);
  if (f.seed_given)
    overrides.push_back("model.init_seed=" + std::to_string(f.seed));
  RunConfig cfg = load_run_config(f.config, overrides);
  if (!f.data.empty()) cfg.data.manifest = f.data;
  filter_scales(cfg.model, f.scales);
  return cfg;
}

void echo_config(std::ostream& err, const RunConfig& cfg) {
  err << "resolved config: " << run_config_to_json(cfg).dump() << "\n";
}

int do_synth(const SynthSpec& spec, const std::string& dir, bool as_json,
             std::ostream& out, std::ostream& err) {
  SynthDataset ds = synth_dataset(spec);
  write_dataset(ds, dir);
  const size_t total = ds.sequences.size();
  const size_t train = static_cast<size_t>(spec.classes) *
                       static_cast<size_t>(spec.per_class_train);
  err << "wrote " << total << " sequences (" << train << " train, "
      << total - train << " test) to " << dir << "\n";
  if (as_json) {
    out << json{{"dir", dir},
                {"classes", spec.classes},
                {"train", train},
                {"test", total - train},
                {"layout", spec.layout_id}}
               .dump(2)
        << "\n";
  } else {
    out << dir << ": " << total << " sequences, " << spec.classes
        << " classes\n";
  }
  return 0;
}

int do_convert(const std::string& in_path, const std::string& out_path,
               const std::string& stream, bool center, size_t pad,
               bool as_json, std::ostream& out, std::ostream& err) {
  SkeletonSequence seq = load_sequence_file(in_path);
  if (stream == "bone") {
    seq = bone_transform(seq);
  } else if (stream != "joint") {
    throw ConfigError("--stream must be 'joint' or 'bone', got '" + stream +
                      "'");
  }
  if (center) seq = center_normalize(seq);
  if (pad > 0) seq = pad_replay(seq, pad);

  std::ofstream file(out_path);
  if (!file) throw ParseError("cannot write '" + out_path + "'");
  file << serialize_sequence(seq) << "\n";
  err << "converted " << in_path << " -> " << out_path << "\n";
  if (as_json) {
    out << json{{"path", out_path},
                {"layout", seq.layout_id},
                {"frames", seq.frames()},
                {"true_frames", seq.true_frames},
                {"stream", stream}}
               .dump(2)
        << "\n";
  } else {
    out << out_path << ": " << seq.frames() << " frames ("
        << seq.true_frames << " true)\n";
  }
  return 0;
}

int do_train(const TrainFlags& flags, const std::string& model_out,
             const std::string& report_out, bool as_json, std::ostream& out,
             std::ostream& err) {
  RunConfig cfg = load_cli_config(flags);
  if (cfg.data.manifest.empty()) {
    throw ConfigError("train: no dataset; pass --data or set data.manifest");
  }
  echo_config(err, cfg);

  PreparedData train_data = load_split(cfg.data.manifest, cfg.data, "train");
  err << "train split: " << train_data.size() << " sequences\n";

  MsTgnModel<double> model(cfg.model);
  RunReport report = train_model(model, train_data, cfg);

  if (split_present(cfg.data.manifest, "test")) {
    PreparedData test_data = load_split(cfg.data.manifest, cfg.data, "test");
    report.eval = evaluate_model(model, test_data, cfg.train.batch_size);
    err << "test split: " << test_data.size() << " sequences\n";
  }

  if (!model_out.empty()) {
    save_model(model, model_out);
    err << "saved model to " << model_out << "\n";
  }
  json rj = report_to_json(report);
  if (!report_out.empty()) {
    std::ofstream file(report_out);
    if (!file) throw ParseError("cannot write '" + report_out + "'");
    file << rj.dump(2) << "\n";
    err << "saved report to " << report_out << "\n";
  }

  if (as_json) {
    out << rj.dump(2) << "\n";
  } else {
    out << "params " << report.param_count << " (" +
               human_count(report.param_count) + "), flops/seq "
        << human_count(report.flop_count) << "\n";
    for (const EpochStats& e : report.epochs) {
      out << "epoch " << e.epoch << ": loss " << e.loss << ", top1 " << e.top1
          << ", lr " << e.lr << "\n";
    }
    out << "final train top1 " << report.final_train_top1 << "\n";
    if (report.eval) {
      out << "test top1 " << report.eval->top1 << ", top5 "
          << report.eval->top5 << "\n";
    }
  }
  return 0;
}

struct EvalFlags {
  std::string model_path;
  std::string bone_model_path;
  std::string data;
  std::string stream = "joint";
  std::string weights = "1,1";
  size_t pad = 300;
  bool no_center = false;
  int batch = 8;
};

int do_eval(const EvalFlags& f, bool as_json, std::ostream& out,
            std::ostream& err) {
  MsTgnModel<double> model = load_model<double>(f.model_path);
  err << "model config: " << model_config_to_json(model.config()).dump()
      << "\n";

  DataConfig dc;
  dc.manifest = f.data;
  dc.pad_frames = f.pad;
  dc.center = !f.no_center;

  if (f.bone_model_path.empty()) {
    dc.stream = f.stream;
    PreparedData data = load_split(f.data, dc, "test");
    EvalResult r = evaluate_model(model, data, f.batch);
    if (as_json) {
      out << json{{"top1", r.top1}, {"top5", r.top5}, {"stream", dc.stream}}

                 .dump(2)
          << "\n";
    } else {
      out << "test top1 " << r.top1 << ", top5 " << r.top5 << " ("
          << data.size() << " sequences, " << dc.stream << " stream)\n";
    }
    return 0;
  }

  // Two-stream mode: the primary model reads joints, the second reads bones,
  // and per-class probabilities fuse as a weighted mean.
  MsTgnModel<double> bone_model = load_model<double>(f.bone_model_path);
  std::vector<std::string> ws = split_on(f.weights, ',');
  if (ws.size() != 2) {
    throw ConfigError("--weights expects two comma-separated numbers");
  }
  std::vector<double> weights;
  for (const std::string& w : ws) {
    try {
      weights.push_back(std::stod(w));
    } catch (const std::exception&) {
      throw ConfigError("--weights: '" + w + "' is not a number");
    }
  }

  dc.stream = "joint";
  PreparedData joint_data = load_split(f.data, dc, "test");
  dc.stream = "bone";
  PreparedData bone_data = load_split(f.data, dc, "test");

  EvalResult joint_r = evaluate_model(model, joint_data, f.batch);
  EvalResult bone_r = evaluate_model(bone_model, bone_data, f.batch);
  Tensor<double> fused = fuse_scores(
      {softmax_rows(joint_r.scores), softmax_rows(bone_r.scores)}, weights);
  const double fused_top1 = topk_accuracy(fused, joint_data.labels, 1);
  const double fused_top5 = topk_accuracy(fused, joint_data.labels, 5);

  if (as_json) {
    out << json{{"joint", {{"top1", joint_r.top1}, {"top5", joint_r.top5}}},
                {"bone", {{"top1", bone_r.top1}, {"top5", bone_r.top5}}},
                {"fused", {{"top1", fused_top1}, {"top5", fused_top5}}},
                {"weights", weights}}
               .dump(2)
        << "\n";
  } else {
    out << "joint top1 " << joint_r.top1 << "\n";
    out << "bone  top1 " << bone_r.top1 << "\n";
    out << "fused top1 " << fused_top1 << " (weights " << weights[0] << ", "
        << weights[1] << ")\n";
  }
  return 0;
}

int do_count(const TrainFlags& flags, size_t batch, size_t frames,
             bool as_json, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_cli_config(flags);
  echo_config(err, cfg);
  if (frames == 0) frames = cfg.data.pad_frames;

  CountReport params = count_params(cfg.model);
  CountReport flops = count_flops(cfg.model, batch, frames);

  if (as_json) {
    auto items = [](const CountReport& r) {
      json a = json::array();
      for (const CountItem& it : r.items)
        a.push_back({{"name", it.name}, {"count", it.count}});
      return a;
    };
    out << json{{"params", {{"items", items(params)}, {"total", params.total}}},
                {"flops",
                 {{"items", items(flops)},
                  {"total", flops.total},
                  {"batch", batch},
                  {"frames", frames}}}}
               .dump(2)
        << "\n";
    return 0;
  }

  out << "parameters:\n";
  for (const CountItem& it : params.items) {
    out << "  " << it.name << ": " << it.count << "\n";
  }
  out << "  total: " << params.total << " (" << human_count(params.total)
      << ")\n";
  out << "flops (batch " << batch << ", " << frames << " frames):\n";
  for (const CountItem& it : flops.items) {
    out << "  " << it.name << ": " << it.count << "\n";
  }
  out << "  total: " << flops.total << " (" << human_count(flops.total)
      << ")\n";
  return 0;
}

struct GradcheckItem {
  std::string name;
  double err = 0.0;
};

/// Small but representative sweep: raw ops, the normalization, and both
/// block flavors end to end, all at toy sizes.
std::vector<GradcheckItem> gradcheck_suite(std::uint64_t seed, double eps) {
  std::vector<GradcheckItem> items;
  Rng rng(seed);
  auto rand_t = [&](std::vector<size_t> shape) {
    Tensor<double> t(std::move(shape));
    for (auto& x : t.data) x = rng.uniform(-1.0, 1.0);
    return t;
  };

  {
    Tensor<double> x = rand_t({2, 3, 6, 4});
    Param<double> w("w", rand_t({4, 3, 3}));
    items.push_back(
        {"temporal_conv/input", gradcheck_input(
                                    [&](Tape<double>& t, Var xv) {
                                      Var wv = t.constant(w.value);
                                      Var y = ops::temporal_conv(
                                          t, xv, wv, std::nullopt, 2);
                                      return ops::sum_all(t, y);
                                    },
                                    x, eps)});
    items.push_back({"temporal_conv/weight",
                     gradcheck_params(
                         [&](Tape<double>& t) {
                           Var xv = t.constant(x);
                           Var y = ops::temporal_conv(t, xv, t.parameter(w),
                                                      std::nullopt, 1);
                           return ops::sum_all(t, y);
                         },
                         {&w}, eps)});
  }
  {
    Tensor<double> x = rand_t({2, 3, 4, 5});
    Param<double> a("a", rand_t({5, 5}));
    items.push_back({"graph_mix/adjacency",
                     gradcheck_params(
                         [&](Tape<double>& t) {
                           Var y = ops::graph_mix(t, t.parameter(a),
                                                  t.constant(x));
                           return ops::sum_all(t, ops::relu(t, y));
                         },
                         {&a}, eps)});
    items.push_back(
        {"graph_mix/input", gradcheck_input(
                                [&](Tape<double>& t, Var xv) {
                                  Var y = ops::graph_mix(
                                      t, t.constant(a.value), xv);
                                  return ops::sum_all(t, y);
                                },
                                x, eps)});
  }
  {
    Tensor<double> x = rand_t({3, 2, 4, 3});
    Param<double> gamma("gamma", rand_t({2}));
    Param<double> beta("beta", rand_t({2}));
    ops::BatchNormState<double> state(2);
    items.push_back({"batch_norm/train",
                     gradcheck_params(
                         [&](Tape<double>& t) {
                           ops::BatchNormState<double> scratch = state;
                           Var y = ops::batch_norm(
                               t, t.constant(x), t.parameter(gamma),
                               t.parameter(beta), scratch, Mode::train);
                           return ops::sum_all(t, y);
                         },
                         {&gamma, &beta}, eps)});
  }
  {
    Tensor<double> x = rand_t({4, 6});
    Param<double> w("w", rand_t({3, 6}));
    Param<double> b("b", rand_t({3}));
    const std::vector<int> labels = {0, 2, 1, 2};
    items.push_back({"linear+cross_entropy",
                     gradcheck_params(
                         [&](Tape<double>& t) {
                           Var s = ops::linear(t, t.constant(x),
                                               t.parameter(w),
                                               t.parameter(b));
                           return ops::cross_entropy(t, s, labels);
                         },
                         {&w, &b}, eps)});
  }

  // Both block flavors over a 4-node path graph with distance partitions.
  GraphSpec g;
  g.name = "toy";
  g.num_nodes = 4;
  g.edges = {{0, 1}, {1, 2}, {2, 3}};
  g.center = 1;
  AdjacencyStack stack = build_adjacency(g, PartitionStrategy::distance);

  LayerPlan plan;
  plan.c_in = 2;
  plan.c_out = 3;
  plan.window = 3;
  plan.stride = 2;
  plan.residual = true;

  auto forward_with = [&](auto& block, Tape<double>& t,
                          const Tensor<double>& x) {
    std::vector<Var> adj;
    for (const auto& a : stack.partitions) adj.push_back(t.constant(a));
    Var y = block.forward(t, t.constant(x), adj, Mode::train);
    return ops::sum_all(t, y);
  };

  {
    Rng block_rng(seed + 1);
    TgnBlock<double> block(plan, stack.partitions.size(), block_rng);
    Tensor<double> x = rand_t({2, 2, 6, 4});
    std::vector<Param<double>*> params;
    block.collect(params);
    items.push_back({"tgn_block/params",
                     gradcheck_params(
                         [&](Tape<double>& t) { return forward_with(block, t, x); },
                         params, eps)});
  }
  {
    Rng block_rng(seed + 2);
    BaselineBlock<double> block(plan, stack.partitions.size(), block_rng);
    Tensor<double> x = rand_t({2, 2, 6, 4});
    std::vector<Param<double>*> params;
    block.collect(params);
    items.push_back({"baseline_block/params",
                     gradcheck_params(
                         [&](Tape<double>& t) { return forward_with(block, t, x); },
                         params, eps)});
  }
  return items;
}

int do_gradcheck(std::uint64_t seed, double eps, double tolerance,
                 bool as_json, std::ostream& out, std::ostream& err) {
  err << "gradcheck: seed " << seed << ", eps " << eps << ", tolerance "
      << tolerance << "\n";
  std::vector<GradcheckItem> items = gradcheck_suite(seed, eps);
  bool pass = true;
  for (const GradcheckItem& it : items) {
    if (!(it.err < tolerance)) pass = false;
  }
  if (as_json) {
    json a = json::array();
    for (const GradcheckItem& it : items)
      a.push_back({{"name", it.name}, {"max_rel_err", it.err}});
    out << json{{"checks", std::move(a)},
                {"tolerance", tolerance},
                {"pass", pass}}
               .dump(2)
        << "\n";
  } else {
    for (const GradcheckItem& it : items) {
      out << (it.err < tolerance ? "ok   " : "FAIL ") << it.name << ": "
          << it.err << "\n";
    }
    out << (pass ? "all gradients verified\n" : "gradient check FAILED\n");
  }
  return pass ? 0 : 2;
}

int do_ablate(const TrainFlags& flags, const std::string& rows_arg,
              bool as_json, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_cli_config(flags);
  if (cfg.data.manifest.empty()) {
    throw ConfigError("ablate: no dataset; pass --data or set data.manifest");
  }
  echo_config(err, cfg);

  PreparedData train_data = load_split(cfg.data.manifest, cfg.data, "train");
  PreparedData test_data = load_split(cfg.data.manifest, cfg.data, "test");

  std::vector<std::vector<std::string>> rows;
  if (!rows_arg.empty()) {
    for (const std::string& row : split_on(rows_arg, ',')) {
      rows.push_back(split_on(row, '+'));
    }
  }
  AblationReport report = ablation_run<double>(cfg, train_data, test_data, rows);
  if (as_json) {
    out << ablation_to_json(report).dump(2) << "\n";
  } else {
    out << ablation_table(report);
  }
  return 0;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"multi-scale temporal graph networks for skeleton sequences"};
  app.require_subcommand(1);

  bool as_json = false;
  app.add_flag("--json", as_json,
               "emit one JSON document on stdout; logs go to stderr");

  // synth
  SynthSpec spec;
  spec.per_class_test = 8;
  std::string synth_out;
  CLI::App* synth = app.add_subcommand(
      "synth", "generate a deterministic synthetic dataset");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--classes", spec.classes, "number of classes");
  synth->add_option("--per-class-train", spec.per_class_train,
                    "training sequences per class");
  synth->add_option("--per-class-test", spec.per_class_test,
                    "test sequences per class");
  synth->add_option("--frames", spec.frames, "frames per sequence");
  synth->add_option("--layout", spec.layout_id, "skeleton layout id");
  synth->add_option("--seed", spec.seed, "generator seed");

  // convert
  std::string conv_in, conv_out, conv_stream = "joint";
  bool conv_center = false;
  size_t conv_pad = 0;
  CLI::App* convert = app.add_subcommand(
      "convert", "preprocess a single sequence file");
  convert->add_option("--in", conv_in, "input sequence")->required();
  convert->add_option("--out", conv_out, "output sequence")->required();
  convert->add_option("--stream", conv_stream, "'joint' or 'bone'");
  convert->add_flag("--center", conv_center,
                    "anchor coordinates at the center joint");
  convert->add_option("--pad", conv_pad, "replay-pad to this many frames");

  auto add_config_flags = [](CLI::App* sub, TrainFlags& f, bool need_config) {
    auto* opt = sub->add_option("--config", f.config,
                                "preset name or config file");
    if (need_config) opt->required();
    sub->add_option("--set", f.sets,
                    "dotted override, e.g. train.base_lr=0.05");
    sub->add_option("--data", f.data, "dataset directory or manifest");
    sub->add_option("--scales", f.scales,
                    "comma-separated scale subset, e.g. full,part");
    sub->add_option("--block", f.block, "'tgn' or 'baseline'");
    sub->add_option("--stream", f.stream, "'joint' or 'bone'");
    sub->add_option("--seed", f.seed, "model init seed")
        ->each([&f](const std::string&) { f.seed_given = true; });
  };

  // train
  TrainFlags train_flags;
  std::string train_model_out, train_report_out;
  CLI::App* train = app.add_subcommand("train", "train a model");
  add_config_flags(train, train_flags, true);
  train->add_option("--out", train_model_out, "checkpoint output path");
  train->add_option("--report", train_report_out, "report JSON output path");

  // eval
  EvalFlags eval_flags;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a trained model");
  eval->add_option("--model", eval_flags.model_path, "checkpoint")->required();
  eval->add_option("--bone-model", eval_flags.bone_model_path,
                   "second checkpoint for two-stream fusion");
  eval->add_option("--data", eval_flags.data, "dataset directory or manifest")
      ->required();
  eval->add_option("--stream", eval_flags.stream, "'joint' or 'bone'");
  eval->add_option("--weights", eval_flags.weights,
                   "fusion weights, e.g. 1,1");
  eval->add_option("--pad", eval_flags.pad, "replay-pad target frames");
  eval->add_flag("--no-center", eval_flags.no_center,
                 "skip center anchoring");
  eval->add_option("--batch", eval_flags.batch, "evaluation batch size");

  // count
  TrainFlags count_flags;
  size_t count_batch = 1, count_frames = 0;
  CLI::App* count = app.add_subcommand(
      "count", "parameter and work accounting from the config alone");
  add_config_flags(count, count_flags, true);
  count->add_option("--batch", count_batch, "batch size to charge");
  count->add_option("--frames", count_frames,
                    "sequence length (default: data.pad_frames)");

  // gradcheck
  std::uint64_t gc_seed = 1;
  double gc_eps = 1e-5, gc_tol = 1e-4;
  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck", "verify gradients against central differences");
  gradcheck->add_option("--seed", gc_seed, "suite seed");
  gradcheck->add_option("--eps", gc_eps, "finite-difference step");
  gradcheck->add_option("--tolerance", gc_tol, "max relative error allowed");

  // ablate
  TrainFlags ablate_flags;
  std::string ablate_rows;
  CLI::App* ablate = app.add_subcommand(
      "ablate", "train and evaluate over scale subsets");
  add_config_flags(ablate, ablate_flags, true);
  ablate->add_option("--rows", ablate_rows,
                     "rows as scale sets, e.g. full,part,full+part");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);

    if (*synth) return do_synth(spec, synth_out, as_json, out, err);
    if (*convert)
      return do_convert(conv_in, conv_out, conv_stream, conv_center, conv_pad,
                        as_json, out, err);
    if (*train)
      return do_train(train_flags, train_model_out, train_report_out, as_json,
                      out, err);
    if (*eval) return do_eval(eval_flags, as_json, out, err);
    if (*count)
      return do_count(count_flags, count_batch, count_frames, as_json, out,
                      err);
    if (*gradcheck)
      return do_gradcheck(gc_seed, gc_eps, gc_tol, as_json, out, err);
    if (*ablate) return do_ablate(ablate_flags, ablate_rows, as_json, out, err);
    err << "error: no subcommand\n";
    return 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace tgn
