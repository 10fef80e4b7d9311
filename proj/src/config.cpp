#include "tgn/config.hpp"

#include <algorithm>
#include <fstream>

#include "tgn/errors.hpp"

namespace tgn {

using nlohmann::json;

void check_keys(const json& obj, const std::vector<std::string>& allowed,
                const std::string& where) {
  if (!obj.is_object())
    throw ConfigError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("config: unknown key '" + where + "." + key + "'");
  }
}

namespace {

template <class T>
T field(const json& obj, const char* key, T fallback,
        const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: bad value for '" + where + "." + key + "'");
  }
}

int one_based(const json& j, const std::string& where) {
  int v = 0;
  try {
    v = j.get<int>();
  } catch (const json::exception&) {
    throw ConfigError("config: '" + where + "' holds a non-integer joint id");
  }
  if (v < 1)
    throw ConfigError("config: joint ids in '" + where +
                      "' are 1-based, got " + std::to_string(v));
  return v - 1;
}

}  // namespace

json scale_to_json(const ScaleDefinition& s) {
  json j;
  j["name"] = s.name;
  json nodes = json::array();
  for (int v : s.nodes) nodes.push_back(v + 1);
  j["nodes"] = std::move(nodes);
  json edges = json::array();
  for (const auto& [a, b] : s.edges) edges.push_back({a + 1, b + 1});
  j["edges"] = std::move(edges);
  j["center"] = s.center + 1;
  return j;
}

ScaleDefinition scale_from_json(const json& j) {
  const std::string name = field<std::string>(j, "name", "", "scale");
  const std::string where = "scales." + (name.empty() ? "?" : name);
  check_keys(j, {"name", "nodes", "edges", "center"}, where);
  if (name.empty())
    throw ConfigError("config: every scale needs a non-empty 'name'");
  ScaleDefinition s;
  s.name = name;
  if (!j.contains("nodes") || !j.at("nodes").is_array())
    throw ConfigError("config: '" + where + ".nodes' must be an array");
  for (const auto& v : j.at("nodes"))
    s.nodes.push_back(one_based(v, where + ".nodes"));
  if (j.contains("edges")) {
    if (!j.at("edges").is_array())
      throw ConfigError("config: '" + where + ".edges' must be an array");
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2)
        throw ConfigError("config: '" + where +
                          ".edges' entries must be [a, b] pairs");
      s.edges.emplace_back(one_based(e[0], where + ".edges"),
                           one_based(e[1], where + ".edges"));
    }
  }
  if (!j.contains("center"))
    throw ConfigError("config: '" + where + "' needs a 'center' joint");
  s.center = one_based(j.at("center"), where + ".center");
  return s;
}

namespace {

json layer_to_json(const LayerPlan& p) {
  return {{"c_in", p.c_in},
          {"c_out", p.c_out},
          {"window", p.window},
          {"stride", p.stride},
          {"residual", p.residual}};
}

LayerPlan layer_from_json(const json& j, std::size_t index) {
  const std::string where = "layers[" + std::to_string(index) + "]";
  check_keys(j, {"c_in", "c_out", "window", "stride", "residual"}, where);
  if (!j.contains("c_in") || !j.contains("c_out"))
    throw ConfigError("config: '" + where + "' needs c_in and c_out");
  LayerPlan p;
  p.c_in = field<std::size_t>(j, "c_in", 0, where);
  p.c_out = field<std::size_t>(j, "c_out", 0, where);
  p.window = field<std::size_t>(j, "window", 3, where);
  p.stride = field<std::size_t>(j, "stride", 1, where);
  p.residual = field<bool>(j, "residual", true, where);
  return p;
}

}  // namespace

json model_config_to_json(const ModelConfig& cfg) {
  json j;
  j["layout"] = cfg.layout_id;
  j["classes"] = cfg.class_count;
  j["strategy"] = to_string(cfg.strategy);
  j["block"] = to_string(cfg.block);
  j["share_across_scales"] = cfg.share_across_scales;
  j["edge_masks"] = cfg.edge_masks;
  j["temporal_window"] = cfg.temporal_window;
  j["init_seed"] = cfg.init_seed;
  if (!cfg.scales.empty()) {
    json scales = json::array();
    for (const auto& s : cfg.scales) scales.push_back(scale_to_json(s));
    j["scales"] = std::move(scales);
  }
  if (!cfg.layers.empty()) {
    json layers = json::array();
    for (const auto& p : cfg.layers) layers.push_back(layer_to_json(p));
    j["layers"] = std::move(layers);
  }
  return j;
}

ModelConfig model_config_from_json(const json& j) {
  check_keys(j,
             {"layout", "classes", "strategy", "block", "share_across_scales",
              "edge_masks", "temporal_window", "scales", "layers",
              "init_seed"},
             "model");
  ModelConfig cfg;
  cfg.layout_id = field<std::string>(j, "layout", cfg.layout_id, "model");
  cfg.class_count = field<int>(j, "classes", cfg.class_count, "model");
  cfg.strategy = partition_strategy_from(
      field<std::string>(j, "strategy", to_string(cfg.strategy), "model"));
  cfg.block = block_kind_from(
      field<std::string>(j, "block", to_string(cfg.block), "model"));
  cfg.share_across_scales =
      field<bool>(j, "share_across_scales", cfg.share_across_scales, "model");
  cfg.edge_masks = field<bool>(j, "edge_masks", cfg.edge_masks, "model");
  cfg.temporal_window =
      field<std::size_t>(j, "temporal_window", cfg.temporal_window, "model");
  cfg.init_seed =
      field<std::uint64_t>(j, "init_seed", cfg.init_seed, "model");
  if (j.contains("scales")) {
    if (!j.at("scales").is_array())
      throw ConfigError("config: 'model.scales' must be an array");
    for (const auto& s : j.at("scales"))
      cfg.scales.push_back(scale_from_json(s));
  }
  if (j.contains("layers")) {
    if (!j.at("layers").is_array())
      throw ConfigError("config: 'model.layers' must be an array");
    for (std::size_t i = 0; i < j.at("layers").size(); ++i)
      cfg.layers.push_back(layer_from_json(j.at("layers")[i], i));
  }
  return cfg;
}

json run_config_to_json(const RunConfig& cfg) {
  json j;
  j["model"] = model_config_to_json(cfg.model);
  j["train"] = {{"epochs", cfg.train.epochs},
                {"base_lr", cfg.train.base_lr},
                {"momentum", cfg.train.momentum},
                {"nesterov", cfg.train.nesterov},
                {"weight_decay", cfg.train.weight_decay},
                {"lr_decay_epochs", cfg.train.lr_decay_epochs},
                {"batch_size", cfg.train.batch_size},
                {"shuffle_seed", cfg.train.shuffle_seed}};
  j["data"] = {{"manifest", cfg.data.manifest},
               {"pad_frames", cfg.data.pad_frames},
               {"center", cfg.data.center},
               {"stream", cfg.data.stream}};
  return j;
}

RunConfig run_config_from_json(const json& j) {
  check_keys(j, {"model", "train", "data"}, "config");
  RunConfig rc;
  if (j.contains("model")) rc.model = model_config_from_json(j.at("model"));
  if (j.contains("train")) {
    const json& t = j.at("train");
    check_keys(t,
               {"epochs", "base_lr", "momentum", "nesterov", "weight_decay",
                "lr_decay_epochs", "batch_size", "shuffle_seed"},
               "train");
    rc.train.epochs = field<int>(t, "epochs", rc.train.epochs, "train");
    rc.train.base_lr =
        field<double>(t, "base_lr", rc.train.base_lr, "train");
    rc.train.momentum =
        field<double>(t, "momentum", rc.train.momentum, "train");
    rc.train.nesterov = field<bool>(t, "nesterov", rc.train.nesterov, "train");
    rc.train.weight_decay =
        field<double>(t, "weight_decay", rc.train.weight_decay, "train");
    rc.train.lr_decay_epochs = field<std::vector<int>>(
        t, "lr_decay_epochs", rc.train.lr_decay_epochs, "train");
    rc.train.batch_size =
        field<int>(t, "batch_size", rc.train.batch_size, "train");
    rc.train.shuffle_seed = field<std::uint64_t>(
        t, "shuffle_seed", rc.train.shuffle_seed, "train");
  }
  if (j.contains("data")) {
    const json& d = j.at("data");
    check_keys(d, {"manifest", "pad_frames", "center", "stream"}, "data");
    rc.data.manifest =
        field<std::string>(d, "manifest", rc.data.manifest, "data");
    rc.data.pad_frames =
        field<std::size_t>(d, "pad_frames", rc.data.pad_frames, "data");
    rc.data.center = field<bool>(d, "center", rc.data.center, "data");
    rc.data.stream = field<std::string>(d, "stream", rc.data.stream, "data");
  }

  if (rc.train.epochs < 1) throw ConfigError("config: train.epochs must be >= 1");
  if (rc.train.base_lr <= 0) throw ConfigError("config: train.base_lr must be > 0");
  if (rc.train.momentum < 0 || rc.train.momentum >= 1)
    throw ConfigError("config: train.momentum must lie in [0, 1)");
  if (rc.train.weight_decay < 0)
    throw ConfigError("config: train.weight_decay must be >= 0");
  if (rc.train.batch_size < 1)
    throw ConfigError("config: train.batch_size must be >= 1");
  for (int e : rc.train.lr_decay_epochs)
    if (e < 0) throw ConfigError("config: train.lr_decay_epochs must be >= 0");
  if (rc.data.pad_frames < 1)
    throw ConfigError("config: data.pad_frames must be >= 1");
  if (rc.data.stream != "joint" && rc.data.stream != "bone")
    throw ConfigError("config: data.stream must be 'joint' or 'bone', got '" +
                      rc.data.stream + "'");
  rc.model = resolve(rc.model);
  return rc;
}

std::vector<std::string> preset_names() {
  return {"ntu25_default", "openpose18_default", "synth_overfit"};
}

json preset_json(const std::string& name) {
  if (name == "ntu25_default") {
    return {{"model", {{"layout", "ntu25"}, {"classes", 60}}},
            {"train", json::object()},
            {"data", {{"pad_frames", 300}}}};
  }
  if (name == "openpose18_default") {
    return {{"model", {{"layout", "openpose18"}, {"classes", 400}}},
            {"train", json::object()},
            {"data", {{"pad_frames", 300}}}};
  }
  if (name == "synth_overfit") {
    // Small stack sized for the deterministic overfit check: two stages,
    // 2 classes, 64-frame clips.
    json layers = json::array();
    layers.push_back({{"c_in", 3}, {"c_out", 8}, {"window", 3}, {"stride", 1},
                      {"residual", false}});
    layers.push_back({{"c_in", 8}, {"c_out", 16}, {"window", 3},
                      {"stride", 2}, {"residual", true}});
    return {{"model",
             {{"layout", "ntu25"},
              {"classes", 2},
              {"layers", layers},
              {"init_seed", 7}}},
            {"train",
             {{"epochs", 80},
              {"base_lr", 0.1},
              {"momentum", 0.9},
              {"nesterov", true},
              {"weight_decay", 0.0},
              {"lr_decay_epochs", {50, 70}},
              {"batch_size", 8},
              {"shuffle_seed", 3}}},
            {"data",
             {{"pad_frames", 64}, {"center", true}, {"stream", "joint"}}}};
  }
  throw ConfigError("unknown preset '" + name + "'");
}

RunConfig load_run_config(const std::string& name_or_path,
                          const std::vector<std::string>& overrides) {
  json doc;
  const auto presets = preset_names();
  if (std::find(presets.begin(), presets.end(), name_or_path) !=
      presets.end()) {
    doc = preset_json(name_or_path);
  } else {
    std::ifstream in(name_or_path);
    if (!in)
      throw ConfigError("config: '" + name_or_path +
                        "' is neither a preset nor a readable file");
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw ParseError("config '" + name_or_path +
                       "': invalid JSON: " + std::string(e.what()));
    }
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return run_config_from_json(doc);
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "': expected path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  json* node = &doc;
  std::size_t start = 0;
  std::vector<std::string> keys;
  while (true) {
    const auto dot = path.find('.', start);
    keys.push_back(path.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    if (keys[i].empty())
      throw ConfigError("override '" + assignment + "': empty path segment");
    if (!node->contains(keys[i])) (*node)[keys[i]] = json::object();
    node = &(*node)[keys[i]];
    if (!node->is_object())
      throw ConfigError("override '" + assignment + "': '" + keys[i] +
                        "' is not an object");
  }
  if (keys.back().empty())
    throw ConfigError("override '" + assignment + "': empty path segment");
  json parsed = json::parse(value, nullptr, false);
  (*node)[keys.back()] = parsed.is_discarded() ? json(value) : parsed;
}

}  // namespace tgn
