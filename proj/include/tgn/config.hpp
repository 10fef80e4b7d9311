#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "tgn/model.hpp"

namespace tgn {

struct TrainConfig {
  int epochs = 50;
  double base_lr = 0.1;
  double momentum = 0.9;
  bool nesterov = true;
  double weight_decay = 1e-4;
  std::vector<int> lr_decay_epochs = {30, 40};
  int batch_size = 8;
  std::uint64_t shuffle_seed = 1;
};

struct DataConfig {
  std::string manifest;          // dataset directory or manifest file
  std::size_t pad_frames = 300;  // replay-pad target length
  bool center = true;            // anchor coordinates at the center joint
  std::string stream = "joint";  // "joint" or "bone"
};

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  DataConfig data;
};

/// Rejects any key of `obj` not in `allowed`, naming the offending key with
/// its full path. Every loader in this codebase runs its objects through
/// this, so misspelled config keys fail hard instead of silently defaulting.
void check_keys(const nlohmann::json& obj,
                const std::vector<std::string>& allowed,
                const std::string& where);

/// Joint ids in config documents are 1-based; these convert at the boundary.
nlohmann::json scale_to_json(const ScaleDefinition& s);
ScaleDefinition scale_from_json(const nlohmann::json& j);

nlohmann::json model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

nlohmann::json run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);

/// Presets: "ntu25_default", "openpose18_default", "synth_overfit".
std::vector<std::string> preset_names();
nlohmann::json preset_json(const std::string& name);

/// Loads a preset by name or a JSON file by path, applies dotted overrides
/// ("train.base_lr=0.05"), and validates the result.
RunConfig load_run_config(const std::string& name_or_path,
                          const std::vector<std::string>& overrides = {});

/// One "path.to.field=value" assignment onto a JSON document. The value is
/// parsed as JSON when possible and treated as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

}  // namespace tgn
