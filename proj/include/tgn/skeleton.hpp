#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tgn/tensor.hpp"

namespace tgn {

/// A skeleton layout is data, not code: joint count, edge list, center joint,
/// parent map, and left/right joint sets. All indices are 0-based internally;
/// user-facing config files use 1-based ids.
struct SkeletonLayout {
  std::string id;
  std::size_t num_joints = 0;
  std::size_t coord_channels = 0;  // 2 or 3
  bool has_confidence = false;     // extra per-joint confidence channel
  std::size_t max_persons = 1;
  int center_joint = 0;                       // spatial-partition reference
  std::vector<std::pair<int, int>> edges;     // no self loops
  std::vector<int> parent;                    // -1 for the root
  std::vector<int> left_joints, right_joints;

  std::size_t channels() const {
    return coord_channels + (has_confidence ? 1 : 0);
  }
};

/// Shipped layouts: "ntu25" (25 joints, 3-D, 2 persons) and "openpose18"
/// (18 joints, 2-D plus confidence, 1 person). Unknown id -> ConfigError.
const SkeletonLayout& layout(const std::string& id);
std::vector<std::string> layout_ids();

/// One captured action clip: channels x frames x joints x persons, in
/// dataset units. Frames at and beyond true_frames are replay padding.
struct SkeletonSequence {
  std::string layout_id;
  int label = 0;
  std::size_t true_frames = 0;
  Tensor<double> data;  // [C, T, V, M]

  std::size_t channels() const { return data.extent(0); }
  std::size_t frames() const { return data.extent(1); }
  std::size_t joints() const { return data.extent(2); }
  std::size_t persons() const { return data.extent(3); }
};

/// Parses the canonical sequence document:
/// {"layout", "label", "true_frames", "channels", "persons",
///  "frames": [T][M][V][C]}. Malformed structure, joint/channel counts that
/// contradict the layout, or non-finite numbers raise ParseError naming the
/// offending frame/joint.
SkeletonSequence load_sequence(const std::string& json_text);
SkeletonSequence load_sequence_file(const std::string& path);
std::string serialize_sequence(const SkeletonSequence& seq);

/// Replay padding: out frame i = in frame (i mod true_frames), i < target_t.
SkeletonSequence pad_replay(const SkeletonSequence& seq, std::size_t target_t);

/// Subtracts the center joint's coordinates at frame 0 of person 0 from all
/// coordinate channels; confidence channels untouched. Idempotent.
SkeletonSequence center_normalize(const SkeletonSequence& seq);

/// Second-order stream: joint v's coordinates become coords(v) minus
/// coords(parent(v)); the root becomes zero. Uses the layout's parent map
/// unless one is supplied; a cyclic map or one without exactly one root is a
/// configuration error.
SkeletonSequence bone_transform(const SkeletonSequence& seq);
SkeletonSequence bone_transform(const SkeletonSequence& seq,
                                const std::vector<int>& parent);

struct ManifestEntry {
  std::string path;
  int label = 0;
  std::string split;  // "train" or "test"
};

struct DatasetManifest {
  std::string layout_id;
  int class_count = 0;
  std::vector<ManifestEntry> entries;
};

DatasetManifest load_manifest(const std::string& path);
void save_manifest(const DatasetManifest& m, const std::string& path);
void validate_manifest(const DatasetManifest& m);

/// Deterministic synthetic dataset: each class is a distinct base pose plus
/// class-specific limb oscillation, with small per-sequence jitter, so
/// classes are separable by construction.
struct SynthSpec {
  int classes = 2;
  int per_class_train = 32;
  int per_class_test = 0;
  std::string layout_id = "ntu25";
  std::size_t frames = 64;
  std::uint64_t seed = 1;
};

struct SynthDataset {
  DatasetManifest manifest;  // entry order matches sequences
  std::vector<SkeletonSequence> sequences;
};

SynthDataset synth_dataset(const SynthSpec& spec);

/// Writes sequences plus manifest.json under dir (created if needed).
void write_dataset(const SynthDataset& ds, const std::string& dir);

}  // namespace tgn
