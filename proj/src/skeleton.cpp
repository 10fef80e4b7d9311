#include "tgn/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tgn/errors.hpp"
#include "tgn/rng.hpp"

namespace tgn {

using nlohmann::json;

namespace {

SkeletonLayout make_ntu25() {
  SkeletonLayout l;
  l.id = "ntu25";
  l.num_joints = 25;
  l.coord_channels = 3;
  l.has_confidence = false;
  l.max_persons = 2;
  l.center_joint = 20;  // spine shoulder
  l.edges = {{0, 1},   {1, 20},  {2, 20},  {3, 2},   {4, 20},  {5, 4},
             {6, 5},   {7, 6},   {8, 20},  {9, 8},   {10, 9},  {11, 10},
             {12, 0},  {13, 12}, {14, 13}, {15, 14}, {16, 0},  {17, 16},
             {18, 17}, {19, 18}, {21, 22}, {22, 7},  {23, 24}, {24, 11}};
  l.parent.assign(25, -1);
  const int p[25] = {1,  20, 20, 2,  20, 4,  5,  6, 20, 8,  9,  10, 0,
                     12, 13, 14, 0,  16, 17, 18, -1, 22, 7,  24, 11};
  for (int v = 0; v < 25; ++v) l.parent[v] = p[v];
  l.left_joints = {4, 5, 6, 7, 21, 22, 12, 13, 14, 15};
  l.right_joints = {8, 9, 10, 11, 23, 24, 16, 17, 18, 19};
  return l;
}

SkeletonLayout make_openpose18() {
  SkeletonLayout l;
  l.id = "openpose18";
  l.num_joints = 18;
  l.coord_channels = 2;
  l.has_confidence = true;
  l.max_persons = 1;
  l.center_joint = 1;  // neck
  l.edges = {{4, 3},  {3, 2},   {7, 6},   {6, 5},   {13, 12}, {12, 11},
             {10, 9}, {9, 8},   {11, 5},  {8, 2},   {5, 1},   {2, 1},
             {0, 1},  {15, 0},  {14, 0},  {17, 15}, {16, 14}};
  l.parent.assign(18, -1);
  const int p[18] = {1, -1, 1, 2, 3, 1, 5, 6, 2, 8, 9, 5, 11, 12, 0, 0, 14, 15};
  for (int v = 0; v < 18; ++v) l.parent[v] = p[v];
  l.left_joints = {5, 6, 7, 11, 12, 13, 15, 17};
  l.right_joints = {2, 3, 4, 8, 9, 10, 14, 16};
  return l;
}

const std::map<std::string, SkeletonLayout>& layout_table() {
  static const std::map<std::string, SkeletonLayout> table = {
      {"ntu25", make_ntu25()}, {"openpose18", make_openpose18()}};
  return table;
}

[[noreturn]] void parse_fail(const std::string& what) {
  throw ParseError("sequence: " + what);
}

double number_at(const json& j, std::size_t f, std::size_t m, std::size_t v,
                 std::size_t c) {
  std::ostringstream where;
  where << "frame " << f << " person " << m << " joint " << v << " channel "
        << c;
  if (!j.is_number()) parse_fail(where.str() + ": not a number");
  const double val = j.get<double>();
  if (!std::isfinite(val)) parse_fail(where.str() + ": non-finite value");
  return val;
}

}  // namespace

const SkeletonLayout& layout(const std::string& id) {
  const auto& table = layout_table();
  auto it = table.find(id);
  if (it == table.end()) throw ConfigError("unknown layout '" + id + "'");
  return it->second;
}

std::vector<std::string> layout_ids() {
  std::vector<std::string> ids;
  for (const auto& [id, lay] : layout_table()) ids.push_back(id);
  return ids;
}

SkeletonSequence load_sequence(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    parse_fail(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) parse_fail("document is not an object");
  for (const char* key : {"layout", "label", "true_frames", "channels",
                          "persons", "frames"}) {
    if (!doc.contains(key)) parse_fail(std::string("missing field '") + key + "'");
  }
  if (!doc["layout"].is_string()) parse_fail("'layout' must be a string");
  const std::string layout_id = doc["layout"].get<std::string>();
  if (layout_table().find(layout_id) == layout_table().end())
    parse_fail("unknown layout '" + layout_id + "'");
  const SkeletonLayout& lay = layout(layout_id);

  if (!doc["label"].is_number_integer()) parse_fail("'label' must be an integer");
  const int label = doc["label"].get<int>();
  if (label < 0) parse_fail("'label' must be non-negative");

  for (const char* key : {"true_frames", "channels", "persons"}) {
    if (!doc[key].is_number_integer() || doc[key].get<long long>() < 0)
      parse_fail(std::string("'") + key + "' must be a non-negative integer");
  }
  const auto true_frames = doc["true_frames"].get<std::size_t>();
  const auto channels = doc["channels"].get<std::size_t>();
  const auto persons = doc["persons"].get<std::size_t>();

  if (channels != lay.channels()) {
    std::ostringstream msg;
    msg << "channel count " << channels << " != " << lay.channels()
        << " for layout " << layout_id;
    parse_fail(msg.str());
  }
  if (persons < 1 || persons > lay.max_persons) {
    std::ostringstream msg;
    msg << "person count " << persons << " outside 1.." << lay.max_persons
        << " for layout " << layout_id;
    parse_fail(msg.str());
  }

  const json& frames = doc["frames"];
  if (!frames.is_array()) parse_fail("'frames' must be an array");
  const std::size_t t_total = frames.size();
  if (t_total == 0) parse_fail("'frames' is empty");
  if (true_frames < 1 || true_frames > t_total) {
    std::ostringstream msg;
    msg << "true_frames " << true_frames << " outside 1.." << t_total;
    parse_fail(msg.str());
  }

  SkeletonSequence seq;
  seq.layout_id = layout_id;
  seq.label = label;
  seq.true_frames = true_frames;
  seq.data = Tensor<double>({channels, t_total, lay.num_joints, lay.max_persons});

  const std::size_t v_n = lay.num_joints;
  for (std::size_t f = 0; f < t_total; ++f) {
    const json& frame = frames[f];
    if (!frame.is_array() || frame.size() != persons) {
      std::ostringstream msg;
      msg << "frame " << f << ": person count "
          << (frame.is_array() ? frame.size() : 0) << " != " << persons;
      parse_fail(msg.str());
    }
    for (std::size_t m = 0; m < persons; ++m) {
      const json& person = frame[m];
      if (!person.is_array() || person.size() != v_n) {
        std::ostringstream msg;
        msg << "frame " << f << " person " << m << ": joint count "
            << (person.is_array() ? person.size() : 0) << " != " << v_n;
        parse_fail(msg.str());
      }
      for (std::size_t v = 0; v < v_n; ++v) {
        const json& joint = person[v];
        if (!joint.is_array() || joint.size() != channels) {
          std::ostringstream msg;
          msg << "frame " << f << " person " << m << " joint " << v
              << ": channel count " << (joint.is_array() ? joint.size() : 0)
              << " != " << channels;
          parse_fail(msg.str());
        }
        for (std::size_t c = 0; c < channels; ++c) {
          seq.data.data[((c * t_total + f) * v_n + v) * lay.max_persons + m] =
              number_at(joint[c], f, m, v, c);
        }
      }
    }
  }
  return seq;
}

SkeletonSequence load_sequence_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open sequence file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return load_sequence(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(std::string(e.what()) + " [" + path + "]");
  }
}

std::string serialize_sequence(const SkeletonSequence& seq) {
  const SkeletonLayout& lay = layout(seq.layout_id);
  const std::size_t c_n = seq.channels(), t_n = seq.frames(), v_n = seq.joints();
  // Trailing all-zero persons are layout padding, not captured bodies; they
  // are dropped so load(serialize(x)) re-pads to the same tensor.
  std::size_t persons = seq.persons();
  while (persons > 1) {
    bool all_zero = true;
    for (std::size_t c = 0; c < c_n && all_zero; ++c)
      for (std::size_t t = 0; t < t_n && all_zero; ++t)
        for (std::size_t v = 0; v < v_n; ++v)
          if (seq.data.data[((c * t_n + t) * v_n + v) * seq.persons() +
                            (persons - 1)] != 0.0) {
            all_zero = false;
            break;
          }
    if (!all_zero) break;
    --persons;
  }

  json frames = json::array();
  for (std::size_t t = 0; t < t_n; ++t) {
    json frame = json::array();
    for (std::size_t m = 0; m < persons; ++m) {
      json person = json::array();
      for (std::size_t v = 0; v < v_n; ++v) {
        json joint = json::array();
        for (std::size_t c = 0; c < c_n; ++c)
          joint.push_back(
              seq.data.data[((c * t_n + t) * v_n + v) * seq.persons() + m]);
        person.push_back(std::move(joint));
      }
      frame.push_back(std::move(person));
    }
    frames.push_back(std::move(frame));
  }
  json doc;
  doc["layout"] = lay.id;
  doc["label"] = seq.label;
  doc["true_frames"] = seq.true_frames;
  doc["channels"] = c_n;
  doc["persons"] = persons;
  doc["frames"] = std::move(frames);
  return doc.dump();
}

SkeletonSequence pad_replay(const SkeletonSequence& seq, std::size_t target_t) {
  if (seq.true_frames == 0 || seq.frames() == 0)
    throw DimensionError("pad_replay: sequence has no true frames");
  if (seq.true_frames > seq.frames())
    throw DimensionError("pad_replay: true_frames exceeds stored frames");
  if (target_t == 0) throw DimensionError("pad_replay: target length is zero");

  const std::size_t c_n = seq.channels(), t_in = seq.frames(),
                    v_n = seq.joints(), m_n = seq.persons();
  SkeletonSequence out;
  out.layout_id = seq.layout_id;
  out.label = seq.label;
  out.true_frames = std::min(seq.true_frames, target_t);
  out.data = Tensor<double>({c_n, target_t, v_n, m_n});
  for (std::size_t c = 0; c < c_n; ++c)
    for (std::size_t t = 0; t < target_t; ++t) {
      const std::size_t src = t % seq.true_frames;
      for (std::size_t v = 0; v < v_n; ++v)
        for (std::size_t m = 0; m < m_n; ++m)
          out.data.data[((c * target_t + t) * v_n + v) * m_n + m] =
              seq.data.data[((c * t_in + src) * v_n + v) * m_n + m];
    }
  return out;
}

SkeletonSequence center_normalize(const SkeletonSequence& seq) {
  const SkeletonLayout& lay = layout(seq.layout_id);
  const std::size_t c_n = seq.channels(), t_n = seq.frames(),
                    v_n = seq.joints(), m_n = seq.persons();
  require(v_n == lay.num_joints, "center_normalize: joint count mismatch");
  SkeletonSequence out = seq;
  const auto center = static_cast<std::size_t>(lay.center_joint);
  for (std::size_t c = 0; c < lay.coord_channels; ++c) {
    const double offset =
        seq.data.data[((c * t_n + 0) * v_n + center) * m_n + 0];
    for (std::size_t t = 0; t < t_n; ++t)
      for (std::size_t v = 0; v < v_n; ++v)
        for (std::size_t m = 0; m < m_n; ++m)
          out.data.data[((c * t_n + t) * v_n + v) * m_n + m] -= offset;
  }
  return out;
}

SkeletonSequence bone_transform(const SkeletonSequence& seq) {
  return bone_transform(seq, layout(seq.layout_id).parent);
}

SkeletonSequence bone_transform(const SkeletonSequence& seq,
                                const std::vector<int>& parent) {
  const SkeletonLayout& lay = layout(seq.layout_id);
  const std::size_t v_n = seq.joints();
  if (parent.size() != v_n)
    throw ConfigError("bone parent map: size mismatch with joint count");
  std::size_t roots = 0;
  for (std::size_t v = 0; v < v_n; ++v) {
    const int p = parent[v];
    if (p == -1) {
      ++roots;
      continue;
    }
    if (p < 0 || static_cast<std::size_t>(p) >= v_n)
      throw ConfigError("bone parent map: joint " + std::to_string(v) +
                        " has out-of-range parent");
    // Walking to the root must terminate within v_n steps.
    int cur = p;
    std::size_t steps = 0;
    while (cur != -1) {
      cur = parent[static_cast<std::size_t>(cur)];
      if (++steps > v_n)
        throw ConfigError("bone parent map: cycle through joint " +
                          std::to_string(v));
    }
  }
  if (roots != 1)
    throw ConfigError("bone parent map: expected exactly one root, found " +
                      std::to_string(roots));

  const std::size_t c_n = seq.channels(), t_n = seq.frames(),
                    m_n = seq.persons();
  SkeletonSequence out = seq;
  for (std::size_t c = 0; c < lay.coord_channels; ++c)
    for (std::size_t t = 0; t < t_n; ++t)
      for (std::size_t v = 0; v < v_n; ++v) {
        const int p = parent[v];
        for (std::size_t m = 0; m < m_n; ++m) {
          const std::size_t at = ((c * t_n + t) * v_n + v) * m_n + m;
          if (p == -1) {
            out.data.data[at] = 0.0;
          } else {
            out.data.data[at] =
                seq.data.data[at] -
                seq.data.data[((c * t_n + t) * v_n +
                               static_cast<std::size_t>(p)) *
                                  m_n +
                              m];
          }
        }
      }
  return out;
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open manifest '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("manifest: invalid JSON: " + std::string(e.what()));
  }
  if (!doc.is_object() || !doc.contains("layout") ||
      !doc.contains("class_count") || !doc.contains("entries"))
    throw ParseError("manifest: expected fields layout, class_count, entries");
  DatasetManifest m;
  m.layout_id = doc["layout"].get<std::string>();
  m.class_count = doc["class_count"].get<int>();
  for (const auto& e : doc["entries"]) {
    ManifestEntry entry;
    entry.path = e.at("path").get<std::string>();
    entry.label = e.at("label").get<int>();
    entry.split = e.at("split").get<std::string>();
    m.entries.push_back(std::move(entry));
  }
  validate_manifest(m);
  return m;
}

void save_manifest(const DatasetManifest& m, const std::string& path) {
  validate_manifest(m);
  json doc;
  doc["layout"] = m.layout_id;
  doc["class_count"] = m.class_count;
  json entries = json::array();
  for (const auto& e : m.entries)
    entries.push_back({{"path", e.path}, {"label", e.label}, {"split", e.split}});
  doc["entries"] = std::move(entries);
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write manifest '" + path + "'");
  out << doc.dump(2) << "\n";
}

void validate_manifest(const DatasetManifest& m) {
  layout(m.layout_id);
  if (m.class_count < 1) throw ParseError("manifest: class_count must be >= 1");
  std::set<std::string> seen;
  for (const auto& e : m.entries) {
    if (e.split != "train" && e.split != "test")
      throw ParseError("manifest: entry '" + e.path + "' has unknown split '" +
                       e.split + "'");
    if (e.label < 0 || e.label >= m.class_count)
      throw ParseError("manifest: entry '" + e.path + "' label " +
                       std::to_string(e.label) + " outside 0.." +
                       std::to_string(m.class_count - 1));
    if (!seen.insert(e.path).second)
      throw ParseError("manifest: duplicate locator '" + e.path + "'");
  }
}

SynthDataset synth_dataset(const SynthSpec& spec) {
  if (spec.classes < 2) throw ConfigError("synth: need at least 2 classes");
  if (spec.per_class_train < 1)
    throw ConfigError("synth: need at least 1 training sequence per class");
  if (spec.per_class_test < 0)
    throw ConfigError("synth: negative test count");
  if (spec.frames < 2) throw ConfigError("synth: need at least 2 frames");
  const SkeletonLayout& lay = layout(spec.layout_id);

  const std::size_t v_n = lay.num_joints, cc = lay.coord_channels;
  struct ClassMotion {
    std::vector<double> base, amp, phase;  // [V][cc]
    double freq;
  };
  std::vector<ClassMotion> motions;
  for (int k = 0; k < spec.classes; ++k) {
    Rng rng(Rng::mix(spec.seed, 0xC1A5500ULL + static_cast<std::uint64_t>(k)));
    ClassMotion m;
    m.base.resize(v_n * cc);
    m.amp.resize(v_n * cc);
    m.phase.resize(v_n * cc);
    for (auto& x : m.base) x = rng.uniform(-1.0, 1.0);
    for (auto& x : m.amp) x = 0.1 + 0.4 * rng.uniform();
    for (auto& x : m.phase) x = 6.28318530717958647692 * rng.uniform();
    m.freq = 1.0 + static_cast<double>(k % 4);
    motions.push_back(std::move(m));
  }

  SynthDataset ds;
  ds.manifest.layout_id = spec.layout_id;
  ds.manifest.class_count = spec.classes;

  std::size_t index = 0;
  auto emit = [&](int k, const char* split) {
    const ClassMotion& mo = motions[static_cast<std::size_t>(k)];
    Rng rng(Rng::mix(spec.seed, 0x5E000000ULL + index));
    const std::size_t half = spec.frames / 2;
    const std::size_t tf = half + rng.below(spec.frames - half + 1);
    const double shift = 6.28318530717958647692 * rng.uniform();
    std::vector<double> drift(cc);
    for (auto& d : drift) d = 0.5 * rng.uniform(-1.0, 1.0);

    SkeletonSequence seq;
    seq.layout_id = spec.layout_id;
    seq.label = k;
    seq.true_frames = tf;
    seq.data = Tensor<double>({lay.channels(), tf, v_n, lay.max_persons});
    const double tau = 6.28318530717958647692;
    for (std::size_t t = 0; t < tf; ++t)
      for (std::size_t v = 0; v < v_n; ++v)
        for (std::size_t c = 0; c < cc; ++c) {
          const std::size_t vc = v * cc + c;
          const double wave =
              mo.base[vc] + drift[c] +
              mo.amp[vc] * std::sin(tau * mo.freq *
                                        static_cast<double>(t) /
                                        static_cast<double>(spec.frames) +
                                    mo.phase[vc] + shift) +
              0.02 * rng.normal();
          seq.data.data[((c * tf + t) * v_n + v) * lay.max_persons + 0] = wave;
        }
    if (lay.has_confidence)
      for (std::size_t t = 0; t < tf; ++t)
        for (std::size_t v = 0; v < v_n; ++v)
          seq.data.data[((cc * tf + t) * v_n + v) * lay.max_persons + 0] = 1.0;

    char name[32];
    std::snprintf(name, sizeof(name), "seq_%05zu.json", index);
    ds.manifest.entries.push_back({name, k, split});
    ds.sequences.push_back(std::move(seq));
    ++index;
  };

  for (int k = 0; k < spec.classes; ++k)
    for (int i = 0; i < spec.per_class_train; ++i) emit(k, "train");
  for (int k = 0; k < spec.classes; ++k)
    for (int i = 0; i < spec.per_class_test; ++i) emit(k, "test");

  validate_manifest(ds.manifest);
  return ds;
}

void write_dataset(const SynthDataset& ds, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  require(ds.manifest.entries.size() == ds.sequences.size(),
          "write_dataset: manifest/sequence count mismatch");
  for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
    std::ofstream out(fs::path(dir) / ds.manifest.entries[i].path);
    if (!out)
      throw ParseError("cannot write sequence '" + ds.manifest.entries[i].path +
                       "'");
    out << serialize_sequence(ds.sequences[i]) << "\n";
  }
  save_manifest(ds.manifest, (fs::path(dir) / "manifest.json").string());
}

}  // namespace tgn
