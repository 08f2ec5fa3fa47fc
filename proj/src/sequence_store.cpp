#include "tcn/sequence.hpp"

#include "tcn/mlp.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace tcn {

static_assert(std::endian::native == std::endian::little, "frame blobs are little-endian float64");

MultiViewSequence::MultiViewSequence(std::string id, double frame_rate, std::vector<Matrix> views)
    : id_(std::move(id)), frame_rate_(frame_rate), views_(std::move(views)) {
  if (!(frame_rate_ > 0.0)) throw std::invalid_argument("MultiViewSequence: frame rate must be > 0");
  if (views_.empty()) throw std::invalid_argument("MultiViewSequence: no views");
  for (const auto& v : views_) {
    if (v.rows() != views_[0].rows() || v.cols() != views_[0].cols()) {
      throw DimensionError("MultiViewSequence: views must share dimension and length");
    }
  }
  timestamps_ = Vector(views_[0].cols());
  for (Eigen::Index k = 0; k < timestamps_.size(); ++k) {
    timestamps_[k] = static_cast<double>(k) / frame_rate_;
  }
}

MultiViewSequence MultiViewSequence::select_views(const std::vector<int>& views) const {
  std::vector<Matrix> kept;
  for (int v : views) kept.push_back(view(v));
  return MultiViewSequence(id_, frame_rate_, std::move(kept));
}

void validate_keyframes(const KeyframeAlignment& k, int num_frames) {
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] < 0 || k[i] >= num_frames) {
      throw std::invalid_argument("keyframe index out of sequence bounds");
    }
    if (i > 0 && k[i] <= k[i - 1]) throw std::invalid_argument("keyframes must be strictly increasing");
  }
}

namespace {

nlohmann::json sidecar_to_json(const EvaluationSidecar& s) {
  nlohmann::json j;
  j["format"] = "tcn-sidecar";
  j["version"] = kStoreVersion;
  j["sequence_id"] = s.sequence_id;
  j["latent"] = matrix_to_json(s.latent);
  if (s.keyframes) j["keyframes"] = *s.keyframes;
  j["attributes"] = s.attributes;
  if (s.joints) j["joints"] = matrix_to_json(*s.joints);
  return j;
}

template <typename T>
T require(const nlohmann::json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ManifestError(path + key, "missing");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError(path + key, std::string("wrong type: ") + e.what());
  }
}

}  // namespace

void write_store(const std::string& dir, StoreManifest manifest,
                 const std::vector<std::pair<MultiViewSequence, std::string>>& sequences,
                 const std::vector<EvaluationSidecar>& sidecars,
                 const std::vector<std::map<std::string, std::string>>& tags) {
  fs::create_directories(fs::path(dir) / "frames");
  if (!sidecars.empty()) fs::create_directories(fs::path(dir) / "sidecar");
  manifest.sequences.clear();
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const auto& [seq, split] = sequences[i];
    SequenceEntry e;
    e.id = seq.id();
    e.split = split;
    e.frame_rate = seq.frame_rate();
    e.views = seq.num_views();
    e.frames = seq.num_frames();
    e.observation_dim = seq.observation_dim();
    e.blob = "frames/" + seq.id() + ".bin";
    if (i < tags.size()) e.tags = tags[i];
    std::ofstream out(fs::path(dir) / e.blob, std::ios::binary);
    if (!out) throw std::runtime_error("write_store: cannot open blob for " + seq.id());
    // (view, time, dim) order; Eigen columns are frames so each column is contiguous
    for (int v = 0; v < seq.num_views(); ++v) {
      const Matrix& m = seq.view(v);
      out.write(reinterpret_cast<const char*>(m.data()),
                static_cast<std::streamsize>(m.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("write_store: write failed for " + seq.id());
    manifest.sequences.push_back(std::move(e));
  }
  nlohmann::json j;
  j["format"] = "tcn-sequence-store";
  j["version"] = kStoreVersion;
  j["kind"] = manifest.kind;
  j["observation_dim"] = manifest.observation_dim;
  j["config_hash"] = manifest.config_hash;
  j["metadata"] = manifest.metadata;
  j["sequences"] = nlohmann::json::array();
  for (const auto& e : manifest.sequences) {
    j["sequences"].push_back({{"id", e.id},
                              {"split", e.split},
                              {"frame_rate", e.frame_rate},
                              {"views", e.views},
                              {"frames", e.frames},
                              {"observation_dim", e.observation_dim},
                              {"blob", e.blob},
                              {"tags", e.tags}});
  }
  std::ofstream mout(fs::path(dir) / "manifest.json");
  mout << j.dump(1);
  for (const auto& s : sidecars) {
    std::ofstream sout(fs::path(dir) / "sidecar" / (s.sequence_id + ".json"));
    sout << sidecar_to_json(s).dump();
  }
}

StoreManifest read_manifest(const std::string& dir) {
  const fs::path path = fs::path(dir) / "manifest.json";
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_manifest: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError("<root>", std::string("not valid JSON: ") + e.what());
  }
  if (require<std::string>(j, "format", "") != "tcn-sequence-store") {
    throw ManifestError("format", "not a sequence store manifest");
  }
  if (require<int>(j, "version", "") != kStoreVersion) throw ManifestError("version", "unsupported");
  StoreManifest m;
  m.kind = require<std::string>(j, "kind", "");
  m.observation_dim = require<int>(j, "observation_dim", "");
  m.config_hash = j.value("config_hash", "");
  if (j.contains("metadata")) m.metadata = j["metadata"].get<std::map<std::string, std::string>>();
  if (!j.contains("sequences") || !j["sequences"].is_array()) {
    throw ManifestError("sequences", "missing or not an array");
  }
  for (std::size_t i = 0; i < j["sequences"].size(); ++i) {
    const auto& s = j["sequences"][i];
    const std::string p = "sequences[" + std::to_string(i) + "].";
    SequenceEntry e;
    e.id = require<std::string>(s, "id", p);
    e.split = require<std::string>(s, "split", p);
    e.frame_rate = require<double>(s, "frame_rate", p);
    e.views = require<int>(s, "views", p);
    e.frames = require<int>(s, "frames", p);
    e.observation_dim = require<int>(s, "observation_dim", p);
    e.blob = require<std::string>(s, "blob", p);
    if (s.contains("tags")) e.tags = s["tags"].get<std::map<std::string, std::string>>();
    if (!(e.frame_rate > 0)) throw ManifestError(p + "frame_rate", "must be positive");
    if (e.views <= 0) throw ManifestError(p + "views", "must be positive");
    if (e.frames <= 0) throw ManifestError(p + "frames", "must be positive");
    if (e.observation_dim <= 0) throw ManifestError(p + "observation_dim", "must be positive");
    m.sequences.push_back(std::move(e));
  }
  return m;
}

SequenceStore::SequenceStore(std::string dir) : dir_(std::move(dir)), manifest_(read_manifest(dir_)) {}

const SequenceEntry& SequenceStore::entry(const std::string& id) const {
  for (const auto& e : manifest_.sequences) {
    if (e.id == id) return e;
  }
  throw std::out_of_range("SequenceStore: unknown sequence " + id);
}

MultiViewSequence SequenceStore::load(const std::string& id) const {
  const SequenceEntry& e = entry(id);
  std::ifstream in(fs::path(dir_) / e.blob, std::ios::binary);
  if (!in) throw std::runtime_error("SequenceStore: cannot open blob " + e.blob);
  std::vector<Matrix> views;
  for (int v = 0; v < e.views; ++v) {
    Matrix m(e.observation_dim, e.frames);
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!in) throw std::runtime_error("SequenceStore: truncated blob " + e.blob);
    views.push_back(std::move(m));
  }
  return MultiViewSequence(e.id, e.frame_rate, std::move(views));
}

std::vector<std::string> SequenceStore::ids(const std::string& split) const {
  std::vector<std::string> out;
  for (const auto& e : manifest_.sequences) {
    if (split.empty() || e.split == split) out.push_back(e.id);
  }
  return out;
}

std::vector<MultiViewSequence> SequenceStore::load_split(const std::string& split) const {
  std::vector<MultiViewSequence> out;
  for (const auto& id : ids(split)) out.push_back(load(id));
  return out;
}

EvaluationSidecar load_sidecar(const std::string& dir, const std::string& id) {
  const fs::path path = fs::path(dir) / "sidecar" / (id + ".json");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_sidecar: no evaluation sidecar for " + id);
  nlohmann::json j;
  in >> j;
  EvaluationSidecar s;
  s.sequence_id = j.at("sequence_id").get<std::string>();
  s.latent = matrix_from_json(j.at("latent"));
  if (j.contains("keyframes")) s.keyframes = j["keyframes"].get<KeyframeAlignment>();
  s.attributes = j.at("attributes").get<AttributeLabelSet>();
  if (j.contains("joints")) s.joints = matrix_from_json(j["joints"]);
  return s;
}

}  // namespace tcn
