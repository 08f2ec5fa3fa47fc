#pragma once

#include "tcn/numerics.hpp"

#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tcn {

// Synchronized multi-view observation streams. Carries no latent state: hidden
// attributes live in EvaluationSidecar and are loaded through a separate API.
class MultiViewSequence {
 public:
  MultiViewSequence() = default;
  // Each view is observation_dim × frames (one frame per column).
  MultiViewSequence(std::string id, double frame_rate, std::vector<Matrix> views);

  const std::string& id() const { return id_; }
  double frame_rate() const { return frame_rate_; }
  int num_views() const { return static_cast<int>(views_.size()); }
  int num_frames() const { return views_.empty() ? 0 : static_cast<int>(views_[0].cols()); }
  int observation_dim() const { return views_.empty() ? 0 : static_cast<int>(views_[0].rows()); }
  double duration() const { return num_frames() > 0 ? timestamps_[num_frames() - 1] : 0.0; }

  const Vector& timestamps() const { return timestamps_; }
  const Matrix& view(int v) const { return views_.at(static_cast<std::size_t>(v)); }
  Vector frame(int v, int k) const { return view(v).col(k); }

  // Keep only the listed views (order preserved as given).
  MultiViewSequence select_views(const std::vector<int>& views) const;

 private:
  std::string id_;
  double frame_rate_ = 0.0;
  std::vector<Matrix> views_;
  Vector timestamps_;
};

struct FrameRef {
  std::string sequence_id;
  int view = 0;
  int frame = 0;
  bool operator==(const FrameRef&) const = default;
};

struct Triplet {
  FrameRef anchor;
  FrameRef positive;
  FrameRef negative;
};

inline constexpr std::array<const char*, 5> kPouringAttributes = {
    "hand_contact", "within_pouring_distance", "container_angle", "liquid_flowing",
    "recipient_has_liquid"};

// Per-frame class labels, attribute name → one label per frame.
using AttributeLabelSet = std::map<std::string, std::vector<int>>;

// first-contact, first-flow, last-flow, last-contact
using KeyframeAlignment = std::array<int, 4>;

void validate_keyframes(const KeyframeAlignment& k, int num_frames);

// Evaluation-only ground truth for one sequence.
struct EvaluationSidecar {
  std::string sequence_id;
  Matrix latent;  // latent_dim × frames
  std::optional<KeyframeAlignment> keyframes;
  AttributeLabelSet attributes;
  std::optional<Matrix> joints;  // joints × frames (pose datasets)
};

struct SequenceEntry {
  std::string id;
  std::string split;
  double frame_rate = 0.0;
  int views = 0;
  int frames = 0;
  int observation_dim = 0;
  std::string blob;
  std::map<std::string, std::string> tags;
};

struct StoreManifest {
  std::string kind;
  int observation_dim = 0;
  std::string config_hash;
  std::map<std::string, std::string> metadata;
  std::vector<SequenceEntry> sequences;
};

inline constexpr int kStoreVersion = 1;

/// Raised on a malformed manifest; `field()` names the offending key path.
class ManifestError : public std::runtime_error {
 public:
  ManifestError(const std::string& field, const std::string& what)
      : std::runtime_error("manifest field '" + field + "': " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Writes manifest.json, frames/<id>.bin and (when given) sidecar/<id>.json.
void write_store(const std::string& dir, StoreManifest manifest,
                 const std::vector<std::pair<MultiViewSequence, std::string>>& sequences,
                 const std::vector<EvaluationSidecar>& sidecars,
                 const std::vector<std::map<std::string, std::string>>& tags = {});

StoreManifest read_manifest(const std::string& dir);

// Training-path access: frames only.
class SequenceStore {
 public:
  explicit SequenceStore(std::string dir);
  const StoreManifest& manifest() const { return manifest_; }
  MultiViewSequence load(const std::string& id) const;
  std::vector<MultiViewSequence> load_split(const std::string& split) const;
  std::vector<std::string> ids(const std::string& split) const;
  const SequenceEntry& entry(const std::string& id) const;

 private:
  std::string dir_;
  StoreManifest manifest_;
};

// Evaluation-path access to hidden latents; absent files raise.
EvaluationSidecar load_sidecar(const std::string& dir, const std::string& id);

}  // namespace tcn
