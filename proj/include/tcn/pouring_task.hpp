#pragma once

#include "tcn/envsim.hpp"
#include "tcn/reward.hpp"
#include "tcn/rl.hpp"

namespace tcn {

// A single-view pouring demonstration cropped to the span the hand holds the container.
struct PouringDemo {
  Matrix frames;               // D × T observations from the demo view
  std::vector<PouringState> latents;
  int view = 1;
  int first_frame = 0;         // index of frames.col(0) in the source sequence
  std::string sequence_id;

  int horizon() const { return static_cast<int>(frames.cols()); }
};

// Frames from the first to the last contact keyframe of `seq` in `view`.
PouringDemo crop_pouring_demo(const GeneratedSequence& seq, int view);

struct ArmTaskConfig {
  ArmEnvConfig arm;
  // Per-joint σ of the initial joint angles around the rest pose.
  double initial_joint_noise = 0.05;
};

// 1 − mean over steps of ½(|Δangle| / 135° + |Δfill|) between the arm's latent and the
// demonstration's; 1 = the demonstration's progression reproduced exactly.
double latent_progress_score(const std::vector<PouringState>& arm, const std::vector<PouringState>& demo);

// Arm state augmented with the embedding of its current camera frame:
// x = [q, q̇, f(o)] with f the embedding network.
class ArmPouringTask : public TaskEnv {
 public:
  // Episode success is the latent progress score against `reference` (one state per
  // step), or the final fill level when no reference is given.
  ArmPouringTask(const PouringWorld& world, ArmTaskConfig config, const EmbeddingNet& net, int horizon,
                 std::vector<PouringState> reference = {});

  int state_dim() const override { return 2 * ArmEnv::kJoints + embedding_dim_; }
  int action_dim() const override { return ArmEnv::kJoints; }
  int horizon() const override { return horizon_; }
  std::unique_ptr<Episode> start(SeededRng& rng) const override;

  // Offset of the embedding block inside the state vector.
  static constexpr int kEmbeddingOffset = 2 * ArmEnv::kJoints;
  const ArmEnv& arm() const { return arm_; }

 private:
  ArmEnv arm_;
  ArmTaskConfig config_;
  const EmbeddingNet* net_;
  int embedding_dim_;
  int horizon_;
  std::vector<PouringState> reference_;
};

// Initial TVLG policy: zero gains and offsets, diagonal exploration noise with a larger
// variance on the wrist so the tilt is explored.
TVLGPolicy initial_arm_policy(int horizon, int state_dim, double variance, double wrist_factor,
                              int wrist_joint);

}  // namespace tcn
