#include "tcn/pouring_task.hpp"

#include <cmath>

namespace tcn {

PouringDemo crop_pouring_demo(const GeneratedSequence& seq, int view) {
  if (!seq.sidecar.keyframes) {
    throw std::invalid_argument("crop_pouring_demo: sequence '" + seq.sequence.id() + "' has no keyframes");
  }
  const auto& kf = *seq.sidecar.keyframes;
  const int first = kf[0];
  const int last = kf[3];
  const Matrix& frames = seq.sequence.view(view);
  PouringDemo demo;
  demo.frames = frames.middleCols(first, last - first + 1);
  demo.view = view;
  demo.first_frame = first;
  demo.sequence_id = seq.sequence.id();
  const Matrix& latent = seq.sidecar.latent;
  for (int k = first; k <= last; ++k) {
    PouringState s;
    // inverse of encode_pouring_latent for the fields the arm can reproduce
    s.hand_gap = latent(0, k);
    s.contact = latent(1, k) > 0.5;
    s.distance = latent(2, k);
    s.angle_deg = 90.0 * latent(3, k);
    s.flow = latent(4, k);
    s.fill = latent(5, k);
    demo.latents.push_back(s);
  }
  return demo;
}

double latent_progress_score(const std::vector<PouringState>& arm, const std::vector<PouringState>& demo) {
  if (arm.size() != demo.size() || arm.empty()) {
    throw HorizonError("latent_progress_score: arm and demonstration lengths differ");
  }
  double err = 0.0;
  for (std::size_t t = 0; t < arm.size(); ++t) {
    err += 0.5 * (std::abs(arm[t].angle_deg - demo[t].angle_deg) / 135.0 + std::abs(arm[t].fill - demo[t].fill));
  }
  return 1.0 - err / static_cast<double>(arm.size());
}

namespace {

class ArmEpisode : public Episode {
 public:
  ArmEpisode(const ArmEnv& arm, const EmbeddingNet& net, const std::vector<PouringState>& reference,
             ArmState s, SeededRng& rng)
      : arm_(&arm), net_(&net), reference_(&reference), state_(std::move(s)) {
    embed(arm.observe(state_, &rng));
    visited_.push_back(arm.latent(state_));
  }

  Vector state() const override {
    Vector x(ArmPouringTask::kEmbeddingOffset + embedding_.size());
    x << state_.q, state_.qd, embedding_;
    return x;
  }

  void step(const Vector& action, SeededRng& rng) override {
    ArmStep next = arm_->step(state_, action, &rng);
    state_ = std::move(next.state);
    embed(next.observation);
    visited_.push_back(arm_->latent(state_));
  }

  double success() const override {
    if (reference_->empty()) return state_.fill;
    // the last visited state lies past the horizon
    const std::vector<PouringState> arm(visited_.begin(), visited_.begin() + static_cast<std::ptrdiff_t>(reference_->size()));
    return latent_progress_score(arm, *reference_);
  }

 private:
  void embed(const Vector& observation) { embedding_ = net_->forward(Matrix(observation)).col(0); }

  const ArmEnv* arm_;
  const EmbeddingNet* net_;
  const std::vector<PouringState>* reference_;
  ArmState state_;
  Vector embedding_;
  std::vector<PouringState> visited_;
};

}  // namespace

ArmPouringTask::ArmPouringTask(const PouringWorld& world, ArmTaskConfig config, const EmbeddingNet& net,
                               int horizon, std::vector<PouringState> reference)
    : arm_(config.arm, world),
      config_(config),
      net_(&net),
      embedding_dim_(net.output_dim()),
      horizon_(horizon),
      reference_(std::move(reference)) {
  if (horizon <= 0) throw std::invalid_argument("ArmPouringTask: horizon must be positive");
  if (!reference_.empty() && static_cast<int>(reference_.size()) != horizon) {
    throw HorizonError("ArmPouringTask: reference length differs from the horizon");
  }
  if (net.input_dim() != world.config().observation_dim) {
    throw DimensionError("ArmPouringTask: embedding net input does not match the observation dim");
  }
}

std::unique_ptr<Episode> ArmPouringTask::start(SeededRng& rng) const {
  ArmState s = arm_.rest_state();
  for (int i = 0; i < ArmEnv::kJoints; ++i) s.q[i] += config_.initial_joint_noise * rng.normal();
  return std::make_unique<ArmEpisode>(arm_, *net_, reference_, std::move(s), rng);
}

TVLGPolicy initial_arm_policy(int horizon, int state_dim, double variance, double wrist_factor, int wrist_joint) {
  Vector var = Vector::Constant(ArmEnv::kJoints, variance);
  var[wrist_joint] *= wrist_factor;
  return TVLGPolicy::initial(horizon, state_dim, var);
}

}  // namespace tcn
