#include "tcn/envsim.hpp"

#include <cmath>
#include <numbers>

namespace tcn {
namespace {

RendererFamily blend(const RendererFamily& base, const RendererFamily& other, double angle_deg) {
  const double c = std::cos(angle_deg * std::numbers::pi / 180.0);
  const double s = std::sin(angle_deg * std::numbers::pi / 180.0);
  RendererFamily f;
  f.w1_a = c * base.w1_a + s * other.w1_a;
  f.w1_b = c * base.w1_b + s * other.w1_b;
  f.w2_a = c * base.w2_a + s * other.w2_a;
  f.w2_b = c * base.w2_b + s * other.w2_b;
  f.b1 = c * base.b1 + s * other.b1;
  f.b2 = c * base.b2 + s * other.b2;
  f.offset_basis = c * base.offset_basis + s * other.offset_basis;
  return f;
}

}  // namespace

const char* agent_name(Agent a) { return a == Agent::kHuman ? "human" : "robot"; }

JointRanges default_joint_ranges() {
  JointRanges r;
  r.lower.resize(kNumJoints);
  r.upper.resize(kNumJoints);
  r.lower << -1.5, -1.0, -2.0, 0.0, -1.5, -1.0, -1.2, -0.8;
  r.upper << 1.5, 1.2, 0.5, 2.2, 1.5, 1.0, 1.2, 0.8;
  return r;
}

PoseWorld::PoseWorld(PoseConfig config) : config_(std::move(config)), ranges_(default_joint_ranges()) {
  if (config_.robot_native_dim > config_.observation_dim ||
      config_.human_native_dim > config_.observation_dim) {
    throw std::invalid_argument("PoseWorld: native observation dims exceed the padded dim");
  }
  SeededRng rng(config_.renderer_seed);
  const int f = config_.pose_features;
  robot_pose_map_ = Matrix(f, kNumJoints);
  for (Eigen::Index j = 0; j < robot_pose_map_.cols(); ++j) {
    for (Eigen::Index i = 0; i < f; ++i) robot_pose_map_(i, j) = rng.normal(0.0, 1.2 / std::sqrt(kNumJoints));
  }
  robot_pose_bias_ = 0.2 * rng.normal_vector(f);
  Matrix perturb(f, kNumJoints);
  for (Eigen::Index j = 0; j < perturb.cols(); ++j) {
    for (Eigen::Index i = 0; i < f; ++i) perturb(i, j) = rng.normal(0.0, 1.2 / std::sqrt(kNumJoints));
  }
  human_pose_map_ = robot_pose_map_ + config_.embodiment_perturbation * perturb;
  human_pose_bias_ = robot_pose_bias_ + config_.embodiment_perturbation * 0.2 * rng.normal_vector(f);

  const int input = f + config_.appearance_dims + config_.camera_dims;
  robot_family_ = RendererFamily::random(input, config_.renderer_hidden, config_.observation_dim, rng);
  const auto independent =
      RendererFamily::random(input, config_.renderer_hidden, config_.observation_dim, rng);
  human_family_ = blend(robot_family_, independent, config_.embodiment_angle_deg);
}

Matrix PoseWorld::random_joint_trajectory(SeededRng& rng, const Vector& times,
                                          double band_limit_hz) const {
  const Matrix wave = band_limited_trajectory(rng, kNumJoints, times, band_limit_hz, 1.0);
  const Vector mid = 0.5 * (ranges_.lower + ranges_.upper);
  const Vector half = 0.5 * ranges_.width();
  Matrix out(kNumJoints, times.size());
  for (Eigen::Index k = 0; k < times.size(); ++k) {
    out.col(k) = mid + 0.95 * half.cwiseProduct(wave.col(k));
  }
  return out;
}

Matrix PoseWorld::imitate(SeededRng& rng, const Matrix& target, const Vector& times) const {
  if (target.rows() != kNumJoints || target.cols() != times.size()) {
    throw DimensionError("PoseWorld::imitate: target must be joints × frames");
  }
  const Matrix wobble = band_limited_trajectory(rng, kNumJoints, times, 2.0 * config_.band_limit_hz, 1.0);
  const double lag_frames = config_.imitation_lag_s * config_.frame_rate;
  const Vector width = ranges_.width();
  Matrix out(kNumJoints, target.cols());
  const Eigen::Index n = target.cols();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double src = std::max(0.0, static_cast<double>(k) - lag_frames);
    const auto lo = static_cast<Eigen::Index>(std::floor(src));
    const Eigen::Index hi = std::min(lo + 1, n - 1);
    const double a = src - static_cast<double>(lo);
    const Vector delayed = (1.0 - a) * target.col(lo) + a * target.col(hi);
    out.col(k) = ranges_.clamp(delayed + config_.imitation_noise * width.cwiseProduct(wobble.col(k)));
  }
  return out;
}

Vector PoseWorld::pose_features(Agent agent, const Vector& joints) const {
  if (joints.size() != kNumJoints) throw DimensionError("PoseWorld::pose_features: expected 8 joints");
  const Vector normalized =
      (2.0 * (joints - ranges_.lower).array() / ranges_.width().array() - 1.0).matrix();
  const Matrix& m = agent == Agent::kHuman ? human_pose_map_ : robot_pose_map_;
  const Vector& b = agent == Agent::kHuman ? human_pose_bias_ : robot_pose_bias_;
  return (m * normalized + b).array().tanh().matrix();
}

ViewRenderer PoseWorld::renderer_for(Agent agent, double angle_deg) const {
  return agent == Agent::kHuman
             ? ViewRenderer(human_family_, 0, angle_deg, config_.noise_scale, config_.human_native_dim)
             : ViewRenderer(robot_family_, 0, angle_deg, config_.noise_scale, config_.robot_native_dim);
}

Matrix PoseWorld::render(Agent agent, const Matrix& joints, const Vector& appearance, double angle_deg,
                         const Matrix& camera, SeededRng* noise) const {
  if (appearance.size() != config_.appearance_dims || camera.rows() != config_.camera_dims ||
      camera.cols() != joints.cols()) {
    throw DimensionError("PoseWorld::render: appearance/camera shape mismatch");
  }
  const ViewRenderer r = renderer_for(agent, angle_deg);
  Matrix inputs(r.input_dim(), joints.cols());
  for (Eigen::Index k = 0; k < joints.cols(); ++k) {
    inputs.col(k) << pose_features(agent, joints.col(k)), appearance, camera.col(k);
  }
  return r.render_sequence(inputs, noise);
}

Vector PoseWorld::sample_appearance(Agent agent, SeededRng& rng) const {
  Vector a(config_.appearance_dims);
  for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = rng.uniform(-1.0, 1.0);
  if (agent == Agent::kHuman) return config_.human_appearance_scale * a;
  Vector base = Vector::Constant(config_.appearance_dims, 0.5);
  return base + config_.robot_appearance_scale * a;
}

GeneratedSequence PoseWorld::generate(SeededRng& rng, const std::string& id, Agent agent,
                                      double duration, const std::vector<double>& angles_deg) const {
  if (angles_deg.empty()) throw std::invalid_argument("PoseWorld::generate: no camera angles");
  const int n = frame_count(duration, config_.frame_rate);
  const Vector times = frame_times(n, config_.frame_rate);
  const Matrix target = random_joint_trajectory(rng, times, config_.band_limit_hz);
  const Matrix performed = agent == Agent::kHuman ? imitate(rng, target, times) : target;
  const Vector appearance = sample_appearance(agent, rng);
  std::vector<Matrix> views;
  for (double angle : angles_deg) {
    Matrix camera = band_limited_trajectory(rng, config_.camera_dims, times, 0.3, config_.camera_motion);
    views.push_back(render(agent, performed, appearance, angle, camera, &rng));
  }
  GeneratedSequence out{MultiViewSequence(id, config_.frame_rate, std::move(views)), {}};
  out.sidecar.sequence_id = id;
  out.sidecar.latent = performed;
  out.sidecar.joints = target;
  return out;
}

GeneratedSequence PoseWorld::generate_mixed(SeededRng& rng, const std::string& id, double duration,
                                            const std::vector<double>& angles_deg) const {
  if (angles_deg.empty()) throw std::invalid_argument("PoseWorld::generate_mixed: no camera angles");
  const int n = frame_count(duration, config_.frame_rate);
  const Vector times = frame_times(n, config_.frame_rate);
  const Matrix target = random_joint_trajectory(rng, times, config_.band_limit_hz);
  const Matrix human = imitate(rng, target, times);
  const Vector robot_look = sample_appearance(Agent::kRobot, rng);
  const Vector human_look = sample_appearance(Agent::kHuman, rng);
  std::vector<Matrix> views;
  for (Agent agent : {Agent::kRobot, Agent::kHuman}) {
    for (double angle : angles_deg) {
      Matrix camera = band_limited_trajectory(rng, config_.camera_dims, times, 0.3, config_.camera_motion);
      views.push_back(agent == Agent::kRobot ? render(agent, target, robot_look, angle, camera, &rng)
                                             : render(agent, human, human_look, angle, camera, &rng));
    }
  }
  GeneratedSequence out{MultiViewSequence(id, config_.frame_rate, std::move(views)), {}};
  out.sidecar.sequence_id = id;
  out.sidecar.latent = human;
  out.sidecar.joints = target;
  return out;
}

}  // namespace tcn
