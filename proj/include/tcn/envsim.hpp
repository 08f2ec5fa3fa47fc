#pragma once

#include "tcn/numerics.hpp"
#include "tcn/sequence.hpp"

#include <array>
#include <string>
#include <vector>

namespace tcn {

// ---------------------------------------------------------------------------
// Rendering

// Random bases from which view-specific renderers are interpolated by angle:
// W(θ) = cos θ · W_a + sin θ · W_b, so nearby angles give correlated maps and
// unseen angles in between are well defined.
struct RendererFamily {
  Matrix w1_a, w1_b;  // hidden × input
  Matrix w2_a, w2_b;  // output × hidden
  Vector b1, b2;
  Matrix offset_basis;  // output × 2, view offset = basis · (cos θ, sin θ)

  int input_dim() const { return static_cast<int>(w1_a.cols()); }
  int output_dim() const { return static_cast<int>(w2_a.rows()); }

  static RendererFamily random(int input_dim, int hidden_dim, int output_dim, SeededRng& rng,
                               double input_gain = 1.5, double offset_scale = 0.5);
};

// observation = W₂ tanh(W₁ input + b₁) + b₂ + view offset + σ · noise, where input
// is the latent state concatenated with the view's camera-nuisance vector.
class ViewRenderer {
 public:
  ViewRenderer() = default;
  ViewRenderer(const RendererFamily& family, int view_id, double angle_deg, double noise_scale,
               int native_dim = -1);

  int view_id() const { return view_id_; }
  double angle_deg() const { return angle_deg_; }
  int input_dim() const { return static_cast<int>(w1_.cols()); }
  // Channels carrying signal; the remaining output channels are zero.
  int native_dim() const { return native_dim_; }
  int output_dim() const { return static_cast<int>(w2_.rows()); }
  double noise_scale() const { return noise_scale_; }

  Vector render(const Vector& input, SeededRng* noise) const;
  Matrix render_sequence(const Matrix& inputs, SeededRng* noise) const;

 private:
  int view_id_ = 0;
  double angle_deg_ = 0.0;
  double noise_scale_ = 0.0;
  int native_dim_ = 0;
  Matrix w1_, w2_;
  Vector b1_, b2_, offset_;
};

// Frames at t = k / frame_rate for 0 ≤ t ≤ duration.
int frame_count(double duration, double frame_rate);
Vector frame_times(int frames, double frame_rate);

// Smooth random trajectories: each dimension is a normalized sum of sinusoids
// with frequencies in [0.2, 1] × max_freq_hz, bounded by `amplitude`.
Matrix band_limited_trajectory(SeededRng& rng, int dims, const Vector& times, double max_freq_hz,
                               double amplitude, int components = 4);

// ---------------------------------------------------------------------------
// Pouring world

inline constexpr std::array<int, 4> kContainerAngles = {90, 45, 0, -45};
int nearest_container_angle(double angle_deg);

// Continuous latent state of the pouring scene, shared by the scripted human
// sequences and the robot arm environment.
struct PouringState {
  double hand_gap = 1.0;   // 0 = hand on container
  bool contact = false;
  double distance = 1.0;   // container to recipient
  double angle_deg = 90.0;  // container tilt
  double flow = 0.0;        // liquid leaving the container, [0, 1]
  double fill = 0.0;        // recipient fill level, [0, 1]
  std::array<double, 2> subject{0.0, 0.0};    // subject motion nuisance
  std::array<double, 2> container{0.0, 0.0};  // container appearance
};

inline constexpr int kPouringLatentDim = 10;
Vector encode_pouring_latent(const PouringState& s);

struct PouringConfig {
  double frame_rate = 10.0;
  int observation_dim = 64;
  int renderer_hidden = 48;
  int camera_dims = 3;
  std::vector<double> view_angles_deg{0.0, 75.0};
  // Per-view camera motion amplitude (first-person camera steady, third-person roaming).
  std::vector<double> camera_motion{0.4, 1.2};
  double camera_bandwidth_hz = 0.6;
  double noise_scale = 0.05;
  double subject_motion = 0.3;
  double within_distance_threshold = 0.35;
  double min_duration = 4.5;
  double max_duration = 6.0;
  int train_sequences = 133;
  int validation_sequences = 17;
  int test_sequences = 30;
  std::uint64_t renderer_seed = 1234;
};

// Event times in seconds, strictly increasing.
struct PouringScript {
  double duration = 0.0;
  double contact_start = 0.0;
  double near = 0.0;
  double flow_start = 0.0;
  double flow_end = 0.0;
  double far = 0.0;
  double contact_end = 0.0;
};

// Segment fractions of the duration are uniform on these ranges; exposed for the
// closed-form occupancy checks.
struct PouringScriptPriors {
  std::array<double, 2> contact_start{0.05, 0.12};
  std::array<double, 2> reach{0.08, 0.14};
  std::array<double, 2> tilt{0.05, 0.10};
  std::array<double, 2> pour{0.20, 0.34};
  std::array<double, 2> untilt{0.06, 0.12};
  std::array<double, 2> release{0.05, 0.10};
};

inline constexpr double kMinPouringDuration = 3.0;

PouringScript sample_pouring_script(SeededRng& rng, double duration,
                                    const PouringScriptPriors& priors = {});

PouringState scripted_pouring_state(const PouringScript& script, double t,
                                    double within_distance_threshold);

struct GeneratedSequence {
  MultiViewSequence sequence;
  EvaluationSidecar sidecar;
};

class PouringWorld {
 public:
  explicit PouringWorld(PouringConfig config);

  const PouringConfig& config() const { return config_; }
  int num_views() const { return static_cast<int>(renderers_.size()); }
  const ViewRenderer& renderer(int view) const { return renderers_.at(static_cast<std::size_t>(view)); }

  // Labels derived from a latent state.
  std::map<std::string, int> attributes(const PouringState& s) const;

  GeneratedSequence generate(SeededRng& rng, const std::string& id, double duration,
                             bool disable_noise = false) const;

  // Renders a latent trajectory through one view with the given camera motion.
  Matrix render_states(const std::vector<PouringState>& states, int view, const Matrix& camera,
                       SeededRng* noise) const;

 private:
  PouringConfig config_;
  std::vector<ViewRenderer> renderers_;
};

// ---------------------------------------------------------------------------
// Pose world (human-like / robot-like agents sharing 8 joint semantics)

enum class Agent { kHuman, kRobot };
const char* agent_name(Agent a);

inline constexpr int kNumJoints = 8;

struct JointRanges {
  Vector lower;
  Vector upper;
  Vector width() const { return upper - lower; }
  Vector clamp(const Vector& j) const { return j.cwiseMax(lower).cwiseMin(upper); }
};

JointRanges default_joint_ranges();

struct PoseConfig {
  double frame_rate = 10.0;
  int observation_dim = 64;
  int robot_native_dim = 56;
  int human_native_dim = 64;
  int renderer_hidden = 48;
  int pose_features = 12;
  int appearance_dims = 3;
  int camera_dims = 2;
  double band_limit_hz = 0.4;
  double camera_motion = 0.15;
  double noise_scale = 0.05;
  // Angle (degrees) between the robot and human renderer bases.
  double embodiment_angle_deg = 55.0;
  double embodiment_perturbation = 0.5;
  double human_appearance_scale = 1.0;
  double robot_appearance_scale = 0.2;
  double imitation_lag_s = 0.1;
  double imitation_noise = 0.05;  // fraction of joint range
  std::uint64_t renderer_seed = 4321;
};

struct PoseCamera {
  Agent agent;
  double angle_deg;
};

class PoseWorld {
 public:
  explicit PoseWorld(PoseConfig config);

  const PoseConfig& config() const { return config_; }
  const JointRanges& ranges() const { return ranges_; }

  // Smooth random joint trajectory (kNumJoints × frames) within the declared ranges.
  Matrix random_joint_trajectory(SeededRng& rng, const Vector& times, double band_limit_hz) const;

  // A human imitating `target`: delayed, perturbed, clamped.
  Matrix imitate(SeededRng& rng, const Matrix& target, const Vector& times) const;

  // Agent-specific appearance of a joint configuration (pose features).
  Vector pose_features(Agent agent, const Vector& joints) const;

  Matrix render(Agent agent, const Matrix& joints, const Vector& appearance, double angle_deg,
                const Matrix& camera, SeededRng* noise) const;

  Vector sample_appearance(Agent agent, SeededRng& rng) const;

  // One sequence of `agent` performing (robot) or imitating (human) a random motion,
  // filmed by cameras at `angles_deg`; the sidecar stores the target robot joints.
  GeneratedSequence generate(SeededRng& rng, const std::string& id, Agent agent, double duration,
                             const std::vector<double>& angles_deg) const;

  // Robot random motion with a simultaneous human imitator; views are the robot
  // cameras followed by the human cameras.
  GeneratedSequence generate_mixed(SeededRng& rng, const std::string& id, double duration,
                                   const std::vector<double>& angles_deg) const;

 private:
  ViewRenderer renderer_for(Agent agent, double angle_deg) const;

  PoseConfig config_;
  JointRanges ranges_;
  Matrix robot_pose_map_, human_pose_map_;
  Vector robot_pose_bias_, human_pose_bias_;
  RendererFamily robot_family_, human_family_;
};

// ---------------------------------------------------------------------------
// Controlled arm environment (pouring surrogate)

struct ArmEnvConfig {
  double dt = 0.1;
  int horizon = 30;
  double damping = 2.0;
  double stiffness = 1.0;
  double coupling = 0.3;
  double input_gain = 4.0;
  double action_bound = 10.0;
  double process_noise = 0.01;
  double link1 = 0.5;
  double link2 = 0.5;
  std::array<double, 2> recipient{0.3, 0.7};
  double pour_height = 0.2;
  double fill_time = 1.2;
  int wrist_joint = 2;
  int camera_view = 0;
  std::array<double, 2> container_appearance{0.0, 0.0};
};

struct ArmState {
  Vector q;   // joint angles (3)
  Vector qd;  // joint velocities (3)
  double fill = 0.0;
};

struct ArmStep {
  ArmState state;
  Vector observation;
};

class ArmEnv {
 public:
  static constexpr int kJoints = 3;

  ArmEnv(ArmEnvConfig config, const PouringWorld& world);

  const ArmEnvConfig& config() const { return config_; }
  ArmState rest_state() const;

  // Deterministic given (state, action, process-noise draw from rng).
  ArmStep step(const ArmState& state, const Vector& action, SeededRng* rng) const;
  Vector observe(const ArmState& state, SeededRng* noise) const;
  PouringState latent(const ArmState& state) const;

  // Jacobians of the noise-free (q, qd) transition at an unclamped action.
  struct Linearization {
    Matrix state_jacobian;   // 6 × 6
    Matrix action_jacobian;  // 6 × 3
  };
  Linearization linearize(const ArmState& state, const Vector& action) const;

  // Joint configuration placing the container over the recipient with the
  // given tilt; used to script reference motions.
  Vector pour_configuration(double angle_deg) const;

 private:
  Vector joint_acceleration(const Vector& q, const Vector& qd, const Vector& u) const;

  ArmEnvConfig config_;
  const PouringWorld* world_;
  Matrix coupling_;
};

}  // namespace tcn
