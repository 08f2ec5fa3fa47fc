#include "tcn/envsim.hpp"

#include <cmath>
#include <numbers>

namespace tcn {
namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

}  // namespace

ArmEnv::ArmEnv(ArmEnvConfig config, const PouringWorld& world) : config_(config), world_(&world) {
  if (config_.dt <= 0.0 || config_.horizon <= 0 || config_.action_bound <= 0.0) {
    throw std::invalid_argument("ArmEnv: dt, horizon and action bound must be positive");
  }
  if (config_.camera_view < 0 || config_.camera_view >= world.num_views()) {
    throw std::invalid_argument("ArmEnv: camera view outside the world's views");
  }
  coupling_ = Matrix::Zero(kJoints, kJoints);
  coupling_.diagonal() << -config_.stiffness, -config_.stiffness, -0.5 * config_.stiffness;
  coupling_(0, 1) = coupling_(1, 0) = config_.coupling;
}

ArmState ArmEnv::rest_state() const {
  return ArmState{Vector::Zero(kJoints), Vector::Zero(kJoints), 0.0};
}

Vector ArmEnv::joint_acceleration(const Vector& q, const Vector& qd, const Vector& u) const {
  return -config_.damping * qd + coupling_ * q.array().tanh().matrix() + config_.input_gain * u;
}

PouringState ArmEnv::latent(const ArmState& s) const {
  const double l1 = config_.link1;
  const double l2 = config_.link2;
  const double px = l1 * std::cos(s.q[0]) + l2 * std::cos(s.q[0] + s.q[1]);
  const double py = l1 * std::sin(s.q[0]) + l2 * std::sin(s.q[0] + s.q[1]);
  const double dx = px - config_.recipient[0];
  const double dy = py - config_.recipient[1];
  PouringState st;
  st.hand_gap = 0.0;
  st.contact = true;
  st.distance = std::sqrt(dx * dx + dy * dy + config_.pour_height * config_.pour_height);
  st.angle_deg = 90.0 - s.q[config_.wrist_joint] * kRadToDeg;
  st.flow = sigmoid((60.0 - st.angle_deg) / 4.0);
  st.fill = s.fill;
  st.container = config_.container_appearance;
  return st;
}

Vector ArmEnv::observe(const ArmState& state, SeededRng* noise) const {
  const auto& r = world_->renderer(config_.camera_view);
  Vector input = Vector::Zero(r.input_dim());
  input.head(kPouringLatentDim) = encode_pouring_latent(latent(state));
  return r.render(input, noise);
}

ArmStep ArmEnv::step(const ArmState& state, const Vector& action, SeededRng* rng) const {
  if (action.size() != kJoints) {
    throw DimensionError("ArmEnv::step: expected a " + std::to_string(kJoints) + "-dim action, got " +
                         std::to_string(action.size()));
  }
  if (!all_finite(action)) throw NumericError("ArmEnv::step: non-finite action");
  const Vector u = action.cwiseMax(-config_.action_bound).cwiseMin(config_.action_bound);
  ArmState next;
  next.qd = state.qd + config_.dt * joint_acceleration(state.q, state.qd, u);
  if (rng != nullptr && config_.process_noise > 0.0) {
    for (int i = 0; i < kJoints; ++i) next.qd[i] += config_.process_noise * std::sqrt(config_.dt) * rng->normal();
  }
  next.q = state.q + config_.dt * next.qd;
  next.fill = state.fill;
  const PouringState s = latent(next);
  const double into_recipient =
      sigmoid((world_->config().within_distance_threshold - s.distance) / 0.02);
  next.fill = std::min(1.0, state.fill + config_.dt * s.flow * into_recipient / config_.fill_time);
  return ArmStep{next, observe(next, rng)};
}

ArmEnv::Linearization ArmEnv::linearize(const ArmState& state, const Vector& action) const {
  if (action.size() != kJoints) throw DimensionError("ArmEnv::linearize: bad action size");
  const double dt = config_.dt;
  const Vector sech2 = (1.0 - state.q.array().tanh().square()).matrix();
  const Matrix dv_dq = dt * coupling_ * sech2.asDiagonal();
  const Matrix dv_dv = (1.0 - dt * config_.damping) * Matrix::Identity(kJoints, kJoints);
  const Matrix dv_du = dt * config_.input_gain * Matrix::Identity(kJoints, kJoints);
  Linearization lin;
  lin.state_jacobian.resize(2 * kJoints, 2 * kJoints);
  lin.state_jacobian << Matrix::Identity(kJoints, kJoints) + dt * dv_dq, dt * dv_dv, dv_dq, dv_dv;
  lin.action_jacobian.resize(2 * kJoints, kJoints);
  lin.action_jacobian << dt * dv_du, dv_du;
  return lin;
}

Vector ArmEnv::pour_configuration(double angle_deg) const {
  const double l1 = config_.link1;
  const double l2 = config_.link2;
  const double px = config_.recipient[0];
  const double py = config_.recipient[1];
  const double c = (px * px + py * py - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
  if (c < -1.0 || c > 1.0) throw std::invalid_argument("ArmEnv: recipient out of reach");
  Vector q(kJoints);
  q[1] = std::acos(c);
  q[0] = std::atan2(py, px) - std::atan2(l2 * std::sin(q[1]), l1 + l2 * std::cos(q[1]));
  q[2] = (90.0 - angle_deg) / kRadToDeg;
  return q;
}

}  // namespace tcn
