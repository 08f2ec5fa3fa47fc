#include "tcn/rl.hpp"
#include "tcn/mlp.hpp"
#include "tcn/parallel.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace tcn {

void TVLGPolicy::validate() const {
  const auto t = gains.size();
  if (t == 0) throw std::invalid_argument("TVLGPolicy: empty horizon");
  if (offsets.size() != t || covariances.size() != t) {
    throw DimensionError("TVLGPolicy: gains, offsets and covariances differ in length");
  }
  for (std::size_t i = 0; i < t; ++i) {
    if (gains[i].rows() != gains[0].rows() || gains[i].cols() != gains[0].cols() ||
        offsets[i].size() != gains[0].rows() || covariances[i].dim() != gains[0].rows()) {
      throw DimensionError("TVLGPolicy: inconsistent shapes at step " + std::to_string(i));
    }
  }
}

Vector TVLGPolicy::mean_action(int t, const Vector& x) const {
  const auto i = static_cast<std::size_t>(t);
  if (x.size() != gains.at(i).cols()) throw DimensionError("TVLGPolicy: state dimension mismatch");
  return gains[i] * x + offsets[i];
}

Vector TVLGPolicy::sample_action(int t, const Vector& x, SeededRng& rng) const {
  return gaussian_sample(rng, mean_action(t, x), covariances.at(static_cast<std::size_t>(t)));
}

TVLGPolicy TVLGPolicy::initial(int horizon, int state_dim, const Vector& action_variance) {
  if (horizon <= 0 || state_dim <= 0) throw std::invalid_argument("TVLGPolicy::initial: bad sizes");
  TVLGPolicy p;
  const auto nu = action_variance.size();
  for (int t = 0; t < horizon; ++t) {
    p.gains.push_back(Matrix::Zero(nu, state_dim));
    p.offsets.push_back(Vector::Zero(nu));
    p.covariances.push_back(SymmetricPD::diagonal(action_variance));
  }
  return p;
}

nlohmann::json TVLGPolicy::to_json() const {
  nlohmann::json j;
  j["format"] = "tcn-policy";
  j["version"] = 1;
  j["horizon"] = horizon();
  j["steps"] = nlohmann::json::array();
  for (int t = 0; t < horizon(); ++t) {
    const auto i = static_cast<std::size_t>(t);
    j["steps"].push_back({{"K", matrix_to_json(gains[i])},
                          {"k", matrix_to_json(offsets[i])},
                          {"cov", matrix_to_json(covariances[i].matrix())}});
  }
  return j;
}

TVLGPolicy TVLGPolicy::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "tcn-policy") throw std::runtime_error("policy: unexpected format tag");
  TVLGPolicy p;
  for (const auto& s : j.at("steps")) {
    p.gains.push_back(matrix_from_json(s.at("K")));
    p.offsets.push_back(matrix_from_json(s.at("k")).col(0));
    p.covariances.emplace_back(matrix_from_json(s.at("cov")));
  }
  p.validate();
  return p;
}

void CostModel::expand(int t, const Vector& x, const Vector& u, Vector& gradient, Matrix& hessian) const {
  const auto nx = x.size();
  const auto n = nx + u.size();
  Vector z(n);
  z << x, u;
  auto f = [&](const Vector& p) { return cost(t, p.head(nx), p.tail(n - nx)); };
  gradient = finite_difference_gradient(f, z, 1e-5);
  const double h = 1e-4;
  hessian.resize(n, n);
  const double f0 = f(z);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector p = z;
    p[i] += h;
    const double fp = f(p);
    p[i] -= 2.0 * h;
    const double fm = f(p);
    hessian(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      Vector q = z;
      q[i] += h;
      q[j] += h;
      const double fpp = f(q);
      q[j] -= 2.0 * h;
      const double fpm = f(q);
      q[i] -= 2.0 * h;
      const double fmm = f(q);
      q[j] += 2.0 * h;
      const double fmp = f(q);
      hessian(i, j) = hessian(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
    }
  }
}

QuadraticTrackingCost::QuadraticTrackingCost(Matrix q, Matrix r, Vector target)
    : q_(std::move(q)), r_(std::move(r)), target_(std::move(target)) {
  if (q_.rows() != q_.cols() || r_.rows() != r_.cols() || target_.size() != q_.rows()) {
    throw DimensionError("QuadraticTrackingCost: inconsistent shapes");
  }
}

double QuadraticTrackingCost::cost(int, const Vector& x, const Vector& u) const {
  const Vector e = x - target_;
  return 0.5 * e.dot(q_ * e) + 0.5 * u.dot(r_ * u);
}

void QuadraticTrackingCost::expand(int, const Vector& x, const Vector& u, Vector& gradient,
                                   Matrix& hessian) const {
  const auto nx = x.size();
  const auto nu = u.size();
  gradient.resize(nx + nu);
  gradient << q_ * (x - target_), r_ * u;
  hessian = Matrix::Zero(nx + nu, nx + nu);
  hessian.topLeftCorner(nx, nx) = q_;
  hessian.bottomRightCorner(nu, nu) = r_;
}

EmbeddingTrackingCost::EmbeddingTrackingCost(DemoEmbedding demo, RewardParams params, int embedding_offset)
    : demo_(std::move(demo)), params_(params), offset_(embedding_offset) {
  params_.validate();
  if (offset_ < 0) throw std::invalid_argument("EmbeddingTrackingCost: negative offset");
}

double EmbeddingTrackingCost::cost(int t, const Vector& x, const Vector& u) const {
  const auto d = demo_.frames.rows();
  if (x.size() < offset_ + d) throw DimensionError("EmbeddingTrackingCost: state too short for the embedding");
  if (t < 0 || t >= demo_.horizon()) {
    throw HorizonError("EmbeddingTrackingCost: step " + std::to_string(t) + " outside the demonstration horizon " +
                       std::to_string(demo_.horizon()));
  }
  return -tcn_reward(demo_.frames.col(t), x.segment(offset_, d), params_) +
         params_.action_weight * u.squaredNorm();
}

void EmbeddingTrackingCost::expand(int t, const Vector& x, const Vector& u, Vector& gradient,
                                   Matrix& hessian) const {
  const auto d = demo_.frames.rows();
  const auto nx = x.size();
  const auto nu = u.size();
  if (t < 0 || t >= demo_.horizon()) throw HorizonError("EmbeddingTrackingCost: step outside the horizon");
  const Vector v = demo_.frames.col(t);
  const Vector w = x.segment(offset_, d);
  gradient = Vector::Zero(nx + nu);
  hessian = Matrix::Zero(nx + nu, nx + nu);
  gradient.segment(offset_, d) = -tcn_reward_gradient(v, w, params_);
  hessian.block(offset_, offset_, d, d) = -tcn_reward_hessian(v, w, params_);
  gradient.tail(nu) = 2.0 * params_.action_weight * u;
  hessian.bottomRightCorner(nu, nu) = 2.0 * params_.action_weight * Matrix::Identity(nu, nu);
}

Trajectory rollout(const TaskEnv& env, const TVLGPolicy& policy, const CostModel& cost, SeededRng& rng,
                   bool mean_actions) {
  if (policy.horizon() != env.horizon()) {
    throw HorizonError("rollout: policy horizon " + std::to_string(policy.horizon()) +
                       " differs from environment horizon " + std::to_string(env.horizon()));
  }
  if (policy.state_dim() != env.state_dim() || policy.action_dim() != env.action_dim()) {
    throw DimensionError("rollout: policy dimensions do not match the environment");
  }
  const int horizon = env.horizon();
  Trajectory tr{Matrix(env.state_dim(), horizon), Matrix(env.action_dim(), horizon), Vector(horizon)};
  auto episode = env.start(rng);
  for (int t = 0; t < horizon; ++t) {
    const Vector x = episode->state();
    const Vector u = mean_actions ? policy.mean_action(t, x) : policy.sample_action(t, x, rng);
    tr.states.col(t) = x;
    tr.actions.col(t) = u;
    tr.costs[t] = cost.cost(t, x, u);
    episode->step(u, rng);
  }
  tr.success = episode->success();
  return tr;
}

std::vector<Trajectory> sample_rollouts(const TaskEnv& env, const TVLGPolicy& policy,
                                        const CostModel& cost, int n, SeededRng& rng) {
  if (n <= 0) throw std::invalid_argument("sample_rollouts: need n > 0");
  const auto base = static_cast<std::uint64_t>(rng.uniform_int(0, std::numeric_limits<std::int64_t>::max()));
  std::vector<Trajectory> out(static_cast<std::size_t>(n));
  parallel_for(n, [&](int i) {
    SeededRng child(mix_seed(base, static_cast<std::uint64_t>(i)));
    out[static_cast<std::size_t>(i)] = rollout(env, policy, cost, child);
  });
  return out;
}

IterationMetrics summarize_rollouts(const std::vector<Trajectory>& rollouts) {
  IterationMetrics m;
  const auto n = static_cast<Eigen::Index>(rollouts.size());
  Vector totals(n);
  Vector success(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    totals[r] = rollouts[static_cast<std::size_t>(r)].total_cost();
    success[r] = rollouts[static_cast<std::size_t>(r)].success;
  }
  auto sample_std = [](const Vector& v) {
    if (v.size() < 2) return 0.0;
    return std::sqrt((v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1));
  };
  m.mean_cost = totals.mean();
  m.min_cost = totals.minCoeff();
  m.std_cost = sample_std(totals);
  if (success.allFinite()) {
    m.success_mean = success.mean();
    m.success_std = sample_std(success);
  }
  return m;
}

PilqrStep pilqr_iteration(const TaskEnv& env, const TVLGPolicy& policy, const CostModel& cost,
                          const PilqrConfig& config, double kl_epsilon, SeededRng& rng) {
  policy.validate();
  PilqrStep out;
  out.rollouts = sample_rollouts(env, policy, cost, config.rollouts, rng);
  out.metrics = summarize_rollouts(out.rollouts);
  out.metrics.epsilon = kl_epsilon;

  const LinearDynamics dyn = fit_linear_dynamics(out.rollouts, config.fit);
  const int horizon = policy.horizon();
  Matrix xs = Matrix::Zero(env.state_dim(), horizon);
  Matrix us = Matrix::Zero(env.action_dim(), horizon);
  for (const auto& r : out.rollouts) {
    xs += r.states;
    us += r.actions;
  }
  xs /= static_cast<double>(out.rollouts.size());
  us /= static_cast<double>(out.rollouts.size());
  const QuadraticCost model = quadratize_cost(cost, xs, us);
  const LqrResult lqr = lqr_backward_pass(dyn, model, policy, kl_epsilon, config.lqr);
  double step2 = 0.0;
  for (int t = 0; t < horizon; ++t) {
    const auto i = static_cast<std::size_t>(t);
    step2 += (lqr.policy.offsets[i] - policy.offsets[i]).squaredNorm() +
             (lqr.policy.gains[i] - policy.gains[i]).squaredNorm();
  }
  out.metrics.lqr_step_norm = std::sqrt(step2);
  out.metrics.eta = lqr.eta;

  const CostToGoSamples samples = CostToGoSamples::build(out.rollouts, model);
  out.metrics.residual_rms = std::sqrt(samples.residual.squaredNorm() / static_cast<double>(samples.residual.size()));

  out.policy = lqr.policy;
  out.metrics.kl = lqr.expected_kl;
  if (config.use_pi2 && !lqr.pinned) {
    const Pi2Result pi2 = pi2_update(lqr.policy, samples, out.rollouts, config.pi2);
    double scale = 1.0;
    for (int b = 0; b <= config.max_pi2_backtracks; ++b, scale *= 0.5) {
      TVLGPolicy candidate = pi2.policy;
      for (int t = 0; t < horizon; ++t) {
        const auto i = static_cast<std::size_t>(t);
        candidate.offsets[i] = lqr.policy.offsets[i] + scale * (pi2.policy.offsets[i] - lqr.policy.offsets[i]);
      }
      double kl = 0.0;
      for (double v : expected_kl(dyn, candidate, policy)) kl += v;
      if (kl <= kl_epsilon) {
        out.policy = std::move(candidate);
        out.metrics.kl = kl;
        out.metrics.pi2_correction_norm = scale * pi2.correction_norm;
        break;
      }
    }
  }
  return out;
}

PilqrLearner::PilqrLearner(const TaskEnv& env, const CostModel& cost, TVLGPolicy initial,
                           PilqrConfig config, std::uint64_t seed)
    : env_(&env), cost_(&cost), policy_(std::move(initial)), config_(std::move(config)), rng_(seed),
      epsilon_(config_.kl_epsilon) {
  policy_.validate();
  if (!(epsilon_ > 0.0)) throw std::invalid_argument("PilqrLearner: kl epsilon must be > 0");
  if (config_.rollouts < 2) throw std::invalid_argument("PilqrLearner: need at least 2 rollouts per iteration");
}

void PilqrLearner::record_cost(IterationMetrics& m) {
  if (!std::isnan(last_mean_) && m.mean_cost > last_mean_) {
    ++increases_;
  } else {
    increases_ = 0;
  }
  last_mean_ = m.mean_cost;
  if (increases_ >= 2) {
    epsilon_ *= 0.5;
    increases_ = 0;
    m.epsilon_halved = true;
  }
}

IterationMetrics PilqrLearner::step() {
  PilqrStep s = pilqr_iteration(*env_, policy_, *cost_, config_, epsilon_, rng_);
  s.metrics.iteration = iteration_;
  record_cost(s.metrics);
  policy_ = std::move(s.policy);
  ++iteration_;
  return s.metrics;
}

IterationMetrics PilqrLearner::evaluate() {
  IterationMetrics m = summarize_rollouts(sample_rollouts(*env_, policy_, *cost_, config_.rollouts, rng_));
  m.iteration = iteration_;
  m.epsilon = epsilon_;
  return m;
}

std::vector<IterationMetrics> PilqrLearner::run(int iterations) {
  std::vector<IterationMetrics> out;
  for (int i = 0; i < iterations; ++i) out.push_back(step());
  out.push_back(evaluate());
  return out;
}

}  // namespace tcn
