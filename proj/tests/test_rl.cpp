#include "oracles.hpp"

#include "tcn/pouring_task.hpp"
#include "tcn/rl.hpp"

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <cmath>

using namespace tcn;

namespace {

LinearDynamics exact_dynamics(const oracle::LqProblem& p) {
  LinearDynamics d;
  for (int t = 0; t + 1 < p.horizon; ++t) {
    d.fx.push_back(p.a);
    d.fu.push_back(p.b);
    d.fc.push_back(p.c);
    d.noise.push_back(SymmetricPD(p.process_cov + 1e-9 * Matrix::Identity(p.a.rows(), p.a.rows())));
  }
  d.initial_mean = p.x0_mean;
  d.initial_covariance = SymmetricPD(p.x0_cov);
  return d;
}

QuadraticCost exact_cost(const oracle::LqProblem& p) {
  const auto nx = p.a.rows(), nu = p.b.cols();
  QuadraticCost q;
  q.state_dim = static_cast<int>(nx);
  Matrix h = Matrix::Zero(nx + nu, nx + nu);
  h.topLeftCorner(nx, nx) = p.q;
  h.bottomRightCorner(nu, nu) = p.r;
  Vector lin = Vector::Zero(nx + nu);
  lin.head(nx) = -p.q * p.target;
  for (int t = 0; t < p.horizon; ++t) {
    q.hessians.push_back(h);
    q.linear.push_back(lin);
    q.constants.push_back(0.5 * p.target.dot(p.q * p.target));
  }
  return q;
}

TVLGPolicy unit_policy(int horizon, int nx = 2) {
  Vector v(1);
  v << 1.0;
  return TVLGPolicy::initial(horizon, nx, v);
}

oracle::LqProblem offset_problem() {
  oracle::LqProblem p = oracle::double_integrator(20);
  p.target << 0.5, 0.0;
  p.c << 0.0, -0.02;
  return p;
}

}  // namespace

TEST(Lqr, UnconstrainedMatchesRiccati) {
  const oracle::LqProblem p = offset_problem();
  const oracle::Feedback ref = oracle::riccati(p);
  const LqrResult res = lqr_backward_pass(exact_dynamics(p), exact_cost(p), unit_policy(p.horizon),
                                          std::numeric_limits<double>::infinity());
  EXPECT_EQ(res.eta, 0.0);
  for (int t = 0; t < p.horizon; ++t) {
    EXPECT_LT((res.policy.gains[t] - ref.k[t]).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((res.policy.offsets[t] - ref.f[t]).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Lqr, TinyEpsilonPinsThePolicy) {
  const oracle::LqProblem p = offset_problem();
  const TVLGPolicy prev = unit_policy(p.horizon);
  const LqrResult res = lqr_backward_pass(exact_dynamics(p), exact_cost(p), prev, 1e-12);
  for (int t = 0; t < p.horizon; ++t) {
    EXPECT_LT((res.policy.gains[t] - prev.gains[t]).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((res.policy.offsets[t] - prev.offsets[t]).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((res.policy.covariances[t].matrix() - prev.covariances[t].matrix()).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Lqr, KlBoundRespected) {
  const oracle::LqProblem p = offset_problem();
  for (double eps : {0.05, 0.5, 2.0}) {
    const LqrResult res = lqr_backward_pass(exact_dynamics(p), exact_cost(p), unit_policy(p.horizon), eps);
    EXPECT_LE(res.expected_kl, eps + 1e-6) << eps;
    double total = 0.0;
    for (double k : expected_kl(exact_dynamics(p), res.policy, unit_policy(p.horizon))) total += k;
    EXPECT_NEAR(total, res.expected_kl, 1e-9);
  }
}

TEST(Lqr, ExpectedKlMatchesMonteCarlo) {
  const oracle::LqProblem p = offset_problem();
  const LinearDynamics dyn = exact_dynamics(p);
  const TVLGPolicy prev = unit_policy(p.horizon);
  const TVLGPolicy next = lqr_backward_pass(dyn, exact_cost(p), prev, 1.0).policy;
  const std::vector<double> exact = expected_kl(dyn, next, prev);
  SeededRng r(3);
  std::vector<double> mc(p.horizon, 0.0);
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    Vector x = gaussian_sample(r, dyn.initial_mean, dyn.initial_covariance);
    for (int t = 0; t < p.horizon; ++t) {
      mc[t] += gaussian_kl(next.mean_action(t, x), next.covariances[t], prev.mean_action(t, x), prev.covariances[t]) / n;
      const Vector u = next.sample_action(t, x, r);
      if (t + 1 < p.horizon) x = gaussian_sample(r, dyn.fx[t] * x + dyn.fu[t] * u + dyn.fc[t], dyn.noise[t]);
    }
  }
  for (int t = 0; t < p.horizon; ++t) EXPECT_NEAR(mc[t] / exact[t], 1.0, 0.03) << "step " << t;
}

TEST(DynamicsFit, RecoversNoiselessLinearSystem) {
  oracle::LqProblem p = offset_problem();
  p.process_cov.setZero();
  p.x0_cov = Matrix::Identity(2, 2);
  const oracle::LqTask task(p);
  const QuadraticTrackingCost cost(p.q, p.r, p.target);
  SeededRng r(4);
  const auto rollouts = sample_rollouts(task, unit_policy(p.horizon), cost, 10, r);
  DynamicsFitOptions opts;
  opts.ridge = 0.0;
  const LinearDynamics d = fit_linear_dynamics(rollouts, opts);
  ASSERT_EQ(d.transitions(), p.horizon - 1);
  for (int t = 0; t < d.transitions(); ++t) {
    EXPECT_LT((d.fx[t] - p.a).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((d.fu[t] - p.b).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((d.fc[t] - p.c).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(DynamicsFit, DuplicatedRolloutsFitLikeTheOriginals) {
  const oracle::LqProblem p = offset_problem();
  const oracle::LqTask task(p);
  const QuadraticTrackingCost cost(p.q, p.r, p.target);
  SeededRng r(5);
  const auto rollouts = sample_rollouts(task, unit_policy(p.horizon), cost, 8, r);
  auto doubled = rollouts;
  doubled.insert(doubled.end(), rollouts.begin(), rollouts.end());
  DynamicsFitOptions opts;
  opts.ridge = 0.0;
  const LinearDynamics a = fit_linear_dynamics(rollouts, opts);
  const LinearDynamics b = fit_linear_dynamics(doubled, opts);
  for (int t = 0; t < a.transitions(); ++t) {
    EXPECT_LT((a.fx[t] - b.fx[t]).norm(), 1e-9);
    EXPECT_LT((a.noise[t].matrix() - b.noise[t].matrix()).norm(), 1e-12);
  }
}

TEST(DynamicsFit, RejectsSingleRollout) {
  const oracle::LqProblem p = offset_problem();
  const oracle::LqTask task(p);
  const QuadraticTrackingCost cost(p.q, p.r, p.target);
  SeededRng r(6);
  EXPECT_ANY_THROW(fit_linear_dynamics(sample_rollouts(task, unit_policy(p.horizon), cost, 1, r)));
}

namespace {

// Arm joints only, for the one-step prediction check.
class ArmJointsTask : public TaskEnv {
 public:
  explicit ArmJointsTask(const ArmEnv& env) : env_(&env) {}
  int state_dim() const override { return 6; }
  int action_dim() const override { return 3; }
  int horizon() const override { return 30; }
  std::unique_ptr<Episode> start(SeededRng& rng) const override {
    struct Ep : Episode {
      const ArmEnv* env;
      ArmState s;
      Vector state() const override {
        Vector x(6);
        x << s.q, s.qd;
        return x;
      }
      void step(const Vector& u, SeededRng& r) override { s = env->step(s, u, &r).state; }
    };
    auto e = std::make_unique<Ep>();
    e->env = env_;
    e->s = env_->rest_state();
    for (int i = 0; i < 3; ++i) e->s.q[i] += 0.05 * rng.normal();
    return e;
  }

 private:
  const ArmEnv* env_;
};

class ZeroCost : public CostModel {
 public:
  double cost(int, const Vector&, const Vector&) const override { return 0.0; }
};

}  // namespace

TEST(DynamicsFit, ArmOneStepPredictionNearNoiseFloor) {
  const PouringWorld world{PouringConfig{}};
  const ArmEnv env(ArmEnvConfig{}, world);
  const ArmJointsTask task(env);
  Vector var = Vector::Constant(3, 0.5);
  const TVLGPolicy policy = TVLGPolicy::initial(30, 6, var);
  SeededRng r(7);
  const ZeroCost cost;
  DynamicsFitOptions opts;
  opts.prior_strength = 5.0;
  const LinearDynamics d = fit_linear_dynamics(sample_rollouts(task, policy, cost, 10, r), opts);
  const auto held_out = sample_rollouts(task, policy, cost, 10, r);
  double sq = 0.0;
  int count = 0;
  for (const auto& tr : held_out) {
    for (int t = 0; t + 1 < tr.horizon(); ++t) {
      const Vector pred = d.fx[t] * tr.states.col(t) + d.fu[t] * tr.actions.col(t) + d.fc[t];
      sq += (pred.tail(3) - tr.states.col(t + 1).tail(3)).squaredNorm();
      count += 3;
    }
  }
  const double floor = env.config().process_noise * std::sqrt(env.config().dt);
  EXPECT_LT(std::sqrt(sq / count), 2.0 * floor);
}

TEST(Quadratize, RecoversQuadraticCostExactly) {
  const oracle::LqProblem p = offset_problem();
  const QuadraticTrackingCost cost(p.q, p.r, p.target);
  SeededRng r(8);
  const Matrix xs = oracle::random_matrix(r, 2, p.horizon), us = oracle::random_matrix(r, 1, p.horizon);
  const QuadraticCost q = quadratize_cost(cost, xs, us);
  const QuadraticCost ref = exact_cost(p);
  for (int t = 0; t < p.horizon; ++t) {
    EXPECT_LT((q.hessians[t] - ref.hessians[t]).norm(), 1e-10);
    EXPECT_LT((q.linear[t] - ref.linear[t]).norm(), 1e-10);
    const Vector x = r.normal_vector(2), u = r.normal_vector(1);
    EXPECT_NEAR(q.evaluate(t, x, u), cost.cost(t, x, u), 1e-10);
  }
}

TEST(Quadratize, EmbeddingCostStationaryAtDemo) {
  SeededRng r(9);
  DemoEmbedding demo{oracle::random_matrix(r, 4, 3)};
  const EmbeddingTrackingCost cost(demo, RewardParams{}, 2);
  Vector x(6);
  x << 0.3, -0.2, demo.frames.col(1);
  Vector g;
  Matrix h;
  cost.expand(1, x, Vector::Zero(2), g, h);
  EXPECT_LT(g.segment(2, 4).norm(), 1e-12);
  EXPECT_EQ(g.head(2).norm(), 0.0);
}

TEST(Quadratize, TaylorRemainderIsThirdOrder) {
  SeededRng r(10);
  DemoEmbedding demo{oracle::random_matrix(r, 4, 2)};
  const EmbeddingTrackingCost cost(demo, RewardParams{}, 0);
  const Vector x = r.normal_vector(4), u = r.normal_vector(2);
  Matrix xs(4, 2), us(2, 2);
  xs << x, x;
  us << u, u;
  const QuadraticCost q = quadratize_cost(cost, xs, us);
  const Vector dx = r.normal_vector(4), du = r.normal_vector(2);
  auto remainder = [&](double s) { return std::abs(q.evaluate(0, x + s * dx, u + s * du) - cost.cost(0, x + s * dx, u + s * du)); };
  for (double s : {0.2, 0.1, 0.05}) {
    const double ratio = remainder(s) / remainder(s / 2);
    EXPECT_GT(ratio, 6.0) << s;
    EXPECT_LT(ratio, 10.0) << s;
  }
}

TEST(Pi2Weights, IdenticalResidualsGiveUniformWeights) {
  const Vector w = pi2_weights(Vector::Constant(10, 3.5), 0.5, 1e-3);
  EXPECT_LT((w - Vector::Constant(10, 0.1)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Pi2Weights, EffectiveSampleSizeAndDominance) {
  SeededRng r(11);
  const Vector s = r.normal_vector(20).cwiseAbs() * 10.0;
  const Vector w = pi2_weights(s, 0.5, 1e-6);
  EXPECT_NEAR(w.sum(), 1.0, 1e-12);
  EXPECT_NEAR(1.0 / w.squaredNorm(), 10.0, 1e-3);
  Vector dom = Vector::Constant(10, 100.0);
  dom[3] = -1e6;
  const Vector wd = pi2_weights(dom, 0.5, 1e-3);
  EXPECT_EQ(std::distance(wd.data(), std::max_element(wd.data(), wd.data() + wd.size())), 3);
  Vector bad = Vector::Zero(4);
  bad[1] = std::nan("");
  EXPECT_THROW(pi2_weights(bad, 0.5, 1e-3), NumericError);
}

TEST(Pi2Update, UniformWeightsLeaveOffsetsUnchanged) {
  const oracle::LqProblem p = offset_problem();
  const oracle::LqTask task(p);
  const QuadraticTrackingCost cost(p.q, p.r, p.target);
  SeededRng r(12);
  const TVLGPolicy policy = unit_policy(p.horizon);
  const auto rollouts = sample_rollouts(task, policy, cost, 10, r);
  CostToGoSamples s;
  s.total = Matrix::Ones(10, p.horizon);
  s.model = Matrix::Zero(10, p.horizon);
  s.residual = Matrix::Ones(10, p.horizon);
  const Pi2Result res = pi2_update(policy, s, rollouts);
  for (int t = 0; t < p.horizon; ++t) EXPECT_LT((res.policy.offsets[t] - policy.offsets[t]).norm(), 1e-12);
  EXPECT_LT(res.correction_norm, 1e-12);
}

TEST(Pi2Update, CorrectionIsCenteredWeightedNoise) {
  const oracle::LqProblem p = offset_problem();
  const oracle::LqTask task(p);
  const QuadraticTrackingCost cost(p.q, p.r, p.target);
  SeededRng r(13);
  const TVLGPolicy policy = unit_policy(p.horizon);
  const auto rollouts = sample_rollouts(task, policy, cost, 10, r);
  CostToGoSamples s;
  s.total = Matrix::Constant(10, p.horizon, 50.0);
  s.model = Matrix::Zero(10, p.horizon);
  s.residual = s.total;
  s.residual.row(4).setConstant(-1e6);
  const Pi2Result res = pi2_update(policy, s, rollouts);
  for (int t = 0; t < p.horizon; ++t) {
    const Vector w = res.weights.col(t);
    EXPECT_EQ(std::distance(w.data(), std::max_element(w.data(), w.data() + w.size())), 4);
    double expected = 0.0;
    for (int k = 0; k < 10; ++k) expected += (w[k] - 0.1) * rollouts[k].actions(0, t);
    EXPECT_NEAR(res.policy.offsets[t][0] - policy.offsets[t][0], expected, 1e-12);
  }
}

TEST(Rollout, ZeroGainZeroNoiseAtFixedPointIsConstant) {
  oracle::LqProblem p = oracle::double_integrator(15);
  p.x0_mean.setZero();
  p.x0_cov.setZero();
  p.process_cov.setZero();
  const oracle::LqTask task(p);
  const QuadraticTrackingCost cost(p.q, p.r, p.target);
  Vector tiny(1);
  tiny << 1e-300;
  TVLGPolicy policy = TVLGPolicy::initial(15, 2, tiny);
  SeededRng r(14);
  const Trajectory tr = rollout(task, policy, cost, r, true);
  EXPECT_EQ(tr.states.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(tr.actions.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Rollout, EmpiricalActionCovarianceMatchesPolicy) {
  const oracle::LqProblem p = offset_problem();
  const oracle::LqTask task(p);
  const QuadraticTrackingCost cost(p.q, p.r, p.target);
  TVLGPolicy policy = lqr_backward_pass(exact_dynamics(p), exact_cost(p), unit_policy(p.horizon), 1.0).policy;
  SeededRng r(15);
  const int t = 7;
  double sum = 0.0, sq = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const Trajectory tr = rollout(task, policy, cost, r);
    const double e = tr.actions(0, t) - policy.mean_action(t, tr.states.col(t))[0];
    sum += e;
    sq += e * e;
  }
  const double var = sq / n - (sum / n) * (sum / n);
  EXPECT_NEAR(var / policy.covariances[t].matrix()(0, 0), 1.0, 0.05);
}

TEST(Rollout, HorizonMismatchThrows) {
  const oracle::LqTask task(oracle::double_integrator(10));
  const QuadraticTrackingCost cost(Matrix::Identity(2, 2), Matrix::Identity(1, 1), Vector::Zero(2));
  SeededRng r(16);
  EXPECT_THROW(rollout(task, unit_policy(9), cost, r), HorizonError);
}

TEST(Policy, JsonRoundTrip) {
  const oracle::LqProblem p = offset_problem();
  const TVLGPolicy policy =
      lqr_backward_pass(exact_dynamics(p), exact_cost(p), unit_policy(p.horizon), 0.7).policy;
  const TVLGPolicy back = TVLGPolicy::from_json(nlohmann::json::parse(policy.to_json().dump()));
  ASSERT_EQ(back.horizon(), policy.horizon());
  for (int t = 0; t < p.horizon; ++t) {
    EXPECT_EQ(back.gains[t], policy.gains[t]);
    EXPECT_EQ(back.offsets[t], policy.offsets[t]);
    EXPECT_EQ(back.covariances[t].matrix(), policy.covariances[t].matrix());
  }
  nlohmann::json bad = policy.to_json();
  bad["format"] = "other";
  EXPECT_ANY_THROW(TVLGPolicy::from_json(bad));
}

TEST(Pilqr, LinearQuadraticModelExactRegime) {
  const oracle::LqProblem p = oracle::double_integrator(20);
  const oracle::LqTask task(p);
  const QuadraticTrackingCost cost(p.q, p.r, p.target);
  PilqrConfig cfg;
  cfg.kl_epsilon = 1.0;
  PilqrLearner learner(task, cost, unit_policy(p.horizon), cfg, 3);
  const double start = oracle::expected_cost(p, learner.policy());
  for (int i = 0; i < 8; ++i) {
    const IterationMetrics m = learner.step();
    EXPECT_LE(m.kl, m.epsilon + 1e-6);
    EXPECT_LE(m.pi2_correction_norm, 1e-3 * m.lqr_step_norm + 1e-12);
    EXPECT_LT(m.residual_rms, 1e-6);
  }
  EXPECT_LT(oracle::expected_cost(p, learner.policy()), 0.5 * start);
}

TEST(Pilqr, ZeroIterationsEchoesInitialPolicy) {
  const oracle::LqProblem p = oracle::double_integrator(10);
  const oracle::LqTask task(p);
  const QuadraticTrackingCost cost(p.q, p.r, p.target);
  const TVLGPolicy init = unit_policy(p.horizon);
  PilqrLearner learner(task, cost, init, PilqrConfig{}, 3);
  const auto rows = learner.run(0);
  EXPECT_EQ(rows.size(), 1u);
  EXPECT_EQ(learner.policy().offsets[3], init.offsets[3]);
  EXPECT_EQ(learner.policy().covariances[3].matrix(), init.covariances[3].matrix());
}

TEST(ArmTask, StateCarriesEmbedding) {
  const PouringWorld world{PouringConfig{}};
  SeededRng r(17);
  const EmbeddingNet net = make_embedding_net(64, r, {16}, 8);
  const ArmPouringTask task(world, ArmTaskConfig{}, net, 12);
  EXPECT_EQ(task.state_dim(), 6 + 8);
  auto ep = task.start(r);
  const Vector x = ep->state();
  EXPECT_NEAR(x.segment(ArmPouringTask::kEmbeddingOffset, 8).norm(), 1.0, 1e-12);
  const TVLGPolicy init = initial_arm_policy(12, task.state_dim(), 0.5, 4.0, 2);
  EXPECT_DOUBLE_EQ(init.covariances[0].matrix()(2, 2), 2.0);
  EXPECT_DOUBLE_EQ(init.covariances[0].matrix()(0, 0), 0.5);
}
