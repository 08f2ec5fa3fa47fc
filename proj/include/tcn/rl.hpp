#pragma once

#include "tcn/numerics.hpp"
#include "tcn/reward.hpp"

#include <nlohmann/json_fwd.hpp>

#include <limits>
#include <memory>
#include <vector>

namespace tcn {

// u_t ~ N(K_t x_t + k_t, Σ_t), t = 0 … T−1.
struct TVLGPolicy {
  std::vector<Matrix> gains;
  std::vector<Vector> offsets;
  std::vector<SymmetricPD> covariances;

  int horizon() const { return static_cast<int>(gains.size()); }
  int state_dim() const { return gains.empty() ? 0 : static_cast<int>(gains[0].cols()); }
  int action_dim() const { return gains.empty() ? 0 : static_cast<int>(gains[0].rows()); }

  void validate() const;
  Vector mean_action(int t, const Vector& x) const;
  Vector sample_action(int t, const Vector& x, SeededRng& rng) const;

  // K = 0, k = 0, Σ = diag(action_variance).
  static TVLGPolicy initial(int horizon, int state_dim, const Vector& action_variance);

  nlohmann::json to_json() const;
  static TVLGPolicy from_json(const nlohmann::json& j);
};

struct Trajectory {
  Matrix states;   // n_x × T
  Matrix actions;  // n_u × T
  Vector costs;    // T
  double success = std::numeric_limits<double>::quiet_NaN();

  int horizon() const { return static_cast<int>(states.cols()); }
  double total_cost() const { return costs.sum(); }
};

class Episode {
 public:
  virtual ~Episode() = default;
  virtual Vector state() const = 0;
  virtual void step(const Vector& action, SeededRng& rng) = 0;
  // Evaluation-only task metric; NaN when the task has none.
  virtual double success() const { return std::numeric_limits<double>::quiet_NaN(); }
};

class TaskEnv {
 public:
  virtual ~TaskEnv() = default;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual int horizon() const = 0;
  virtual std::unique_ptr<Episode> start(SeededRng& rng) const = 0;
};

class CostModel {
 public:
  virtual ~CostModel() = default;
  virtual double cost(int t, const Vector& x, const Vector& u) const = 0;
  // Gradient and Hessian over z = [x; u]; central finite differences unless overridden.
  virtual void expand(int t, const Vector& x, const Vector& u, Vector& gradient, Matrix& hessian) const;
};

// ½(x − x*)ᵀQ(x − x*) + ½uᵀRu
class QuadraticTrackingCost : public CostModel {
 public:
  QuadraticTrackingCost(Matrix q, Matrix r, Vector target);
  double cost(int t, const Vector& x, const Vector& u) const override;
  void expand(int t, const Vector& x, const Vector& u, Vector& gradient, Matrix& hessian) const override;

 private:
  Matrix q_, r_;
  Vector target_;
};

// −R(v_t, w) + λ‖u‖², where w = x.segment(offset, d) is the embedding part of the state.
class EmbeddingTrackingCost : public CostModel {
 public:
  EmbeddingTrackingCost(DemoEmbedding demo, RewardParams params, int embedding_offset);
  double cost(int t, const Vector& x, const Vector& u) const override;
  void expand(int t, const Vector& x, const Vector& u, Vector& gradient, Matrix& hessian) const override;
  const DemoEmbedding& demo() const { return demo_; }

 private:
  DemoEmbedding demo_;
  RewardParams params_;
  int offset_;
};

// Samples one trajectory (costs filled from `cost`). With mean_actions the policy noise is
// skipped; environment noise still comes from `rng`.
Trajectory rollout(const TaskEnv& env, const TVLGPolicy& policy, const CostModel& cost, SeededRng& rng,
                   bool mean_actions = false);

// n rollouts on independent child streams of `rng`, possibly in parallel.
std::vector<Trajectory> sample_rollouts(const TaskEnv& env, const TVLGPolicy& policy,
                                        const CostModel& cost, int n, SeededRng& rng);

// x_{t+1} = F_x x_t + F_u u_t + f_c + w_t, w_t ~ N(0, W_t), t = 0 … T−2.
struct LinearDynamics {
  std::vector<Matrix> fx;
  std::vector<Matrix> fu;
  std::vector<Vector> fc;
  std::vector<SymmetricPD> noise;
  Vector initial_mean;
  SymmetricPD initial_covariance = SymmetricPD::identity(1);

  int transitions() const { return static_cast<int>(fx.size()); }
};

/// Regressors too ill-conditioned to fit even after the ridge.
class ConditioningError : public NumericError {
 public:
  using NumericError::NumericError;
};

struct DynamicsFitOptions {
  double ridge = 1e-6;
  // Pseudo-count of a time-pooled Gaussian prior on the per-step statistics; 0 = plain
  // per-timestep least squares.
  double prior_strength = 0.0;
  double max_condition = 1e14;
};

LinearDynamics fit_linear_dynamics(const std::vector<Trajectory>& rollouts,
                                   const DynamicsFitOptions& options = {});

// Per-step c_t(z) ≈ ½ zᵀ H_t z + h_tᵀ z + c_t in absolute coordinates z = [x; u].
struct QuadraticCost {
  int state_dim = 0;
  std::vector<Matrix> hessians;
  std::vector<Vector> linear;
  std::vector<double> constants;

  int horizon() const { return static_cast<int>(hessians.size()); }
  double evaluate(int t, const Vector& x, const Vector& u) const;
};

QuadraticCost quadratize_cost(const CostModel& cost, const Matrix& nominal_states,
                              const Matrix& nominal_actions, double action_eigen_floor = 1e-6);

struct LqrOptions {
  double eta_min = 1e-6;
  double eta_max = 1e6;
  int max_bisection = 50;
  double accept_fraction = 0.9;
};

struct LqrResult {
  TVLGPolicy policy;
  double eta = 0.0;
  double expected_kl = 0.0;
  std::vector<double> kl_per_step;
  bool constraint_active = false;
  bool pinned = false;  // no η in the bracket satisfied the bound; previous policy kept
  int bisection_iterations = 0;
};

// Backward pass with the KL penalty weighted by η. η = 0 gives the plain Riccati
// controller (Σ_t = Q_uu⁻¹); η > 0 gives Σ_t = η Q̃_uu⁻¹.
TVLGPolicy lqr_solve(const LinearDynamics& dynamics, const QuadraticCost& cost,
                     const TVLGPolicy& previous, double eta);

// Per-step E_x[KL(p_new(u|x) ‖ p_old(u|x))] with x propagated under `dynamics` and `next`.
std::vector<double> expected_kl(const LinearDynamics& dynamics, const TVLGPolicy& next,
                                const TVLGPolicy& previous);

// ε = +∞ disables the constraint.
LqrResult lqr_backward_pass(const LinearDynamics& dynamics, const QuadraticCost& cost,
                            const TVLGPolicy& previous, double kl_epsilon, const LqrOptions& options = {});

// Cost-to-go per rollout and step (N × T): actual S, quadratic-model Ŝ, residual S̃.
struct CostToGoSamples {
  Matrix total;
  Matrix model;
  Matrix residual;

  static CostToGoSamples build(const std::vector<Trajectory>& rollouts, const QuadraticCost& model);
};

struct Pi2Options {
  double ess_fraction = 0.5;
  bool update_covariance = false;
  // Lower bound on the temperature as a fraction of the mean |S| at that step.
  double temperature_floor = 1e-3;
};

struct Pi2Result {
  TVLGPolicy policy;
  Matrix weights;  // N × T
  Vector temperatures;
  double correction_norm = 0.0;
};

// Normalized weights ∝ exp(−s̃_r / η) with η chosen so that the effective sample size
// is ess_fraction · N (subject to the floor). All-equal residuals give uniform weights.
Vector pi2_weights(const Vector& residuals, double ess_fraction, double min_temperature,
                   double* temperature = nullptr);

Pi2Result pi2_update(const TVLGPolicy& policy, const CostToGoSamples& samples,
                     const std::vector<Trajectory>& rollouts, const Pi2Options& options = {});

struct PilqrConfig {
  int rollouts = 10;
  double kl_epsilon = 1.0;
  bool use_pi2 = true;
  int max_pi2_backtracks = 10;
  DynamicsFitOptions fit;
  LqrOptions lqr;
  Pi2Options pi2;
};

struct IterationMetrics {
  int iteration = 0;
  double mean_cost = 0.0;
  double min_cost = 0.0;
  double std_cost = 0.0;
  double kl = 0.0;
  double epsilon = 0.0;
  double eta = 0.0;
  double residual_rms = 0.0;
  double lqr_step_norm = 0.0;
  double pi2_correction_norm = 0.0;
  double success_mean = std::numeric_limits<double>::quiet_NaN();
  double success_std = std::numeric_limits<double>::quiet_NaN();
  bool epsilon_halved = false;
};

struct PilqrStep {
  TVLGPolicy policy;
  IterationMetrics metrics;
  std::vector<Trajectory> rollouts;
};

// One full iteration from the rollouts of `policy`: fit → quadratize → LQR → PI².
PilqrStep pilqr_iteration(const TaskEnv& env, const TVLGPolicy& policy, const CostModel& cost,
                          const PilqrConfig& config, double kl_epsilon, SeededRng& rng);

// Iterates PILQR, halving ε after two consecutive increases of the mean cost.
class PilqrLearner {
 public:
  PilqrLearner(const TaskEnv& env, const CostModel& cost, TVLGPolicy initial, PilqrConfig config,
               std::uint64_t seed);

  // Runs one update and returns the metrics of the rollouts it was computed from.
  IterationMetrics step();
  // Rollout statistics of the current policy without updating it.
  IterationMetrics evaluate();
  // `iterations` updates followed by an evaluation: iterations + 1 rows.
  std::vector<IterationMetrics> run(int iterations);

  const TVLGPolicy& policy() const { return policy_; }
  double epsilon() const { return epsilon_; }
  int iteration() const { return iteration_; }

 private:
  void record_cost(IterationMetrics& m);

  const TaskEnv* env_;
  const CostModel* cost_;
  TVLGPolicy policy_;
  PilqrConfig config_;
  SeededRng rng_;
  double epsilon_;
  int iteration_ = 0;
  int increases_ = 0;
  double last_mean_ = std::numeric_limits<double>::quiet_NaN();
};

// Mean/min/std of rollout costs and the success statistics.
IterationMetrics summarize_rollouts(const std::vector<Trajectory>& rollouts);

}  // namespace tcn
