#pragma once

#include "tcn/mlp.hpp"
#include "tcn/numerics.hpp"

#include <stdexcept>
#include <string>

namespace tcn {

struct RewardParams {
  double alpha = 0.5;
  double beta = 1.0;
  double gamma = 1e-4;
  // Quadratic action penalty added to the RL cost.
  double action_weight = 1e-3;

  void validate() const;
};

/// Rollout length differs from the demonstration horizon.
class HorizonError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Per-frame embeddings of a single-view demonstration (d × T).
struct DemoEmbedding {
  Matrix frames;
  int horizon() const { return static_cast<int>(frames.cols()); }
};

DemoEmbedding embed_demonstration(const EmbeddingNet& net, const Matrix& frames);

// R(v, w) = −α‖w − v‖² − β √(γ + ‖w − v‖²)
double tcn_reward(const Vector& v, const Vector& w, const RewardParams& params);

// ∂R/∂w
Vector tcn_reward_gradient(const Vector& v, const Vector& w, const RewardParams& params);

// ∂²R/∂w²
Matrix tcn_reward_hessian(const Vector& v, const Vector& w, const RewardParams& params);

// c_t = −R(v_t, w_t) + λ‖u_t‖², with W the rollout's robot-view embeddings and U its actions.
Vector trajectory_cost(const DemoEmbedding& demo, const Matrix& rollout_embeddings,
                       const Matrix& actions, const RewardParams& params);

// Same, embedding raw rollout observations with `net` first.
Vector trajectory_cost(const DemoEmbedding& demo, const Matrix& rollout_observations,
                       const EmbeddingNet& net, const Matrix& actions, const RewardParams& params);

void save_demo_embedding(const std::string& path, const DemoEmbedding& demo,
                         const std::string& config_hash);
DemoEmbedding load_demo_embedding(const std::string& path);

}  // namespace tcn
