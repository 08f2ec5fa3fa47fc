#include "tcn/reward.hpp"

#include <cmath>

namespace tcn {
namespace {

void check_pair(const Vector& v, const Vector& w) {
  if (v.size() != w.size()) {
    throw DimensionError("tcn_reward: embedding sizes differ (" + std::to_string(v.size()) + " vs " +
                         std::to_string(w.size()) + ")");
  }
}

}  // namespace

void RewardParams::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw std::invalid_argument("RewardParams: alpha and beta must be >= 0");
  if (!(gamma > 0.0)) throw std::invalid_argument("RewardParams: gamma must be > 0");
  if (!(action_weight >= 0.0)) throw std::invalid_argument("RewardParams: action weight must be >= 0");
}

DemoEmbedding embed_demonstration(const EmbeddingNet& net, const Matrix& frames) {
  if (frames.rows() != net.input_dim()) {
    throw DimensionError("embed_demonstration: frame dim " + std::to_string(frames.rows()) +
                         " does not match net input " + std::to_string(net.input_dim()));
  }
  return DemoEmbedding{net.forward(frames)};
}

double tcn_reward(const Vector& v, const Vector& w, const RewardParams& params) {
  check_pair(v, w);
  const double d2 = (w - v).squaredNorm();
  return -params.alpha * d2 - params.beta * std::sqrt(params.gamma + d2);
}

Vector tcn_reward_gradient(const Vector& v, const Vector& w, const RewardParams& params) {
  check_pair(v, w);
  const Vector diff = w - v;
  const double root = std::sqrt(params.gamma + diff.squaredNorm());
  return -(2.0 * params.alpha + params.beta / root) * diff;
}

Matrix tcn_reward_hessian(const Vector& v, const Vector& w, const RewardParams& params) {
  check_pair(v, w);
  const Vector diff = w - v;
  const double root = std::sqrt(params.gamma + diff.squaredNorm());
  const auto n = diff.size();
  return -(2.0 * params.alpha + params.beta / root) * Matrix::Identity(n, n) +
         (params.beta / (root * root * root)) * diff * diff.transpose();
}

Vector trajectory_cost(const DemoEmbedding& demo, const Matrix& rollout_embeddings,
                       const Matrix& actions, const RewardParams& params) {
  const int horizon = demo.horizon();
  if (rollout_embeddings.cols() != horizon || actions.cols() != horizon) {
    throw HorizonError("trajectory_cost: rollout has " + std::to_string(rollout_embeddings.cols()) +
                       " frames and " + std::to_string(actions.cols()) +
                       " actions, demonstration horizon is " + std::to_string(horizon));
  }
  Vector c(horizon);
  for (int t = 0; t < horizon; ++t) {
    c[t] = -tcn_reward(demo.frames.col(t), rollout_embeddings.col(t), params) +
           params.action_weight * actions.col(t).squaredNorm();
  }
  return c;
}

Vector trajectory_cost(const DemoEmbedding& demo, const Matrix& rollout_observations,
                       const EmbeddingNet& net, const Matrix& actions, const RewardParams& params) {
  if (rollout_observations.cols() != demo.horizon()) {
    throw HorizonError("trajectory_cost: rollout has " + std::to_string(rollout_observations.cols()) +
                       " observations, demonstration horizon is " + std::to_string(demo.horizon()));
  }
  return trajectory_cost(demo, net.forward(rollout_observations), actions, params);
}

void save_demo_embedding(const std::string& path, const DemoEmbedding& demo,
                         const std::string& config_hash) {
  Checkpoint c;
  c.tensors["demo_embedding"] = demo.frames;
  c.config_hash = config_hash;
  save_checkpoint(path, c);
}

DemoEmbedding load_demo_embedding(const std::string& path) {
  const Checkpoint c = load_checkpoint(path);
  const auto it = c.tensors.find("demo_embedding");
  if (it == c.tensors.end()) throw std::runtime_error("load_demo_embedding: '" + path + "' has no demo_embedding tensor");
  return DemoEmbedding{it->second};
}

}  // namespace tcn
