#include "tcn/imitation.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace tcn {

JointsDecoder make_joints_decoder(int embedding_dim, SeededRng& rng, int hidden) {
  return Mlp::random({embedding_dim, hidden, kNumJoints}, false, rng);
}

void SupervisionConfig::validate() const {
  if (!self && !human) {
    throw std::invalid_argument(time_contrastive
                                    ? "supervision: TC alone has no regression targets; add Self and/or Human"
                                    : "supervision: empty supervision set");
  }
  if (!(human_label_noise > 0.0)) throw std::invalid_argument("supervision: human label noise must be > 0");
  if (steps < 0 || batch_size <= 0) throw std::invalid_argument("supervision: bad step/batch settings");
}

std::string SupervisionConfig::name() const {
  std::vector<std::string> parts;
  if (time_contrastive) parts.emplace_back("TC");
  if (human) parts.emplace_back("Human");
  if (self) parts.emplace_back("Self");
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? " + " : "") + parts[i];
  return out.empty() ? "none" : out;
}

SupervisionConfig parse_supervision(const std::string& spec) {
  SupervisionConfig c;
  std::stringstream ss(spec);
  std::string token;
  while (std::getline(ss, token, '+')) {
    token.erase(std::remove_if(token.begin(), token.end(), [](unsigned char ch) { return std::isspace(ch); }),
                token.end());
    std::transform(token.begin(), token.end(), token.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (token == "tc") {
      c.time_contrastive = true;
    } else if (token == "self") {
      c.self = true;
    } else if (token == "human") {
      c.human = true;
    } else if (!token.empty()) {
      throw std::invalid_argument("supervision: unknown signal '" + token + "' (expected TC, Self, Human)");
    }
  }
  return c;
}

NoisyHumanLabels make_noisy_human_labels(const RegressionSet& clean, double noise_level,
                                         const JointRanges& ranges, SeededRng& rng) {
  if (!(noise_level > 0.0)) throw std::invalid_argument("human labels: noise level must be > 0");
  NoisyHumanLabels out{clean, noise_level};
  const Vector w = ranges.width();
  for (Eigen::Index k = 0; k < out.data.joints.cols(); ++k) {
    for (Eigen::Index j = 0; j < out.data.joints.rows(); ++j) {
      out.data.joints(j, k) += noise_level * w[j] * rng.normal();
    }
  }
  return out;
}

Matrix normalize_joints(const Matrix& joints, const JointRanges& ranges) {
  const Vector w = ranges.width();
  Matrix out(joints.rows(), joints.cols());
  for (Eigen::Index k = 0; k < joints.cols(); ++k) {
    out.col(k) = (2.0 * (joints.col(k) - ranges.lower).array() / w.array() - 1.0).matrix();
  }
  return out;
}

Matrix denormalize_joints(const Matrix& normalized, const JointRanges& ranges) {
  const Vector w = ranges.width();
  Matrix out(normalized.rows(), normalized.cols());
  for (Eigen::Index k = 0; k < normalized.cols(); ++k) {
    out.col(k) = ranges.lower + (0.5 * (normalized.col(k).array() + 1.0) * w.array()).matrix();
  }
  return out;
}

double pose_regression_loss(const EmbeddingNet& net, const JointsDecoder& decoder, const Matrix& observations,
                            const Matrix& normalized_targets, MlpGradients* net_grads, MlpGradients* decoder_grads) {
  if (observations.cols() != normalized_targets.cols() || observations.cols() == 0) {
    throw DimensionError("pose_regression_loss: one target per observation required");
  }
  if (decoder.output_dim() != normalized_targets.rows()) {
    throw DimensionError("pose_regression_loss: decoder output does not match the joint count");
  }
  const auto emb = net.forward_cached(observations);
  const auto dec = decoder.forward_cached(emb.output);
  const Matrix diff = dec.output - normalized_targets;
  const double n = static_cast<double>(observations.cols());
  if (net_grads != nullptr || decoder_grads != nullptr) {
    Matrix emb_grad;
    MlpGradients dg = decoder.backward(dec, 2.0 * diff / n, net_grads != nullptr ? &emb_grad : nullptr);
    if (decoder_grads != nullptr) *decoder_grads = std::move(dg);
    if (net_grads != nullptr) *net_grads = net.backward(emb, emb_grad);
  }
  return diff.squaredNorm() / n;
}

PoseModel train_decoder(EmbeddingNet net, const SupervisionConfig& config, const RegressionSet* self_data,
                        const NoisyHumanLabels* human_data, const JointRanges& ranges, std::uint64_t seed) {
  config.validate();
  if (config.self && (self_data == nullptr || self_data->size() == 0)) {
    throw std::invalid_argument("train_decoder: Self supervision enabled without robot data");
  }
  if (config.human && (human_data == nullptr || human_data->data.size() == 0)) {
    throw std::invalid_argument("train_decoder: Human supervision enabled without labeled human data");
  }
  SeededRng root(seed);
  SeededRng init = root.fork(1);
  SeededRng sampler = root.fork(2);
  JointsDecoder decoder = make_joints_decoder(net.output_dim(), init, config.decoder_hidden);
  PoseModel model{std::move(net), std::move(decoder), ranges};
  OptimizerState net_opt = make_optimizer(model.net, config.adam);
  OptimizerState dec_opt = make_optimizer(model.decoder, config.adam);

  struct Source {
    Matrix obs;
    Matrix targets;
  };
  std::vector<Source> sources;
  if (config.self) sources.push_back({self_data->observations, normalize_joints(self_data->joints, ranges)});
  if (config.human) sources.push_back({human_data->data.observations, normalize_joints(human_data->data.joints, ranges)});

  const bool train_net = config.trains_embedding();
  for (int step = 0; step < config.steps; ++step) {
    MlpGradients net_total = model.net.zero_gradients();
    MlpGradients dec_total = model.decoder.zero_gradients();
    for (const auto& src : sources) {
      Matrix x(src.obs.rows(), config.batch_size);
      Matrix y(src.targets.rows(), config.batch_size);
      for (int i = 0; i < config.batch_size; ++i) {
        const auto k = sampler.uniform_int(0, src.obs.cols() - 1);
        x.col(i) = src.obs.col(k);
        y.col(i) = src.targets.col(k);
      }
      MlpGradients ng, dg;
      pose_regression_loss(model.net, model.decoder, x, y, train_net ? &ng : nullptr, &dg);
      accumulate(dec_total, dg);
      if (train_net) accumulate(net_total, ng);
    }
    train_step(model.decoder, dec_opt, dec_total);
    if (train_net) train_step(model.net, net_opt, net_total);
  }
  return model;
}

Matrix imitate(const PoseModel& model, const Matrix& observations) {
  if (observations.rows() != model.net.input_dim()) {
    throw DimensionError("imitate: observation dim " + std::to_string(observations.rows()) +
                         " does not match net input " + std::to_string(model.net.input_dim()));
  }
  Matrix joints = denormalize_joints(model.decoder.forward(model.net.forward(observations)), model.ranges);
  for (Eigen::Index k = 0; k < joints.cols(); ++k) joints.col(k) = model.ranges.clamp(joints.col(k));
  return joints;
}

Vector imitate(const PoseModel& model, const Vector& observation) {
  return imitate(model, Matrix(observation)).col(0);
}

namespace {

JointErrorReport finish(Vector per_joint, int excluded) {
  JointErrorReport r;
  r.per_joint = std::move(per_joint);
  r.mean = r.per_joint.mean();
  r.excluded_joint = excluded;
  const auto n = r.per_joint.size();
  r.mean_excluding = n > 1 ? (r.per_joint.sum() - r.per_joint[excluded]) / static_cast<double>(n - 1) : r.mean;
  return r;
}

void check_ranges(const JointRanges& ranges, Eigen::Index joints, int excluded) {
  if (ranges.lower.size() != joints || ranges.upper.size() != joints) {
    throw DimensionError("joint_error: ranges do not match the joint count");
  }
  if ((ranges.width().array() <= 0.0).any()) throw std::invalid_argument("joint_error: zero-width joint range");
  if (excluded < 0 || excluded >= joints) throw std::invalid_argument("joint_error: excluded joint out of range");
}

}  // namespace

JointErrorReport joint_error(const Matrix& predictions, const Matrix& targets, const JointRanges& ranges,
                             int excluded_joint) {
  if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols() || targets.cols() == 0) {
    throw DimensionError("joint_error: predictions and targets differ in shape");
  }
  check_ranges(ranges, targets.rows(), excluded_joint);
  const Vector mean_abs = (predictions - targets).cwiseAbs().rowwise().mean();
  return finish(100.0 * mean_abs.cwiseQuotient(ranges.width()), excluded_joint);
}

JointErrorReport random_joint_error_expectation(const Matrix& targets, const JointRanges& ranges,
                                                int excluded_joint) {
  check_ranges(ranges, targets.rows(), excluded_joint);
  if (targets.cols() == 0) throw std::invalid_argument("random_joint_error_expectation: no targets");
  Vector per(targets.rows());
  for (Eigen::Index j = 0; j < targets.rows(); ++j) {
    const double w = ranges.upper[j] - ranges.lower[j];
    double sum = 0.0;
    for (Eigen::Index k = 0; k < targets.cols(); ++k) {
      // E|U − t| for U uniform on [lo, hi], t inside the range
      const double t = std::clamp(targets(j, k), ranges.lower[j], ranges.upper[j]);
      const double a = t - ranges.lower[j];
      const double b = ranges.upper[j] - t;
      sum += (a * a + b * b) / (2.0 * w * w);
    }
    per[j] = 100.0 * sum / static_cast<double>(targets.cols());
  }
  return finish(per, excluded_joint);
}

JointErrorReport random_joint_baseline(const Matrix& targets, const JointRanges& ranges, SeededRng& rng,
                                       int draws, int excluded_joint) {
  if (draws <= 0) throw std::invalid_argument("random_joint_baseline: draws must be positive");
  Vector total = Vector::Zero(targets.rows());
  for (int d = 0; d < draws; ++d) {
    Matrix pred(targets.rows(), targets.cols());
    for (Eigen::Index k = 0; k < targets.cols(); ++k) {
      for (Eigen::Index j = 0; j < targets.rows(); ++j) pred(j, k) = rng.uniform(ranges.lower[j], ranges.upper[j]);
    }
    total += joint_error(pred, targets, ranges, excluded_joint).per_joint;
  }
  return finish(total / static_cast<double>(draws), excluded_joint);
}

}  // namespace tcn
