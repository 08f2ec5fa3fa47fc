#pragma once

#include "tcn/envsim.hpp"
#include "tcn/mlp.hpp"

#include <string>

namespace tcn {

// Two fully-connected layers on the embedding: d → 128 → 8 (normalized joints).
using JointsDecoder = Mlp;

JointsDecoder make_joints_decoder(int embedding_dim, SeededRng& rng, int hidden = 128);

struct SupervisionConfig {
  bool time_contrastive = false;
  bool self = false;
  bool human = false;
  double human_label_noise = 0.1;  // label σ as a fraction of each joint's range
  bool fine_tune = false;          // keep training the TC embedding with the decoder
  int steps = 2000;
  int batch_size = 64;
  int decoder_hidden = 128;
  AdamSettings adam;

  // At least one regression signal; TC alone gives no decoder targets.
  void validate() const;
  // e.g. "TC + Human + Self"
  std::string name() const;
  // True when the embedding is updated during decoder training.
  bool trains_embedding() const { return !time_contrastive || fine_tune; }
};

SupervisionConfig parse_supervision(const std::string& spec);

// Observations (D × N) with the joints they depict or imitate (8 × N).
struct RegressionSet {
  Matrix observations;
  Matrix joints;
  int size() const { return static_cast<int>(observations.cols()); }
};

struct NoisyHumanLabels {
  RegressionSet data;  // joints already perturbed
  double noise_level = 0.0;
};

NoisyHumanLabels make_noisy_human_labels(const RegressionSet& clean, double noise_level,
                                         const JointRanges& ranges, SeededRng& rng);

Matrix normalize_joints(const Matrix& joints, const JointRanges& ranges);
Matrix denormalize_joints(const Matrix& normalized, const JointRanges& ranges);

struct PoseModel {
  EmbeddingNet net;
  JointsDecoder decoder;
  JointRanges ranges;
};

// Mean over samples of ‖decoder(net(x)) − ĵ‖², ĵ = normalized target joints.
double pose_regression_loss(const EmbeddingNet& net, const JointsDecoder& decoder, const Matrix& observations,
                            const Matrix& normalized_targets, MlpGradients* net_grads = nullptr,
                            MlpGradients* decoder_grads = nullptr);

// `net` is the TC embedding when config.time_contrastive is set, otherwise a fresh
// network trained end-to-end with the decoder.
PoseModel train_decoder(EmbeddingNet net, const SupervisionConfig& config, const RegressionSet* self_data,
                        const NoisyHumanLabels* human_data, const JointRanges& ranges, std::uint64_t seed);

// Joint vector for one observation, clamped to the declared ranges.
Vector imitate(const PoseModel& model, const Vector& observation);
Matrix imitate(const PoseModel& model, const Matrix& observations);

struct JointErrorReport {
  Vector per_joint;  // percent of range
  double mean = 0.0;
  double mean_excluding = 0.0;
  int excluded_joint = 0;
};

JointErrorReport joint_error(const Matrix& predictions, const Matrix& targets, const JointRanges& ranges,
                             int excluded_joint = 0);

// Exact expected joint_error of predictions uniform within the ranges.
JointErrorReport random_joint_error_expectation(const Matrix& targets, const JointRanges& ranges,
                                                int excluded_joint = 0);

// Monte-Carlo version of the same baseline.
JointErrorReport random_joint_baseline(const Matrix& targets, const JointRanges& ranges, SeededRng& rng,
                                       int draws = 1, int excluded_joint = 0);

}  // namespace tcn
