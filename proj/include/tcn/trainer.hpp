#pragma once

#include "tcn/losses.hpp"
#include "tcn/mlp.hpp"
#include "tcn/sampling.hpp"
#include "tcn/sequence.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tcn {

enum class LossKind { kTriplet, kNpairs, kLifted, kShuffleLearn };
enum class SamplerKind { kMultiView, kSingleView };

LossKind parse_loss(const std::string& name);
const char* loss_name(LossKind kind);
SamplerKind parse_sampler(const std::string& name);
const char* sampler_name(SamplerKind kind);

struct TrainerConfig {
  LossKind loss = LossKind::kTriplet;
  SamplerKind sampler = SamplerKind::kMultiView;
  int steps = 3000;
  int batch_size = 32;
  int eval_every = 250;
  int checkpoint_every = 250;
  int validation_batches = 8;
  double triplet_margin = 0.2;
  double lifted_margin = kLiftedMargin;
  MultiViewSamplerOptions multiview;
  double positive_range = kDefaultPositiveRange;
  double negative_multiplier = kDefaultNegativeMultiplier;
  int shuffle_tmax = kShuffleLearnTmax;
  int shuffle_tmin = kShuffleLearnTmin;
  double shuffle_negative_ratio = kShuffleLearnNegativeRatio;
  int order_hidden = 64;
  std::vector<int> hidden{128, 64};
  int embedding_dim = 32;
  bool normalize = true;
  AdamSettings adam;
};

struct LossCurvePoint {
  long step = 0;
  double train_loss = 0.0;  // mean over the steps since the previous point
  double validation_loss = 0.0;
};

struct CheckpointSnapshot {
  long step = 0;
  double validation_loss = 0.0;
  EmbeddingNet net;
  std::optional<OrderHead> head;
};

struct TrainingResult {
  EmbeddingNet net;
  std::optional<OrderHead> head;
  double initial_validation_loss = 0.0;
  std::vector<LossCurvePoint> curve;
  std::vector<CheckpointSnapshot> checkpoints;
};

// Raised when an update diverges; carries the step at which it happened.
class TrainingDivergence : public DivergenceError {
 public:
  TrainingDivergence(long step, const DivergenceError& cause);
  long step() const { return step_; }

 private:
  long step_;
};

// Frames of one training batch stacked as `groups` blocks of equal width
// (triplet: anchors | positives | negatives; pairs: anchors | positives;
// shuffle-&-learn: first | middle | last of each tuple).
struct TrainingBatch {
  Matrix frames;
  int groups = 0;
  std::vector<int> labels;

  int size() const { return groups == 0 ? 0 : static_cast<int>(frames.cols()) / groups; }
};

TrainingBatch sample_training_batch(const std::vector<MultiViewSequence>& sequences,
                                    const TrainerConfig& config, SeededRng& rng);

// Loss of `batch`; when grads are requested they are accumulated for the net and head.
double batch_loss(const EmbeddingNet& net, const OrderHead* head, const TrainingBatch& batch,
                  const TrainerConfig& config, MlpGradients* net_grads = nullptr,
                  MlpGradients* head_grads = nullptr);

TrainingResult train_embedding(const std::vector<MultiViewSequence>& train,
                               const std::vector<MultiViewSequence>& validation,
                               const TrainerConfig& config, std::uint64_t seed);

// Mean loss over fixed validation batches drawn from `seed`.
double validation_loss(const EmbeddingNet& net, const OrderHead* head,
                       const std::vector<TrainingBatch>& batches, const TrainerConfig& config);

std::vector<TrainingBatch> fixed_batches(const std::vector<MultiViewSequence>& sequences,
                                         const TrainerConfig& config, int count, std::uint64_t seed);

}  // namespace tcn
