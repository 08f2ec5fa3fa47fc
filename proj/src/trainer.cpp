#include "tcn/trainer.hpp"

#include <sstream>

namespace tcn {
namespace {

const MultiViewSequence& pick(const std::vector<MultiViewSequence>& seqs, SeededRng& rng) {
  return seqs[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(seqs.size()) - 1))];
}

}  // namespace

LossKind parse_loss(const std::string& name) {
  if (name == "triplet") return LossKind::kTriplet;
  if (name == "npairs") return LossKind::kNpairs;
  if (name == "lifted") return LossKind::kLifted;
  if (name == "shuffle-learn") return LossKind::kShuffleLearn;
  throw std::invalid_argument("unknown loss '" + name + "' (expected triplet|npairs|lifted|shuffle-learn)");
}

const char* loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::kTriplet: return "triplet";
    case LossKind::kNpairs: return "npairs";
    case LossKind::kLifted: return "lifted";
    case LossKind::kShuffleLearn: return "shuffle-learn";
  }
  return "?";
}

SamplerKind parse_sampler(const std::string& name) {
  if (name == "multiview") return SamplerKind::kMultiView;
  if (name == "singleview") return SamplerKind::kSingleView;
  throw std::invalid_argument("unknown sampler '" + name + "' (expected multiview|singleview)");
}

const char* sampler_name(SamplerKind kind) { return kind == SamplerKind::kMultiView ? "multiview" : "singleview"; }

TrainingDivergence::TrainingDivergence(long step, const DivergenceError& cause)
    : DivergenceError(cause.parameter(), "training diverged at step " + std::to_string(step) + ": " + cause.what()),
      step_(step) {}

TrainingBatch sample_training_batch(const std::vector<MultiViewSequence>& sequences,
                                    const TrainerConfig& config, SeededRng& rng) {
  if (sequences.empty()) throw std::invalid_argument("sample_training_batch: no sequences");
  const int b = config.batch_size;
  if (b < 2) throw std::invalid_argument("sample_training_batch: batch size must be >= 2");
  const int dim = sequences[0].observation_dim();
  TrainingBatch batch;
  switch (config.loss) {
    case LossKind::kTriplet: {
      batch.groups = 3;
      batch.frames.resize(dim, 3 * b);
      for (int i = 0; i < b; ++i) {
        const auto& seq = pick(sequences, rng);
        const Triplet t = config.sampler == SamplerKind::kMultiView
                              ? sample_multiview_triplet(seq, rng, config.multiview)
                              : sample_singleview_triplet(seq, rng, config.positive_range, config.negative_multiplier);
        batch.frames.col(i) = seq.view(t.anchor.view).col(t.anchor.frame);
        batch.frames.col(b + i) = seq.view(t.positive.view).col(t.positive.frame);
        batch.frames.col(2 * b + i) = seq.view(t.negative.view).col(t.negative.frame);
      }
      break;
    }
    case LossKind::kNpairs:
    case LossKind::kLifted: {
      if (config.sampler != SamplerKind::kMultiView) {
        throw std::invalid_argument("sample_training_batch: pair losses need the multi-view sampler");
      }
      batch.groups = 2;
      batch.frames.resize(dim, 2 * b);
      const auto& seq = pick(sequences, rng);
      const auto pairs = sample_npairs_batch(seq, rng, b);
      for (int i = 0; i < b; ++i) {
        const auto& [a, p] = pairs[static_cast<std::size_t>(i)];
        batch.frames.col(i) = seq.view(a.view).col(a.frame);
        batch.frames.col(b + i) = seq.view(p.view).col(p.frame);
      }
      break;
    }
    case LossKind::kShuffleLearn: {
      batch.groups = 3;
      batch.frames.resize(dim, 3 * b);
      for (int i = 0; i < b; ++i) {
        const auto& seq = pick(sequences, rng);
        const OrderTuple t = sample_shuffle_learn_tuple(seq, rng, config.shuffle_tmax, config.shuffle_tmin,
                                                        config.shuffle_negative_ratio);
        for (int g = 0; g < 3; ++g) {
          const auto& f = t.frames[static_cast<std::size_t>(g)];
          batch.frames.col(g * b + i) = seq.view(f.view).col(f.frame);
        }
        batch.labels.push_back(t.label);
      }
      break;
    }
  }
  return batch;
}

double batch_loss(const EmbeddingNet& net, const OrderHead* head, const TrainingBatch& batch,
                  const TrainerConfig& config, MlpGradients* net_grads, MlpGradients* head_grads) {
  const int b = batch.size();
  const auto cache = net.forward_cached(batch.frames);
  const Matrix& emb = cache.output;
  const auto d = emb.rows();
  Matrix upstream(d, emb.cols());
  double value = 0.0;
  switch (config.loss) {
    case LossKind::kTriplet: {
      const auto r = triplet_loss(emb.leftCols(b), emb.middleCols(b, b), emb.rightCols(b),
                                  TripletMargin{config.triplet_margin});
      value = r.value;
      upstream << r.grads[0], r.grads[1], r.grads[2];
      break;
    }
    case LossKind::kNpairs:
    case LossKind::kLifted: {
      const auto r = config.loss == LossKind::kNpairs
                         ? npairs_loss(emb.leftCols(b), emb.rightCols(b))
                         : lifted_structured_loss(emb.leftCols(b), emb.rightCols(b), config.lifted_margin);
      value = r.value;
      upstream << r.grads[0], r.grads[1];
      break;
    }
    case LossKind::kShuffleLearn: {
      if (head == nullptr) throw std::invalid_argument("batch_loss: shuffle-&-learn needs an order head");
      Matrix triples(3 * d, b);
      triples << emb.leftCols(b), emb.middleCols(b, b), emb.rightCols(b);
      const auto r = shuffle_learn_loss(*head, triples, batch.labels);
      value = r.value;
      upstream << r.embedding_grads.topRows(d), r.embedding_grads.middleRows(d, d), r.embedding_grads.bottomRows(d);
      if (head_grads != nullptr) *head_grads = r.head_grads;
      break;
    }
  }
  if (net_grads != nullptr) *net_grads = net.backward(cache, upstream);
  return value;
}

std::vector<TrainingBatch> fixed_batches(const std::vector<MultiViewSequence>& sequences,
                                         const TrainerConfig& config, int count, std::uint64_t seed) {
  SeededRng rng(seed);
  std::vector<TrainingBatch> out;
  for (int i = 0; i < count; ++i) out.push_back(sample_training_batch(sequences, config, rng));
  return out;
}

double validation_loss(const EmbeddingNet& net, const OrderHead* head,
                       const std::vector<TrainingBatch>& batches, const TrainerConfig& config) {
  if (batches.empty()) throw std::invalid_argument("validation_loss: no batches");
  double total = 0.0;
  for (const auto& b : batches) total += batch_loss(net, head, b, config);
  return total / static_cast<double>(batches.size());
}

TrainingResult train_embedding(const std::vector<MultiViewSequence>& train,
                               const std::vector<MultiViewSequence>& validation,
                               const TrainerConfig& config, std::uint64_t seed) {
  if (train.empty()) throw std::invalid_argument("train_embedding: empty training set");
  if (validation.empty()) throw std::invalid_argument("train_embedding: empty validation set");
  if (config.steps < 0 || config.eval_every <= 0 || config.checkpoint_every <= 0) {
    throw std::invalid_argument("train_embedding: steps must be >= 0 and intervals positive");
  }
  SeededRng root(seed);
  SeededRng init = root.fork(1);
  SeededRng sampler = root.fork(2);

  TrainingResult result;
  result.net = make_embedding_net(train[0].observation_dim(), init, config.hidden, config.embedding_dim,
                                  config.normalize);
  OptimizerState opt = make_optimizer(result.net, config.adam);
  std::optional<OptimizerState> head_opt;
  if (config.loss == LossKind::kShuffleLearn) {
    result.head = make_order_head(config.embedding_dim, init, config.order_hidden);
    head_opt = make_optimizer(*result.head, config.adam);
  }
  const OrderHead* head = result.head ? &*result.head : nullptr;
  const auto val = fixed_batches(validation, config, config.validation_batches, mix_seed(seed, 3));
  result.initial_validation_loss = validation_loss(result.net, head, val, config);

  double running = 0.0;
  int since = 0;
  for (long step = 1; step <= config.steps; ++step) {
    const TrainingBatch batch = sample_training_batch(train, config, sampler);
    MlpGradients g, hg;
    running += batch_loss(result.net, head, batch, config, &g, head ? &hg : nullptr);
    ++since;
    try {
      train_step(result.net, opt, g);
      if (head_opt) train_step(*result.head, *head_opt, hg);
    } catch (const DivergenceError& e) {
      throw TrainingDivergence(step, e);
    }
    const bool last = step == config.steps;
    const bool eval = step % config.eval_every == 0 || last;
    const bool save = step % config.checkpoint_every == 0 || last;
    if (eval || save) {
      const double v = validation_loss(result.net, head, val, config);
      if (eval) {
        result.curve.push_back({step, running / since, v});
        running = 0.0;
        since = 0;
      }
      if (save) result.checkpoints.push_back({step, v, result.net, result.head});
    }
  }
  return result;
}

}  // namespace tcn
