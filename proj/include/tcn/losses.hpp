#pragma once

#include "tcn/mlp.hpp"
#include "tcn/numerics.hpp"

#include <vector>

namespace tcn {

struct TripletMargin {
  double alpha = 0.2;
};

// Loss value plus the gradient with respect to each input embedding batch, in
// argument order. Batches are d × B.
struct LossResult {
  double value = 0.0;
  std::vector<Matrix> grads;
};

// mean_i max(0, |a_i − p_i|² − |a_i − n_i|² + α)
LossResult triplet_loss(const Matrix& anchors, const Matrix& positives, const Matrix& negatives,
                        const TripletMargin& margin = {});

// Mean softmax cross-entropy of each anchor picking its own positive among all
// positives, with inner-product logits.
LossResult npairs_loss(const Matrix& anchors, const Matrix& positives);

inline constexpr double kLiftedMargin = 1.0;

// Smoothed lifted-structured loss over the 2N embeddings (anchors ∪ positives):
// every other pair's members are negatives of a positive pair.
LossResult lifted_structured_loss(const Matrix& anchors, const Matrix& positives,
                                  double margin = kLiftedMargin);

// Small binary classifier over concatenated frame-triple embeddings.
using OrderHead = Mlp;

OrderHead make_order_head(int embedding_dim, SeededRng& rng, int hidden = 64);

struct OrderLossResult {
  double value = 0.0;
  MlpGradients head_grads;
  Matrix embedding_grads;  // 3d × B, same layout as the input triples
};

// Mean binary cross-entropy of the head's order logit; `triples` stacks the three
// embeddings of each tuple vertically (3d × B).
OrderLossResult shuffle_learn_loss(const OrderHead& head, const Matrix& triples,
                                   const std::vector<int>& labels);

}  // namespace tcn
