#include "oracles.hpp"

#include "tcn/losses.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tcn;

namespace {

// Relative FD error of the gradients of `loss` w.r.t. each input batch.
double input_gradient_error(const std::vector<Matrix>& inputs, const std::function<LossResult(const std::vector<Matrix>&)>& loss) {
  const LossResult r = loss(inputs);
  double worst = 0.0;
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    const Vector x = Eigen::Map<const Vector>(inputs[b].data(), inputs[b].size());
    const Vector fd = oracle::central_difference(
        [&](const Vector& v) {
          auto in = inputs;
          in[b] = Eigen::Map<const Matrix>(v.data(), inputs[b].rows(), inputs[b].cols());
          return loss(in).value;
        },
        x);
    const Vector an = Eigen::Map<const Vector>(r.grads[b].data(), r.grads[b].size());
    worst = std::max(worst, oracle::rel_err(an, fd));
  }
  return worst;
}

Matrix unit_columns(SeededRng& r, int d, int n) {
  Matrix m = oracle::random_matrix(r, d, n);
  m.colwise().normalize();
  return m;
}

}  // namespace

TEST(TripletLoss, HandValues) {
  Matrix a(2, 1), p(2, 1), n(2, 1);
  a << 0, 0;
  p << 0, 0;
  n << 1, 0;
  EXPECT_DOUBLE_EQ(triplet_loss(a, p, n).value, 0.0);
  p << std::sqrt(0.3), 0;
  EXPECT_NEAR(triplet_loss(a, p, a).value, 0.5, 1e-15);
}

TEST(TripletLoss, SatisfiedBatchHasZeroGradient) {
  Matrix a = Matrix::Zero(3, 4), p = Matrix::Zero(3, 4), n = Matrix::Ones(3, 4);
  const LossResult r = triplet_loss(a, p, n);
  EXPECT_EQ(r.value, 0.0);
  for (const auto& g : r.grads) EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
}

TEST(TripletLoss, TranslationInvariant) {
  SeededRng r(1);
  const Matrix a = oracle::random_matrix(r, 5, 8), p = oracle::random_matrix(r, 5, 8), n = oracle::random_matrix(r, 5, 8);
  const Vector shift = r.normal_vector(5) * 3.0;
  const double base = triplet_loss(a, p, n).value;
  const double moved = triplet_loss(a.colwise() + shift, p.colwise() + shift, n.colwise() + shift).value;
  EXPECT_NEAR(base, moved, 1e-12);
}

TEST(TripletLoss, GradientBatch64) {
  SeededRng r(2);
  const std::vector<Matrix> in{unit_columns(r, 8, 64), unit_columns(r, 8, 64), unit_columns(r, 8, 64)};
  EXPECT_LT(input_gradient_error(in, [](const std::vector<Matrix>& x) { return triplet_loss(x[0], x[1], x[2]); }), 1e-4);
}

TEST(TripletLoss, RejectsEmptyBatch) {
  EXPECT_ANY_THROW(triplet_loss(Matrix(2, 0), Matrix(2, 0), Matrix(2, 0)));
}

TEST(NpairsLoss, MatchesBruteForceSoftmax) {
  SeededRng r(3);
  const Matrix a = oracle::random_matrix(r, 6, 7), p = oracle::random_matrix(r, 6, 7);
  double expected = 0.0;
  for (int i = 0; i < 7; ++i) {
    double z = 0.0;
    for (int j = 0; j < 7; ++j) z += std::exp(a.col(i).dot(p.col(j)));
    expected += -(a.col(i).dot(p.col(i)) - std::log(z));
  }
  expected /= 7.0;
  EXPECT_NEAR(npairs_loss(a, p).value, expected, 1e-10);
}

TEST(NpairsLoss, SymmetryAndSeparation) {
  SeededRng r(4);
  const Matrix a = oracle::random_matrix(r, 4, 5);
  const Matrix same = Matrix::Ones(4, 5);
  EXPECT_NEAR(npairs_loss(a, same).value, std::log(5.0), 1e-12);
  Matrix e = Matrix::Identity(2, 2) * 3.0;
  EXPECT_LT(npairs_loss(e, e).value, std::log(2.0));
  EXPECT_ANY_THROW(npairs_loss(a.leftCols(1), a.leftCols(1)));
}

TEST(NpairsLoss, Gradient) {
  SeededRng r(5);
  const std::vector<Matrix> in{unit_columns(r, 6, 10), unit_columns(r, 6, 10)};
  EXPECT_LT(input_gradient_error(in, [](const std::vector<Matrix>& x) { return npairs_loss(x[0], x[1]); }), 1e-4);
}

TEST(LiftedLoss, SeparatedPairsVanish) {
  Matrix a(2, 2), p(2, 2);
  a << 0, 50, 0, 0;
  p << 0.01, 50.01, 0, 0;
  const LossResult r = lifted_structured_loss(a, p);
  EXPECT_LT(r.value, 1e-12);
}

TEST(LiftedLoss, SymmetricTwoPairHandValue) {
  Matrix a(2, 2), p(2, 2);
  a << 0, 0, 0, 3;
  p << 1, 1, 0, 3;
  const double j = std::log(2.0 * std::exp(1.0 - 3.0) + 2.0 * std::exp(1.0 - std::sqrt(10.0))) + 1.0;
  EXPECT_NEAR(lifted_structured_loss(a, p).value, 0.5 * j * j, 1e-9);
}

TEST(LiftedLoss, GradientAndNonNegative) {
  SeededRng r(6);
  const std::vector<Matrix> in{unit_columns(r, 5, 6), unit_columns(r, 5, 6)};
  EXPECT_LT(input_gradient_error(in, [](const std::vector<Matrix>& x) { return lifted_structured_loss(x[0], x[1]); }),
            1e-4);
  EXPECT_GE(lifted_structured_loss(in[0], in[1]).value, 0.0);
}

TEST(ShuffleLearnLoss, ZeroLogitIsLogTwo) {
  SeededRng r(7);
  OrderHead head = make_order_head(4, r, 8);
  head.set_flat_parameters(Vector::Zero(head.parameter_count()));
  const Matrix triples = oracle::random_matrix(r, 12, 3);
  EXPECT_NEAR(shuffle_learn_loss(head, triples, {0, 1, 1}).value, std::log(2.0), 1e-14);
  EXPECT_NEAR(shuffle_learn_loss(head, triples, {1, 1, 1}).value, std::log(2.0), 1e-14);
}

TEST(ShuffleLearnLoss, SaturatedCorrectLogit) {
  SeededRng r(8);
  OrderHead head = make_order_head(2, r, 4);
  Vector p = Vector::Zero(head.parameter_count());
  p[p.size() - 1] = 40.0;  // output bias
  head.set_flat_parameters(p);
  const Matrix triples = oracle::random_matrix(r, 6, 2);
  EXPECT_LT(shuffle_learn_loss(head, triples, {1, 1}).value, 1e-15);
  EXPECT_GT(shuffle_learn_loss(head, triples, {0, 0}).value, 39.0);
}

TEST(ShuffleLearnLoss, HeadAndEmbeddingGradients) {
  SeededRng r(9);
  const OrderHead head = make_order_head(3, r, 6);
  const Matrix triples = oracle::random_matrix(r, 9, 5);
  const std::vector<int> labels{1, 0, 0, 1, 0};
  const OrderLossResult res = shuffle_learn_loss(head, triples, labels);
  const Vector fd_head = oracle::central_difference(
      [&](const Vector& v) {
        OrderHead h = head;
        h.set_flat_parameters(v);
        return shuffle_learn_loss(h, triples, labels).value;
      },
      head.flat_parameters());
  EXPECT_LT(oracle::rel_err(flatten(res.head_grads), fd_head), 1e-6);
  const Vector fd_emb = oracle::central_difference(
      [&](const Vector& v) { return shuffle_learn_loss(head, Eigen::Map<const Matrix>(v.data(), 9, 5), labels).value; },
      Eigen::Map<const Vector>(triples.data(), triples.size()));
  EXPECT_LT(oracle::rel_err(Eigen::Map<const Vector>(res.embedding_grads.data(), res.embedding_grads.size()), fd_emb),
            1e-6);
}

TEST(LossesThroughNet, FiniteDifferenceSuite) {
  for (const auto& r : oracle::gradient_suite(5, 99)) EXPECT_LT(r.max_error, 1e-4) << r.loss;
}
