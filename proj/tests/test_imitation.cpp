#include "oracles.hpp"

#include "tcn/imitation.hpp"

#include <gtest/gtest.h>

using namespace tcn;

namespace {

Matrix uniform_joints(const JointRanges& ranges, int n, SeededRng& r) {
  Matrix j(ranges.lower.size(), n);
  for (int k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < j.rows(); ++i) j(i, k) = r.uniform(ranges.lower[i], ranges.upper[i]);
  }
  return j;
}

}  // namespace

TEST(JointError, ExactPredictionsScoreZero) {
  const JointRanges ranges = default_joint_ranges();
  SeededRng r(1);
  const Matrix t = uniform_joints(ranges, 50, r);
  const auto rep = joint_error(t, t, ranges);
  EXPECT_EQ(rep.mean, 0.0);
  EXPECT_EQ(rep.per_joint.size(), ranges.lower.size());
}

TEST(JointError, HandValueAndExclusion) {
  JointRanges ranges{Vector::Zero(3), Vector::Constant(3, 2.0)};
  Matrix t = Matrix::Zero(3, 2), p(3, 2);
  p << 1.0, 1.0,
       0.2, 0.6,
       2.0, 2.0;
  const auto rep = joint_error(p, t, ranges, 2);
  EXPECT_NEAR(rep.per_joint[0], 50.0, 1e-12);
  EXPECT_NEAR(rep.per_joint[1], 20.0, 1e-12);
  EXPECT_NEAR(rep.per_joint[2], 100.0, 1e-12);
  EXPECT_NEAR(rep.mean, 170.0 / 3.0, 1e-12);
  EXPECT_NEAR(rep.mean_excluding, 35.0, 1e-12);
  EXPECT_THROW(joint_error(p.leftCols(1), t, ranges), DimensionError);
}

TEST(RandomBaseline, UniformTargetsGiveOneThird) {
  const JointRanges ranges = default_joint_ranges();
  SeededRng r(2);
  const Matrix t = uniform_joints(ranges, 20000, r);
  const auto rep = random_joint_error_expectation(t, ranges);
  for (Eigen::Index j = 0; j < rep.per_joint.size(); ++j) EXPECT_NEAR(rep.per_joint[j], 100.0 / 3.0, 0.5);
}

TEST(RandomBaseline, ExpectationMatchesMonteCarlo) {
  const JointRanges ranges = default_joint_ranges();
  SeededRng r(3);
  Matrix t = uniform_joints(ranges, 200, r);
  t.col(0) = ranges.lower;  // edge targets
  t.col(1) = ranges.upper;
  const auto exact = random_joint_error_expectation(t, ranges);
  const auto mc = random_joint_baseline(t, ranges, r, 400);
  EXPECT_NEAR(mc.mean / exact.mean, 1.0, 0.01);
  EXPECT_NEAR(mc.mean_excluding / exact.mean_excluding, 1.0, 0.01);
}

TEST(RandomBaseline, EndpointTargetHasHalfRangeError) {
  JointRanges ranges{Vector::Constant(1, -1.0), Vector::Constant(1, 3.0)};
  Matrix t(1, 2);
  t << -1.0, 1.0;
  const auto rep = random_joint_error_expectation(t, ranges);
  EXPECT_NEAR(rep.per_joint[0], 0.5 * (50.0 + 25.0), 1e-12);
}

TEST(Normalization, RoundTrip) {
  const JointRanges ranges = default_joint_ranges();
  SeededRng r(4);
  const Matrix j = uniform_joints(ranges, 30, r);
  const Matrix n = normalize_joints(j, ranges);
  EXPECT_LE(n.cwiseAbs().maxCoeff(), 1.0 + 1e-12);
  EXPECT_LT((denormalize_joints(n, ranges) - j).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Supervision, ParseAndName) {
  const auto c = parse_supervision("tc + Human+self");
  EXPECT_TRUE(c.time_contrastive);
  EXPECT_TRUE(c.human);
  EXPECT_TRUE(c.self);
  EXPECT_EQ(c.name(), "TC + Human + Self");
  EXPECT_FALSE(c.trains_embedding());
  EXPECT_TRUE(parse_supervision("Self").trains_embedding());
  EXPECT_ANY_THROW(parse_supervision("TC + Robot"));
}

TEST(Supervision, TcAloneRejected) {
  EXPECT_ANY_THROW(parse_supervision("TC").validate());
  SupervisionConfig c = parse_supervision("Human");
  c.human_label_noise = 0.0;
  EXPECT_ANY_THROW(c.validate());
}

TEST(NoisyLabels, NoiseScalesWithRange) {
  const JointRanges ranges = default_joint_ranges();
  SeededRng r(5);
  RegressionSet clean{Matrix::Zero(4, 20000), Matrix(ranges.lower.size(), 20000)};
  clean.joints.colwise() = 0.5 * (ranges.lower + ranges.upper);
  const auto noisy = make_noisy_human_labels(clean, 0.1, ranges, r);
  EXPECT_EQ(noisy.noise_level, 0.1);
  const Matrix diff = noisy.data.joints - clean.joints;
  for (Eigen::Index j = 0; j < diff.rows(); ++j) {
    const double sd = std::sqrt(diff.row(j).squaredNorm() / diff.cols());
    EXPECT_NEAR(sd / ranges.width()[j], 0.1, 0.005) << j;
  }
}

TEST(PoseLoss, GradientsMatchFiniteDifferences) {
  SeededRng r(6);
  const EmbeddingNet net = make_embedding_net(7, r, {9}, 5);
  const JointsDecoder dec = make_joints_decoder(5, r, 6);
  const Matrix x = oracle::random_matrix(r, 7, 4);
  const Matrix y = oracle::random_matrix(r, 8, 4, 0.5);
  EXPECT_LT(oracle::pair_gradient_error(net, dec,
                                        [&](const Mlp& a, const Mlp& b, MlpGradients* ga, MlpGradients* gb) {
                                          return pose_regression_loss(a, b, x, y, ga, gb);
                                        }),
            1e-6);
}

TEST(Imitate, OutputsClampedFiniteJoints) {
  SeededRng r(7);
  const JointRanges ranges = default_joint_ranges();
  PoseModel model{make_embedding_net(12, r, {16}, 6), make_joints_decoder(6, r, 10), ranges};
  for (int i = 0; i < 50; ++i) {
    const Vector j = imitate(model, Vector(100.0 * r.normal_vector(12)));
    ASSERT_EQ(j.size(), 8);
    EXPECT_TRUE(j.allFinite());
    EXPECT_TRUE((j.array() >= ranges.lower.array()).all());
    EXPECT_TRUE((j.array() <= ranges.upper.array()).all());
  }
  EXPECT_THROW(imitate(model, Vector(Vector::Zero(11))), DimensionError);
}

TEST(TrainDecoder, SelfSupervisionMemorizesSmallSet) {
  SeededRng r(8);
  const JointRanges ranges = default_joint_ranges();
  RegressionSet self{oracle::random_matrix(r, 12, 16), uniform_joints(ranges, 16, r)};
  SupervisionConfig c = parse_supervision("Self");
  c.steps = 1500;
  c.batch_size = 16;
  c.decoder_hidden = 64;
  const PoseModel m = train_decoder(make_embedding_net(12, r, {64}, 16), c, &self, nullptr, ranges, 9);
  const auto err = joint_error(imitate(m, self.observations), self.joints, ranges);
  EXPECT_LT(err.mean, 5.0);
}

TEST(TrainDecoder, FrozenEmbeddingStaysFixed) {
  SeededRng r(10);
  const JointRanges ranges = default_joint_ranges();
  RegressionSet self{oracle::random_matrix(r, 12, 16), uniform_joints(ranges, 16, r)};
  SupervisionConfig c = parse_supervision("TC + Self");
  c.steps = 50;
  const EmbeddingNet net = make_embedding_net(12, r, {8}, 4);
  const PoseModel m = train_decoder(net, c, &self, nullptr, ranges, 11);
  EXPECT_EQ(m.net.flat_parameters(), net.flat_parameters());
  EXPECT_ANY_THROW(train_decoder(net, parse_supervision("TC + Human"), &self, nullptr, ranges, 11));
}

TEST(TrainDecoder, DeterministicForSeed) {
  SeededRng r(12);
  const JointRanges ranges = default_joint_ranges();
  RegressionSet self{oracle::random_matrix(r, 12, 16), uniform_joints(ranges, 16, r)};
  SupervisionConfig c = parse_supervision("Self");
  c.steps = 30;
  const EmbeddingNet net = make_embedding_net(12, r, {8}, 4);
  const PoseModel a = train_decoder(net, c, &self, nullptr, ranges, 3);
  const PoseModel b = train_decoder(net, c, &self, nullptr, ranges, 3);
  EXPECT_EQ(a.decoder.flat_parameters(), b.decoder.flat_parameters());
  EXPECT_EQ(a.net.flat_parameters(), b.net.flat_parameters());
}
