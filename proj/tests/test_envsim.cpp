#include "oracles.hpp"

#include "tcn/envsim.hpp"
#include "tcn/experiments.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace tcn;

TEST(FrameCount, InclusiveOfEndpoint) {
  EXPECT_EQ(frame_count(5.25, 10.0), 53);
  EXPECT_EQ(frame_count(5.2, 10.0), 53);
  EXPECT_EQ(frame_count(0.0, 10.0), 1);
  EXPECT_THROW(frame_count(1.0, 0.0), std::invalid_argument);
}

TEST(PouringScript, TooShortDurationThrows) {
  SeededRng r(1);
  EXPECT_THROW(sample_pouring_script(r, 2.0), std::invalid_argument);
}

TEST(PouringWorld, KeyframesStrictlyIncreasingAndConsistentLabels) {
  const PouringWorld world{PouringConfig{}};
  SeededRng r(2);
  for (int i = 0; i < 10000; ++i) {
    const double duration = r.uniform(3.0, 8.0);
    const PouringScript s = sample_pouring_script(r, duration);
    const int n = frame_count(duration, 10.0);
    std::vector<int> contact, flowing;
    double prev_fill_label = 0;
    for (int k = 0; k < n; ++k) {
      const PouringState st = scripted_pouring_state(s, k / 10.0, 0.35);
      const auto a = world.attributes(st);
      if (a.at("liquid_flowing") == 1) {
        ASSERT_EQ(a.at("within_pouring_distance"), 1);
        ASSERT_NE(a.at("container_angle"), 90);
      }
      ASSERT_GE(a.at("recipient_has_liquid"), prev_fill_label);
      prev_fill_label = a.at("recipient_has_liquid");
      if (a.at("hand_contact")) contact.push_back(k);
      if (a.at("liquid_flowing")) flowing.push_back(k);
    }
    ASSERT_FALSE(contact.empty());
    ASSERT_FALSE(flowing.empty());
    const KeyframeAlignment keys{contact.front(), flowing.front(), flowing.back(), contact.back()};
    ASSERT_NO_THROW(validate_keyframes(keys, n)) << "duration " << duration;
  }
}

TEST(PouringWorld, GeneratedSequenceShapeAndKeyframes) {
  const PouringWorld world{PouringConfig{}};
  SeededRng r(3);
  const GeneratedSequence g = world.generate(r, "x", 5.25);
  EXPECT_EQ(g.sequence.num_frames(), 53);
  EXPECT_EQ(g.sequence.num_views(), 2);
  EXPECT_EQ(g.sequence.observation_dim(), 64);
  ASSERT_TRUE(g.sidecar.keyframes.has_value());
  const auto& k = *g.sidecar.keyframes;
  EXPECT_TRUE(k[0] < k[1] && k[1] < k[2] && k[2] < k[3]);
  EXPECT_EQ(g.sidecar.latent.cols(), 53);
}

TEST(PouringWorld, FlowingFractionMatchesScriptOccupancy) {
  // pour segment lasts U[0.20, 0.34] of the duration: mean 0.27 · 5.25 s = 1.4175 s,
  // i.e. 14.175 of the 53 frames on average.
  const PouringWorld world{PouringConfig{}};
  SeededRng r(4);
  double flowing = 0.0, frames = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const GeneratedSequence g = world.generate(r, "s", 5.25, true);
    for (int v : g.sidecar.attributes.at("liquid_flowing")) flowing += v;
    frames += g.sequence.num_frames();
  }
  const double expected = 0.27 * 52.5 / 53.0;
  EXPECT_NEAR(flowing / frames / expected, 1.0, 0.02);
}

TEST(PouringWorld, NoiseDoesNotTouchTheLatent) {
  const PouringWorld world{PouringConfig{}};
  SeededRng a(5), b(5);
  const GeneratedSequence noisy = world.generate(a, "s", 5.0);
  const GeneratedSequence clean = world.generate(b, "s", 5.0, true);
  EXPECT_EQ(noisy.sidecar.latent, clean.sidecar.latent);
  EXPECT_EQ(noisy.sidecar.keyframes, clean.sidecar.keyframes);
  // view 0 uses the same camera draw in both runs, so the difference is the pixel noise
  const Matrix diff = noisy.sequence.view(0) - clean.sequence.view(0);
  const double sd = std::sqrt(diff.squaredNorm() / diff.size());
  EXPECT_NEAR(sd, world.config().noise_scale, 0.005);
}

TEST(PouringWorld, SameSeedSameSequence) {
  const PouringWorld world{PouringConfig{}};
  SeededRng a(6), b(6);
  const auto x = world.generate(a, "s", 5.0);
  const auto y = world.generate(b, "s", 5.0);
  EXPECT_EQ(x.sequence.view(0), y.sequence.view(0));
  EXPECT_EQ(x.sequence.view(1), y.sequence.view(1));
}

TEST(PouringDataset, DefaultSplit) {
  ExperimentConfig c;
  c.set("data.min_duration", "4.5");
  const PouringWorld world(pouring_config(c));
  const PouringDataset d = generate_pouring_dataset(world, 1);
  EXPECT_EQ(d.train.size(), 133u);
  EXPECT_EQ(d.validation.size(), 17u);
  EXPECT_EQ(d.test.size(), 30u);
}

TEST(PoseWorld, JointsWithinRanges) {
  const PoseWorld world{PoseConfig{}};
  SeededRng r(7);
  for (Agent agent : {Agent::kRobot, Agent::kHuman}) {
    const GeneratedSequence g = world.generate(r, "p", agent, 10.0, {0.0, 60.0});
    ASSERT_TRUE(g.sidecar.joints.has_value());
    const Matrix& j = *g.sidecar.joints;
    for (Eigen::Index k = 0; k < j.cols(); ++k) {
      EXPECT_TRUE((j.col(k).array() >= world.ranges().lower.array()).all());
      EXPECT_TRUE((j.col(k).array() <= world.ranges().upper.array()).all());
    }
    const Matrix& performed = g.sidecar.latent;
    for (Eigen::Index k = 0; k < performed.cols(); ++k) {
      EXPECT_TRUE((performed.col(k).array() >= world.ranges().lower.array()).all());
      EXPECT_TRUE((performed.col(k).array() <= world.ranges().upper.array()).all());
    }
  }
}

TEST(PoseWorld, EmbodimentGap) {
  const PoseWorld world{PoseConfig{}};
  SeededRng r(8);
  const Vector times = frame_times(20, 10.0);
  const Matrix joints = world.random_joint_trajectory(r, times, 0.4);
  const Matrix camera = Matrix::Zero(world.config().camera_dims, 20);
  const Vector look = Vector::Constant(world.config().appearance_dims, 0.5);
  const Matrix human = world.render(Agent::kHuman, joints, look, 0.0, camera, nullptr);
  const Matrix robot = world.render(Agent::kRobot, joints, look, 0.0, camera, nullptr);
  EXPECT_GT((human - robot).norm() / robot.norm(), 0.1);
  // the robot renderer leaves the padding channels empty
  EXPECT_EQ(robot.bottomRows(64 - world.config().robot_native_dim).cwiseAbs().maxCoeff(), 0.0);
}

TEST(PoseWorld, HalvingBandLimitHalvesDisplacement) {
  const PoseWorld world{PoseConfig{}};
  const Vector times = frame_times(300, 10.0);
  double full = 0.0, half = 0.0;
  for (int i = 0; i < 50; ++i) {
    SeededRng a(100 + i), b(100 + i);
    const Matrix x = world.random_joint_trajectory(a, times, 0.4);
    const Matrix y = world.random_joint_trajectory(b, times, 0.2);
    full += (x.rightCols(299) - x.leftCols(299)).cwiseAbs().mean();
    half += (y.rightCols(299) - y.leftCols(299)).cwiseAbs().mean();
  }
  EXPECT_NEAR(half / full, 0.5, 0.05);
}

TEST(PoseWorld, ImitationLagsAndClamps) {
  PoseConfig cfg;
  cfg.imitation_noise = 0.0;
  const PoseWorld world(cfg);
  SeededRng r(9);
  const Vector times = frame_times(30, 10.0);
  Matrix target = world.random_joint_trajectory(r, times, 0.4);
  target(0, 10) = 100.0;  // out of range spike
  const Matrix out = world.imitate(r, target, times);
  // one-frame lag at 10 Hz with a 0.1 s delay
  EXPECT_LT((out.col(5) - target.col(4)).norm(), 1e-12);
  EXPECT_DOUBLE_EQ(out(0, 11), world.ranges().upper[0]);
}

class ArmTest : public ::testing::Test {
 protected:
  PouringWorld world_{PouringConfig{}};
};

TEST_F(ArmTest, FixedPointAtRest) {
  ArmEnvConfig cfg;
  cfg.process_noise = 0.0;
  const ArmEnv env(cfg, world_);
  ArmState s = env.rest_state();
  for (int t = 0; t < 20; ++t) s = env.step(s, Vector::Zero(3), nullptr).state;
  EXPECT_EQ(s.q, Vector::Zero(3));
  EXPECT_EQ(s.qd, Vector::Zero(3));
  EXPECT_LT(s.fill, 1e-12);
}

TEST_F(ArmTest, ConstantActionAcceleratesAlongIt) {
  const ArmEnv env(ArmEnvConfig{}, world_);
  Vector u(3);
  u << 1.0, -0.5, 0.25;
  const ArmStep st = env.step(env.rest_state(), u, nullptr);
  for (int i = 0; i < 3; ++i) EXPECT_GT(st.state.qd[i] * u[i], 0.0);
  EXPECT_EQ(st.observation.size(), 64);
}

TEST_F(ArmTest, RejectsBadActions) {
  const ArmEnv env(ArmEnvConfig{}, world_);
  EXPECT_THROW(env.step(env.rest_state(), Vector::Zero(2), nullptr), DimensionError);
  Vector u = Vector::Zero(3);
  u[1] = std::nan("");
  EXPECT_THROW(env.step(env.rest_state(), u, nullptr), NumericError);
}

TEST_F(ArmTest, LinearizationMatchesFiniteDifferences) {
  const ArmEnv env(ArmEnvConfig{}, world_);
  SeededRng r(10);
  for (int trial = 0; trial < 100; ++trial) {
    ArmState s{r.normal_vector(3), r.normal_vector(3), 0.0};
    const Vector u = r.normal_vector(3);
    const auto lin = env.linearize(s, u);
    auto next = [&](const Vector& z) {
      ArmState x{z.head(3), z.segment(3, 3), 0.0};
      const ArmState y = env.step(x, z.tail(3), nullptr).state;
      Vector out(6);
      out << y.q, y.qd;
      return out;
    };
    Vector z(9);
    z << s.q, s.qd, u;
    Matrix fd(6, 9);
    const double h = 1e-6;
    for (int i = 0; i < 9; ++i) {
      Vector up = z, down = z;
      up[i] += h;
      down[i] -= h;
      fd.col(i) = (next(up) - next(down)) / (2 * h);
    }
    ASSERT_LT((fd.leftCols(6) - lin.state_jacobian).cwiseAbs().maxCoeff(), 1e-5);
    ASSERT_LT((fd.rightCols(3) - lin.action_jacobian).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST_F(ArmTest, StepIsDeterministicGivenNoiseStream) {
  const ArmEnv env(ArmEnvConfig{}, world_);
  SeededRng a(11), b(11);
  const Vector u = Vector::Constant(3, 0.3);
  const ArmStep x = env.step(env.rest_state(), u, &a);
  const ArmStep y = env.step(env.rest_state(), u, &b);
  EXPECT_EQ(x.state.qd, y.state.qd);
  EXPECT_EQ(x.observation, y.observation);
}

TEST_F(ArmTest, PourConfigurationReachesRecipient) {
  const ArmEnv env(ArmEnvConfig{}, world_);
  ArmState s = env.rest_state();
  s.q = env.pour_configuration(0.0);
  const PouringState st = env.latent(s);
  EXPECT_NEAR(st.distance, env.config().pour_height, 1e-12);
  EXPECT_NEAR(st.angle_deg, 0.0, 1e-12);
  EXPECT_GT(st.flow, 0.99);
}
