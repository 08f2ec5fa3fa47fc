#include "test_util.hpp"

#include "tcn/sampling.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace tcn;

namespace {

MultiViewSequence seq_of(int views, int frames, std::uint64_t seed = 1) {
  SeededRng r(seed);
  return tcn::testing::random_sequence("s", views, frames, 2, r);
}

}  // namespace

TEST(MultiViewTriplet, AnchorPositiveSimultaneousAcrossViews) {
  const auto s = seq_of(2, 100);
  SeededRng r(2);
  for (int i = 0; i < 1000; ++i) {
    const Triplet t = sample_multiview_triplet(s, r);
    EXPECT_EQ(t.anchor.frame, t.positive.frame);
    EXPECT_NE(t.anchor.view, t.positive.view);
    EXPECT_EQ(t.negative.view, t.anchor.view);
    EXPECT_GT(std::abs(t.negative.frame - t.anchor.frame), 2);
    EXPECT_EQ(t.anchor.sequence_id, t.negative.sequence_id);
  }
}

TEST(MultiViewTriplet, NegativeHistogramMatchesExactMarginal) {
  const int n = 50;
  const auto s = seq_of(2, n);
  // exact marginal: anchor uniform, negative uniform over frames more than 2 frames away
  std::vector<double> expected(n, 0.0);
  for (int f = 0; f < n; ++f) {
    std::vector<int> adm;
    for (int k = 0; k < n; ++k) {
      if (std::abs(k - f) > 2) adm.push_back(k);
    }
    for (int k : adm) expected[k] += 1.0 / n / adm.size();
  }
  SeededRng r(3);
  const int draws = 2000000;
  std::vector<double> hist(n, 0.0);
  for (int i = 0; i < draws; ++i) hist[sample_multiview_triplet(s, r).negative.frame] += 1.0 / draws;
  for (int k = 0; k < n; ++k) EXPECT_NEAR(hist[k] / expected[k], 1.0, 0.02) << "frame " << k;
}

TEST(MultiViewTriplet, ThreeFrameSequenceStillValid) {
  const auto s = seq_of(2, 3);
  SeededRng r(4);
  for (int i = 0; i < 200; ++i) {
    const Triplet t = sample_multiview_triplet(s, r);
    EXPECT_NE(t.negative.frame, t.anchor.frame);
  }
}

TEST(MultiViewTriplet, SingleViewIsUnsupported) {
  const auto s = seq_of(1, 20);
  SeededRng r(5);
  EXPECT_THROW(sample_multiview_triplet(s, r), SamplerError);
}

TEST(SingleViewTriplet, WindowConstraintsOverRandomLengths) {
  SeededRng r(6);
  for (int k = 0; k < 100; ++k) {
    const int frames = 10 + static_cast<int>(r.uniform_int(0, 60));
    const auto s = seq_of(2, frames, static_cast<std::uint64_t>(k));
    for (int i = 0; i < 1000; ++i) {
      const Triplet t = sample_singleview_triplet(s, r);
      ASSERT_EQ(t.anchor.view, t.positive.view);
      ASSERT_EQ(t.anchor.view, t.negative.view);
      ASSERT_LE(std::abs(t.positive.frame - t.anchor.frame), 2);
      ASSERT_NE(t.positive.frame, t.anchor.frame);
      ASSERT_GT(std::abs(t.negative.frame - t.anchor.frame), 4);
    }
  }
}

TEST(SingleViewTriplet, ZeroRangePositiveIsAnchor) {
  const auto s = seq_of(2, 30);
  SeededRng r(7);
  for (int i = 0; i < 100; ++i) {
    const Triplet t = sample_singleview_triplet(s, r, 0.0, 2.0);
    EXPECT_EQ(t.positive.frame, t.anchor.frame);
    EXPECT_NE(t.negative.frame, t.anchor.frame);
  }
}

TEST(SingleViewTriplet, TooShortForMargin) {
  const auto s = seq_of(2, 8);  // 0.7 s < 2 * 0.4 s
  SeededRng r(8);
  EXPECT_THROW(sample_singleview_triplet(s, r), SamplerError);
}

TEST(NpairsBatch, TwoFramesTwoPairs) {
  const auto s = seq_of(2, 2);
  SeededRng r(9);
  const auto pairs = sample_npairs_batch(s, r, 2);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_NE(pairs[0].first.frame, pairs[1].first.frame);
  for (const auto& [a, p] : pairs) {
    EXPECT_EQ(a.frame, p.frame);
    EXPECT_NE(a.view, p.view);
  }
}

TEST(NpairsBatch, DistinctAnchorsAndCoverage) {
  const auto s = seq_of(2, 50);
  SeededRng r(10);
  std::set<int> seen;
  for (int b = 0; b < 20; ++b) {
    const auto pairs = sample_npairs_batch(s, r, 32);
    std::set<int> frames;
    for (const auto& p : pairs) frames.insert(p.first.frame);
    EXPECT_EQ(frames.size(), 32u);
    seen.insert(frames.begin(), frames.end());
  }
  EXPECT_EQ(seen.size(), 50u);
  EXPECT_THROW(sample_npairs_batch(s, r, 51), SamplerError);
}

TEST(ShuffleLearn, NegativeFractionAndSpacing) {
  const auto s = seq_of(2, 150);
  SeededRng r(11);
  const int draws = 100000;
  int negatives = 0;
  for (int i = 0; i < draws; ++i) {
    const OrderTuple t = sample_shuffle_learn_tuple(s, r);
    const int a = t.frames[0].frame, b = t.frames[1].frame, c = t.frames[2].frame;
    ASSERT_GE(c - a, kShuffleLearnTmin);
    ASSERT_LE(c - a, kShuffleLearnTmax);
    if (t.label == 1) {
      ASSERT_TRUE(a < b && b < c);
    } else {
      ++negatives;
      ASSERT_TRUE(b < a || b > c);
    }
  }
  EXPECT_NEAR(static_cast<double>(negatives) / draws, 0.75, 0.01);
}

TEST(ShuffleLearn, FixedSpacingWhenTminEqualsTmax) {
  const auto s = seq_of(1, 40);
  SeededRng r(12);
  for (int i = 0; i < 500; ++i) {
    const OrderTuple t = sample_shuffle_learn_tuple(s, r, 7, 7, 0.5);
    EXPECT_EQ(t.frames[2].frame - t.frames[0].frame, 7);
  }
}

TEST(ShuffleLearn, TooShortSequence) {
  const auto s = seq_of(1, 120);
  SeededRng r(13);
  EXPECT_THROW(sample_shuffle_learn_tuple(s, r), SamplerError);
}

TEST(GatherFrames, StacksColumns) {
  const auto s = seq_of(2, 5);
  const Matrix m = gather_frames(s, {{"s", 1, 3}, {"s", 0, 0}});
  EXPECT_EQ(m.col(0), s.view(1).col(3));
  EXPECT_EQ(m.col(1), s.view(0).col(0));
  EXPECT_ANY_THROW(gather_frames(s, {{"other", 0, 0}}));
}
