#pragma once

#include "tcn/numerics.hpp"
#include "tcn/sequence.hpp"

#include <array>
#include <stdexcept>
#include <utility>
#include <vector>

namespace tcn {

/// The sequence cannot support the requested sampler (too few views / frames).
class SamplerError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct MultiViewSamplerOptions {
  // Frames with |t − t_anchor| ≤ this are never negatives.
  double negative_exclusion_seconds = 0.2;
  // Negatives come from the anchor's view; otherwise from any view.
  bool negative_from_anchor_view = true;
};

// Anchor and positive share a frame index on different views; the negative is a
// temporally distant frame from the same sequence.
Triplet sample_multiview_triplet(const MultiViewSequence& seq, SeededRng& rng,
                                 const MultiViewSamplerOptions& options = {});

inline constexpr double kDefaultPositiveRange = 0.2;
inline constexpr double kDefaultNegativeMultiplier = 2.0;

// All three frames from one (uniformly chosen) view: positive within
// positive_range seconds of the anchor, negative beyond
// negative_multiplier × positive_range.
Triplet sample_singleview_triplet(const MultiViewSequence& seq, SeededRng& rng,
                                  double positive_range = kDefaultPositiveRange,
                                  double negative_multiplier = kDefaultNegativeMultiplier);

using FramePair = std::pair<FrameRef, FrameRef>;

// Cross-view simultaneous pairs with pairwise distinct anchor frames.
std::vector<FramePair> sample_npairs_batch(const MultiViewSequence& seq, SeededRng& rng,
                                           int batch_size);

struct OrderTuple {
  std::array<FrameRef, 3> frames;
  int label = 1;  // 1 = temporally ordered, 0 = shuffled
};

inline constexpr int kShuffleLearnTmax = 60;
inline constexpr int kShuffleLearnTmin = 15;
inline constexpr double kShuffleLearnNegativeRatio = 0.75;

OrderTuple sample_shuffle_learn_tuple(const MultiViewSequence& seq, SeededRng& rng,
                                      int tmax = kShuffleLearnTmax, int tmin = kShuffleLearnTmin,
                                      double negative_ratio = kShuffleLearnNegativeRatio);

// Stacks the referenced frames column-wise. All refs must name `seq`.
Matrix gather_frames(const MultiViewSequence& seq, const std::vector<FrameRef>& refs);

}  // namespace tcn
