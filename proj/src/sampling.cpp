#include "tcn/sampling.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace tcn {
namespace {

constexpr double kTimeTol = 1e-9;

int other_view(int anchor_view, int num_views, SeededRng& rng) {
  // uniform among the num_views − 1 views that are not the anchor's
  const auto pick = static_cast<int>(rng.uniform_int(0, num_views - 2));
  return pick >= anchor_view ? pick + 1 : pick;
}

}  // namespace

Triplet sample_multiview_triplet(const MultiViewSequence& seq, SeededRng& rng,
                                 const MultiViewSamplerOptions& options) {
  if (seq.num_views() < 2) {
    throw SamplerError("sample_multiview_triplet: sequence '" + seq.id() +
                       "' has a single view; the multi-view sampler needs at least two");
  }
  const int n = seq.num_frames();
  if (n < 3) throw SamplerError("sample_multiview_triplet: need at least 3 frames");
  const int anchor_view = static_cast<int>(rng.uniform_int(0, seq.num_views() - 1));
  const int positive_view = other_view(anchor_view, seq.num_views(), rng);
  const int frame = static_cast<int>(rng.uniform_int(0, n - 1));

  const Vector& t = seq.timestamps();
  std::vector<int> admissible;
  for (int k = 0; k < n; ++k) {
    if (std::abs(t[k] - t[frame]) > options.negative_exclusion_seconds + kTimeTol) {
      admissible.push_back(k);
    }
  }
  if (admissible.empty()) {
    // sequence shorter than the exclusion window: fall back to any other frame
    for (int k = 0; k < n; ++k) {
      if (k != frame) admissible.push_back(k);
    }
  }
  const int negative =
      admissible[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(admissible.size()) - 1))];
  const int negative_view = options.negative_from_anchor_view
                                ? anchor_view
                                : static_cast<int>(rng.uniform_int(0, seq.num_views() - 1));
  return Triplet{{seq.id(), anchor_view, frame},
                 {seq.id(), positive_view, frame},
                 {seq.id(), negative_view, negative}};
}

Triplet sample_singleview_triplet(const MultiViewSequence& seq, SeededRng& rng,
                                  double positive_range, double negative_multiplier) {
  if (positive_range < 0.0 || negative_multiplier < 1.0) {
    throw std::invalid_argument("sample_singleview_triplet: invalid window parameters");
  }
  const double margin = negative_multiplier * positive_range;
  if (!(seq.duration() > 2.0 * margin) || seq.num_frames() < 2) {
    std::ostringstream os;
    os << "sample_singleview_triplet: sequence '" << seq.id() << "' lasts " << seq.duration()
       << " s, needs more than " << 2.0 * margin << " s for the margin geometry";
    throw SamplerError(os.str());
  }
  const int n = seq.num_frames();
  const Vector& t = seq.timestamps();
  const int view = static_cast<int>(rng.uniform_int(0, seq.num_views() - 1));
  const int anchor = static_cast<int>(rng.uniform_int(0, n - 1));

  std::vector<int> positives;
  std::vector<int> negatives;
  for (int k = 0; k < n; ++k) {
    const double dt = std::abs(t[k] - t[anchor]);
    if (k != anchor && dt <= positive_range + kTimeTol) positives.push_back(k);
    if (dt > margin + kTimeTol) negatives.push_back(k);
  }
  if (negatives.empty()) {
    // unreachable given the duration precondition, kept for rounding safety
    throw SamplerError("sample_singleview_triplet: no admissible negative for anchor");
  }
  const int positive =
      positives.empty()
          ? anchor
          : positives[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(positives.size()) - 1))];
  const int negative =
      negatives[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(negatives.size()) - 1))];
  return Triplet{{seq.id(), view, anchor}, {seq.id(), view, positive}, {seq.id(), view, negative}};
}

std::vector<FramePair> sample_npairs_batch(const MultiViewSequence& seq, SeededRng& rng,
                                           int batch_size) {
  if (seq.num_views() < 2) throw SamplerError("sample_npairs_batch: needs a multi-view sequence");
  if (batch_size < 2) throw std::invalid_argument("sample_npairs_batch: batch size must be >= 2");
  const int n = seq.num_frames();
  if (batch_size > n) {
    std::ostringstream os;
    os << "sample_npairs_batch: batch size " << batch_size << " exceeds frame count " << n;
    throw SamplerError(os.str());
  }
  std::vector<int> frames(static_cast<std::size_t>(n));
  std::iota(frames.begin(), frames.end(), 0);
  // partial Fisher-Yates
  for (int i = 0; i < batch_size; ++i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(i, n - 1));
    std::swap(frames[static_cast<std::size_t>(i)], frames[j]);
  }
  std::vector<FramePair> out;
  out.reserve(static_cast<std::size_t>(batch_size));
  for (int i = 0; i < batch_size; ++i) {
    const int f = frames[static_cast<std::size_t>(i)];
    const int av = static_cast<int>(rng.uniform_int(0, seq.num_views() - 1));
    const int pv = other_view(av, seq.num_views(), rng);
    out.emplace_back(FrameRef{seq.id(), av, f}, FrameRef{seq.id(), pv, f});
  }
  return out;
}

OrderTuple sample_shuffle_learn_tuple(const MultiViewSequence& seq, SeededRng& rng, int tmax,
                                      int tmin, double negative_ratio) {
  if (tmin < 2 || tmax < tmin) {
    throw std::invalid_argument("sample_shuffle_learn_tuple: need 2 <= tmin <= tmax");
  }
  if (negative_ratio < 0.0 || negative_ratio > 1.0) {
    throw std::invalid_argument("sample_shuffle_learn_tuple: negative ratio outside [0,1]");
  }
  const int n = seq.num_frames();
  if (n <= 2 * tmax) {
    std::ostringstream os;
    os << "sample_shuffle_learn_tuple: sequence '" << seq.id() << "' has " << n
       << " frames, needs more than " << 2 * tmax;
    throw SamplerError(os.str());
  }
  const int view = static_cast<int>(rng.uniform_int(0, seq.num_views() - 1));
  const int gap = static_cast<int>(rng.uniform_int(tmin, tmax));
  const int a = static_cast<int>(rng.uniform_int(0, n - 1 - gap));
  const int c = a + gap;
  OrderTuple tuple;
  if (rng.bernoulli(negative_ratio)) {
    // b drawn from outside [a, c]
    const int outside = n - (gap + 1);
    int k = static_cast<int>(rng.uniform_int(0, outside - 1));
    const int b = k < a ? k : k + gap + 1;
    tuple.frames = {FrameRef{seq.id(), view, a}, FrameRef{seq.id(), view, b},
                    FrameRef{seq.id(), view, c}};
    tuple.label = 0;
  } else {
    const int b = static_cast<int>(rng.uniform_int(a + 1, c - 1));
    tuple.frames = {FrameRef{seq.id(), view, a}, FrameRef{seq.id(), view, b},
                    FrameRef{seq.id(), view, c}};
    tuple.label = 1;
  }
  return tuple;
}

Matrix gather_frames(const MultiViewSequence& seq, const std::vector<FrameRef>& refs) {
  Matrix out(seq.observation_dim(), static_cast<Eigen::Index>(refs.size()));
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (refs[i].sequence_id != seq.id()) {
      throw std::invalid_argument("gather_frames: frame ref names a different sequence");
    }
    out.col(static_cast<Eigen::Index>(i)) = seq.view(refs[i].view).col(refs[i].frame);
  }
  return out;
}

}  // namespace tcn
