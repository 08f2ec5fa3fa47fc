#include "tcn/eval.hpp"

#include <cmath>

namespace tcn {
namespace {

std::array<double, 6> knots(const KeyframeAlignment& k, int n) {
  return {0.0, static_cast<double>(k[0]), static_cast<double>(k[1]), static_cast<double>(k[2]),
          static_cast<double>(k[3]), static_cast<double>(n - 1)};
}

double normalizer(double target, int n2, const KeyframeAlignment& k2, AlignmentNormalization mode) {
  if (mode == AlignmentNormalization::kSequence) return std::max(1.0, static_cast<double>(n2 - 1));
  const auto x = knots(k2, n2);
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (target <= x[i] || i + 1 == x.size()) return std::max(1.0, x[i] - x[i - 1]);
  }
  return 1.0;
}

void check_inputs(int n1, int n2, const KeyframeAlignment& k1, const KeyframeAlignment& k2) {
  if (n1 <= 0 || n2 <= 0) throw std::invalid_argument("alignment_error: empty sequence");
  validate_keyframes(k1, n1);
  validate_keyframes(k2, n2);
}

}  // namespace

double corresponding_position(int frame, int n1, int n2, const KeyframeAlignment& k1,
                              const KeyframeAlignment& k2) {
  const auto a = knots(k1, n1);
  const auto b = knots(k2, n2);
  const double f = static_cast<double>(frame);
  for (std::size_t i = 1; i < a.size(); ++i) {
    if (f <= a[i]) {
      const double span = a[i] - a[i - 1];
      if (span <= 0.0) return b[i];
      return b[i - 1] + (f - a[i - 1]) / span * (b[i] - b[i - 1]);
    }
  }
  return b.back();
}

std::vector<int> nearest_neighbors(const Matrix& queries, const Matrix& candidates) {
  if (queries.rows() != candidates.rows()) throw DimensionError("nearest_neighbors: embedding dims differ");
  if (candidates.cols() == 0) throw std::invalid_argument("nearest_neighbors: no candidates");
  const Vector cn = candidates.colwise().squaredNorm().transpose();
  const Matrix dots = candidates.transpose() * queries;
  std::vector<int> out(static_cast<std::size_t>(queries.cols()));
  for (Eigen::Index q = 0; q < queries.cols(); ++q) {
    Eigen::Index best = 0;
    double best_d = cn[0] - 2.0 * dots(0, q);
    for (Eigen::Index c = 1; c < candidates.cols(); ++c) {
      const double d = cn[c] - 2.0 * dots(c, q);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    out[static_cast<std::size_t>(q)] = static_cast<int>(best);
  }
  return out;
}

double alignment_error(const Matrix& emb1, const Matrix& emb2, const KeyframeAlignment& k1,
                       const KeyframeAlignment& k2, const AlignmentOptions& options) {
  const int n1 = static_cast<int>(emb1.cols());
  const int n2 = static_cast<int>(emb2.cols());
  check_inputs(n1, n2, k1, k2);
  const auto nn = nearest_neighbors(emb1, emb2);
  double total = 0.0;
  for (int i = 0; i < n1; ++i) {
    const double target = corresponding_position(i, n1, n2, k1, k2);
    const double err = std::abs(nn[static_cast<std::size_t>(i)] - target) /
                       normalizer(target, n2, k2, options.normalization);
    total += std::min(1.0, err);
  }
  return total / n1;
}

double alignment_error(const EmbeddingNet& net, const Matrix& frames1, const Matrix& frames2,
                       const KeyframeAlignment& k1, const KeyframeAlignment& k2,
                       const AlignmentOptions& options) {
  return alignment_error(net.forward(frames1), net.forward(frames2), k1, k2, options);
}

double random_alignment_error(int n1, int n2, const KeyframeAlignment& k1, const KeyframeAlignment& k2,
                              const AlignmentOptions& options) {
  check_inputs(n1, n2, k1, k2);
  double total = 0.0;
  for (int i = 0; i < n1; ++i) {
    const double target = corresponding_position(i, n1, n2, k1, k2);
    const double norm = normalizer(target, n2, k2, options.normalization);
    double row = 0.0;
    for (int j = 0; j < n2; ++j) row += std::min(1.0, std::abs(j - target) / norm);
    total += row / n2;
  }
  return total / n1;
}

}  // namespace tcn
