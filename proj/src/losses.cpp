#include "tcn/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace tcn {
namespace {

void check_pair_batch(const Matrix& a, const Matrix& p, const char* who) {
  if (a.cols() == 0) throw std::invalid_argument(std::string(who) + ": empty batch");
  if (a.rows() != p.rows() || a.cols() != p.cols()) {
    throw DimensionError(std::string(who) + ": anchor/positive batch shapes differ");
  }
}

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

constexpr double kDistanceSmoothing = 1e-12;

}  // namespace

LossResult triplet_loss(const Matrix& anchors, const Matrix& positives, const Matrix& negatives,
                        const TripletMargin& margin) {
  check_pair_batch(anchors, positives, "triplet_loss");
  check_pair_batch(anchors, negatives, "triplet_loss");
  if (margin.alpha < 0.0) throw std::invalid_argument("triplet_loss: margin must be >= 0");
  const Eigen::Index b = anchors.cols();
  const double inv_b = 1.0 / static_cast<double>(b);
  LossResult r;
  r.grads.assign(3, Matrix::Zero(anchors.rows(), b));
  for (Eigen::Index i = 0; i < b; ++i) {
    const Vector ap = anchors.col(i) - positives.col(i);
    const Vector an = anchors.col(i) - negatives.col(i);
    const double hinge = ap.squaredNorm() - an.squaredNorm() + margin.alpha;
    if (hinge > 0.0) {
      r.value += hinge * inv_b;
      r.grads[0].col(i) = 2.0 * inv_b * (negatives.col(i) - positives.col(i));
      r.grads[1].col(i) = -2.0 * inv_b * ap;
      r.grads[2].col(i) = 2.0 * inv_b * an;
    }
  }
  return r;
}

LossResult npairs_loss(const Matrix& anchors, const Matrix& positives) {
  check_pair_batch(anchors, positives, "npairs_loss");
  const Eigen::Index n = anchors.cols();
  if (n < 2) throw std::invalid_argument("npairs_loss: a single pair has no negatives");
  const Matrix logits = anchors.transpose() * positives;  // (i, j) = a_i · p_j
  Matrix g(n, n);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(i).array() - m).exp().matrix();
    const double z = e.sum();
    loss += (m + std::log(z)) - logits(i, i);
    g.row(i) = e / z;
    g(i, i) -= 1.0;
  }
  g /= static_cast<double>(n);
  LossResult r;
  r.value = loss / static_cast<double>(n);
  r.grads = {positives * g.transpose(), anchors * g};
  return r;
}

LossResult lifted_structured_loss(const Matrix& anchors, const Matrix& positives, double margin) {
  check_pair_batch(anchors, positives, "lifted_structured_loss");
  const Eigen::Index n = anchors.cols();
  if (n < 2) throw std::invalid_argument("lifted_structured_loss: a single pair has no negatives");
  const Eigen::Index m = 2 * n;
  Matrix x(anchors.rows(), m);
  x << anchors, positives;
  // column k and k + n share label k
  auto label = [n](Eigen::Index k) { return k % n; };

  Matrix dist(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      dist(i, j) = std::sqrt((x.col(i) - x.col(j)).squaredNorm() + kDistanceSmoothing);
    }
  }
  Matrix d_dist = Matrix::Zero(m, m);  // ∂loss/∂dist(i, j), accumulated
  double loss = 0.0;
  std::vector<double> terms;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> negs;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index i = k;
    const Eigen::Index j = k + n;
    terms.clear();
    negs.clear();
    for (Eigen::Index src : {i, j}) {
      for (Eigen::Index l = 0; l < m; ++l) {
        if (label(l) == k) continue;
        terms.push_back(margin - dist(src, l));
        negs.emplace_back(src, l);
      }
    }
    double mx = terms[0];
    for (double t : terms) mx = std::max(mx, t);
    double z = 0.0;
    for (double t : terms) z += std::exp(t - mx);
    const double objective = mx + std::log(z) + dist(i, j);
    if (objective <= 0.0) continue;
    loss += objective * objective;
    const double scale = objective / static_cast<double>(n);  // ∂(J²/2n)/∂J
    d_dist(i, j) += scale;
    for (std::size_t q = 0; q < terms.size(); ++q) {
      d_dist(negs[q].first, negs[q].second) -= scale * std::exp(terms[q] - mx) / z;
    }
  }
  Matrix gx = Matrix::Zero(x.rows(), m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      const double w = d_dist(a, b);
      if (w == 0.0) continue;
      const Vector dir = (x.col(a) - x.col(b)) / dist(a, b);
      gx.col(a) += w * dir;
      gx.col(b) -= w * dir;
    }
  }
  LossResult r;
  r.value = loss / (2.0 * static_cast<double>(n));
  r.grads = {gx.leftCols(n), gx.rightCols(n)};
  return r;
}

OrderHead make_order_head(int embedding_dim, SeededRng& rng, int hidden) {
  return Mlp::random({3 * embedding_dim, hidden, 1}, false, rng);
}

OrderLossResult shuffle_learn_loss(const OrderHead& head, const Matrix& triples,
                                   const std::vector<int>& labels) {
  if (head.output_dim() != 1) throw DimensionError("shuffle_learn_loss: head must emit one logit");
  if (triples.rows() != head.input_dim()) {
    throw DimensionError("shuffle_learn_loss: triple width does not match the head input");
  }
  if (static_cast<Eigen::Index>(labels.size()) != triples.cols() || labels.empty()) {
    throw DimensionError("shuffle_learn_loss: one label per tuple required");
  }
  const auto cache = head.forward_cached(triples);
  const Eigen::Index b = triples.cols();
  Matrix upstream(1, b);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const double z = cache.output(0, i);
    const double y = labels[static_cast<std::size_t>(i)] != 0 ? 1.0 : 0.0;
    loss += softplus(z) - y * z;
    upstream(0, i) = (sigmoid(z) - y) / static_cast<double>(b);
  }
  OrderLossResult r;
  r.value = loss / static_cast<double>(b);
  r.head_grads = head.backward(cache, upstream, &r.embedding_grads);
  return r;
}

}  // namespace tcn
