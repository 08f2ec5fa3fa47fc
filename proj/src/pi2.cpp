#include "tcn/rl.hpp"

#include <cmath>

namespace tcn {
namespace {

Vector softmin(const Vector& shifted, double temperature) {
  Vector w = (-shifted.array() / temperature).exp().matrix();
  return w / w.sum();
}

double ess(const Vector& w) { return 1.0 / w.squaredNorm(); }

}  // namespace

CostToGoSamples CostToGoSamples::build(const std::vector<Trajectory>& rollouts, const QuadraticCost& model) {
  if (rollouts.empty()) throw std::invalid_argument("CostToGoSamples: no rollouts");
  const int horizon = rollouts[0].horizon();
  if (model.horizon() != horizon) throw DimensionError("CostToGoSamples: model horizon differs");
  const auto n = static_cast<Eigen::Index>(rollouts.size());
  CostToGoSamples s{Matrix(n, horizon), Matrix(n, horizon), Matrix(n, horizon)};
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& tr = rollouts[static_cast<std::size_t>(r)];
    if (tr.horizon() != horizon || tr.costs.size() != horizon) {
      throw DimensionError("CostToGoSamples: rollout horizon differs");
    }
    double actual = 0.0;
    double approx = 0.0;
    for (int t = horizon - 1; t >= 0; --t) {
      actual += tr.costs[t];
      approx += model.evaluate(t, tr.states.col(t), tr.actions.col(t));
      s.total(r, t) = actual;
      s.model(r, t) = approx;
      s.residual(r, t) = actual - approx;
    }
  }
  if (!all_finite(s.residual)) throw NumericError("CostToGoSamples: non-finite residual cost-to-go");
  return s;
}

Vector pi2_weights(const Vector& residuals, double ess_fraction, double min_temperature,
                   double* temperature) {
  const auto n = residuals.size();
  if (n == 0) throw std::invalid_argument("pi2_weights: no samples");
  if (!all_finite(residuals)) throw NumericError("pi2_weights: non-finite residual cost-to-go");
  if (!(ess_fraction > 0.0 && ess_fraction <= 1.0)) {
    throw std::invalid_argument("pi2_weights: ess fraction must be in (0, 1]");
  }
  const Vector shifted = residuals.array() - residuals.minCoeff();
  const double range = shifted.maxCoeff();
  const double magnitude = residuals.cwiseAbs().maxCoeff();
  if (range <= 1e-12 * (1.0 + magnitude)) {
    if (temperature != nullptr) *temperature = std::numeric_limits<double>::infinity();
    return Vector::Constant(n, 1.0 / static_cast<double>(n));
  }
  const double target = ess_fraction * static_cast<double>(n);
  double lo = std::max(min_temperature, 1e-8 * range);
  double hi = std::max(lo, 1e8 * range);
  double eta = lo;
  if (ess(softmin(shifted, lo)) < target) {
    double log_lo = std::log(lo);
    double log_hi = std::log(hi);
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (log_lo + log_hi);
      if (ess(softmin(shifted, std::exp(mid))) < target) {
        log_lo = mid;
      } else {
        log_hi = mid;
      }
    }
    eta = std::exp(log_hi);
  }
  if (temperature != nullptr) *temperature = eta;
  return softmin(shifted, eta);
}

Pi2Result pi2_update(const TVLGPolicy& policy, const CostToGoSamples& samples,
                     const std::vector<Trajectory>& rollouts, const Pi2Options& options) {
  const auto n = static_cast<Eigen::Index>(rollouts.size());
  if (n < 2) throw std::invalid_argument("pi2_update: need at least 2 rollouts");
  const int horizon = policy.horizon();
  if (samples.residual.rows() != n || samples.residual.cols() != horizon) {
    throw DimensionError("pi2_update: cost-to-go samples do not match rollouts/horizon");
  }
  Pi2Result out{policy, Matrix(n, horizon), Vector(horizon), 0.0};
  const double uniform = 1.0 / static_cast<double>(n);
  double norm2 = 0.0;
  for (int t = 0; t < horizon; ++t) {
    const auto i = static_cast<std::size_t>(t);
    const double floor = options.temperature_floor * samples.total.col(t).cwiseAbs().mean();
    double eta = 0.0;
    const Vector w = pi2_weights(samples.residual.col(t), options.ess_fraction, floor, &eta);
    out.weights.col(t) = w;
    out.temperatures[t] = eta;

    Matrix eps(policy.action_dim(), n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto& tr = rollouts[static_cast<std::size_t>(r)];
      eps.col(r) = tr.actions.col(t) - policy.mean_action(t, tr.states.col(t));
    }
    const Vector delta = eps * (w.array() - uniform).matrix();
    out.policy.offsets[i] += delta;
    norm2 += delta.squaredNorm();
    if (options.update_covariance) {
      const Vector centre = eps * w;
      const Matrix dev = eps.colwise() - centre;
      const Matrix cov = dev * w.asDiagonal() * dev.transpose();
      out.policy.covariances[i] = SymmetricPD(floor_eigenvalues(cov, 1e-8));
    }
  }
  out.correction_norm = std::sqrt(norm2);
  return out;
}

}  // namespace tcn
