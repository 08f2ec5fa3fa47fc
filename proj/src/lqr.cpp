#include "tcn/rl.hpp"

#include <cmath>
#include <sstream>

namespace tcn {
namespace {

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

void check_problem(const LinearDynamics& dyn, const QuadraticCost& cost, const TVLGPolicy& prev) {
  const int horizon = cost.horizon();
  if (horizon == 0) throw std::invalid_argument("lqr: empty cost");
  if (dyn.transitions() != horizon - 1 || prev.horizon() != horizon) {
    throw DimensionError("lqr: dynamics, cost and policy horizons disagree");
  }
  if (prev.state_dim() != cost.state_dim ||
      cost.hessians[0].rows() != cost.state_dim + prev.action_dim()) {
    throw DimensionError("lqr: state/action dimensions disagree");
  }
}

}  // namespace

double QuadraticCost::evaluate(int t, const Vector& x, const Vector& u) const {
  Vector z(x.size() + u.size());
  z << x, u;
  const auto i = static_cast<std::size_t>(t);
  return 0.5 * z.dot(hessians[i] * z) + linear[i].dot(z) + constants[i];
}

QuadraticCost quadratize_cost(const CostModel& cost, const Matrix& nominal_states,
                              const Matrix& nominal_actions, double action_eigen_floor) {
  if (nominal_states.cols() != nominal_actions.cols()) {
    throw DimensionError("quadratize_cost: states and actions differ in length");
  }
  if (!all_finite(nominal_states) || !all_finite(nominal_actions)) {
    throw NumericError("quadratize_cost: non-finite nominal trajectory");
  }
  const auto nx = nominal_states.rows();
  const auto nu = nominal_actions.rows();
  QuadraticCost q;
  q.state_dim = static_cast<int>(nx);
  for (Eigen::Index t = 0; t < nominal_states.cols(); ++t) {
    const Vector x = nominal_states.col(t);
    const Vector u = nominal_actions.col(t);
    const double c = cost.cost(static_cast<int>(t), x, u);
    Vector g;
    Matrix h;
    cost.expand(static_cast<int>(t), x, u, g, h);
    if (!std::isfinite(c) || !all_finite(g) || !all_finite(h)) {
      std::ostringstream os;
      os << "quadratize_cost: non-finite cost expansion at step " << t;
      throw NumericError(os.str());
    }
    h = symmetrize(h);
    h.bottomRightCorner(nu, nu) = floor_eigenvalues(h.bottomRightCorner(nu, nu), action_eigen_floor);
    Vector z(nx + nu);
    z << x, u;
    q.hessians.push_back(h);
    q.linear.push_back(g - h * z);
    q.constants.push_back(c - g.dot(z) + 0.5 * z.dot(h * z));
  }
  return q;
}

TVLGPolicy lqr_solve(const LinearDynamics& dyn, const QuadraticCost& cost, const TVLGPolicy& prev,
                     double eta) {
  check_problem(dyn, cost, prev);
  if (eta < 0.0) throw std::invalid_argument("lqr_solve: eta must be >= 0");
  const int horizon = cost.horizon();
  const Eigen::Index nx = cost.state_dim;
  const Eigen::Index nu = prev.action_dim();
  TVLGPolicy out;
  out.gains.resize(static_cast<std::size_t>(horizon));
  out.offsets.resize(static_cast<std::size_t>(horizon));
  std::vector<Matrix> covs(static_cast<std::size_t>(horizon));

  Matrix v_mat = Matrix::Zero(nx, nx);
  Vector v_vec = Vector::Zero(nx);
  for (int t = horizon - 1; t >= 0; --t) {
    const auto i = static_cast<std::size_t>(t);
    Matrix qzz = cost.hessians[i];
    Vector qz = cost.linear[i];
    if (eta > 0.0) {
      // η · (−log p_old(u|x)) up to a constant
      const Matrix p = prev.covariances[i].inverse();
      const Matrix& kb = prev.gains[i];
      const Vector& ob = prev.offsets[i];
      qzz.topLeftCorner(nx, nx) += eta * kb.transpose() * p * kb;
      qzz.topRightCorner(nx, nu) -= eta * kb.transpose() * p;
      qzz.bottomLeftCorner(nu, nx) -= eta * p * kb;
      qzz.bottomRightCorner(nu, nu) += eta * p;
      qz.head(nx) += eta * kb.transpose() * p * ob;
      qz.tail(nu) -= eta * p * ob;
    }
    if (t + 1 < horizon) {
      Matrix f(nx, nx + nu);
      f << dyn.fx[i], dyn.fu[i];
      qzz += f.transpose() * v_mat * f;
      qz += f.transpose() * (v_mat * dyn.fc[i] + v_vec);
    }
    qzz = symmetrize(qzz);
    const Matrix quu = qzz.bottomRightCorner(nu, nu);
    const Matrix qux = qzz.bottomLeftCorner(nu, nx);
    const Vector qu = qz.tail(nu);

    double mu = 0.0;
    const double scale = std::max(1.0, quu.diagonal().cwiseAbs().maxCoeff());
    Eigen::LLT<Matrix> llt(quu);
    while (llt.info() != Eigen::Success) {
      mu = mu == 0.0 ? 1e-8 * scale : mu * 10.0;
      if (mu > 1e8 * scale) {
        std::ostringstream os;
        os << "lqr: Q_uu not positive definite at step " << t << " even with regularization " << mu;
        throw NumericError(os.str());
      }
      llt.compute(quu + mu * Matrix::Identity(nu, nu));
    }
    const Matrix quu_reg = quu + mu * Matrix::Identity(nu, nu);
    const Matrix k_gain = -llt.solve(qux);
    const Vector k_off = -llt.solve(qu);
    const Matrix quu_inv = llt.solve(Matrix::Identity(nu, nu));
    covs[i] = symmetrize((eta > 0.0 ? eta : 1.0) * quu_inv);
    out.gains[i] = k_gain;
    out.offsets[i] = k_off;

    const Matrix qxx = qzz.topLeftCorner(nx, nx);
    const Matrix qxu = qzz.topRightCorner(nx, nu);
    const Vector qx = qz.head(nx);
    v_mat = symmetrize(qxx + k_gain.transpose() * quu_reg * k_gain + k_gain.transpose() * qux +
                       qxu * k_gain);
    v_vec = qx + k_gain.transpose() * quu_reg * k_off + k_gain.transpose() * qu + qxu * k_off;
  }
  for (auto& c : covs) out.covariances.emplace_back(c);
  return out;
}

std::vector<double> expected_kl(const LinearDynamics& dyn, const TVLGPolicy& next,
                                const TVLGPolicy& prev) {
  const int horizon = next.horizon();
  if (prev.horizon() != horizon || dyn.transitions() != horizon - 1) {
    throw DimensionError("expected_kl: horizons disagree");
  }
  const Eigen::Index nx = next.state_dim();
  const Eigen::Index nu = next.action_dim();
  Vector mu = dyn.initial_mean;
  Matrix sx = dyn.initial_covariance.matrix();
  std::vector<double> out(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t) {
    const auto i = static_cast<std::size_t>(t);
    const Matrix p = prev.covariances[i].inverse();
    const Matrix dk = next.gains[i] - prev.gains[i];
    const Vector mean_gap = dk * mu + next.offsets[i] - prev.offsets[i];
    const double kl = 0.5 * ((p * next.covariances[i].matrix()).trace() - static_cast<double>(nu) +
                             prev.covariances[i].log_det() - next.covariances[i].log_det() +
                             mean_gap.dot(p * mean_gap) + (dk.transpose() * p * dk * sx).trace());
    out[i] = std::max(0.0, kl);
    if (t + 1 < horizon) {
      const Matrix& k = next.gains[i];
      Matrix szz(nx + nu, nx + nu);
      szz << sx, sx * k.transpose(), k * sx, k * sx * k.transpose() + next.covariances[i].matrix();
      Vector mz(nx + nu);
      mz << mu, k * mu + next.offsets[i];
      Matrix f(nx, nx + nu);
      f << dyn.fx[i], dyn.fu[i];
      mu = f * mz + dyn.fc[i];
      sx = symmetrize(f * szz * f.transpose() + dyn.noise[i].matrix());
    }
  }
  return out;
}

LqrResult lqr_backward_pass(const LinearDynamics& dyn, const QuadraticCost& cost,
                            const TVLGPolicy& prev, double kl_epsilon, const LqrOptions& options) {
  if (!(kl_epsilon > 0.0)) throw std::invalid_argument("lqr_backward_pass: kl epsilon must be > 0");
  check_problem(dyn, cost, prev);
  auto sum = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  };
  auto solve = [&](double eta) {
    LqrResult r{lqr_solve(dyn, cost, prev, eta), eta, 0.0, {}, false, false, 0};
    r.kl_per_step = expected_kl(dyn, r.policy, prev);
    r.expected_kl = sum(r.kl_per_step);
    return r;
  };
  if (std::isinf(kl_epsilon)) return solve(0.0);

  LqrResult low = solve(options.eta_min);
  if (low.expected_kl <= kl_epsilon) return low;
  LqrResult high = solve(options.eta_max);
  if (high.expected_kl > kl_epsilon) {
    LqrResult pinned{prev, options.eta_max, 0.0,
                     std::vector<double>(static_cast<std::size_t>(prev.horizon()), 0.0), true, true, 0};
    return pinned;
  }
  double log_lo = std::log(options.eta_min);
  double log_hi = std::log(options.eta_max);
  for (int it = 1; it <= options.max_bisection; ++it) {
    const double mid = 0.5 * (log_lo + log_hi);
    LqrResult r = solve(std::exp(mid));
    r.constraint_active = true;
    r.bisection_iterations = it;
    if (r.expected_kl <= kl_epsilon && r.expected_kl >= options.accept_fraction * kl_epsilon) return r;
    if (r.expected_kl > kl_epsilon) {
      log_lo = mid;
    } else {
      log_hi = mid;
      high = std::move(r);
    }
  }
  if (log_hi - log_lo > 1e-9) {
    throw NumericError("lqr_backward_pass: eta bisection did not converge in " +
                       std::to_string(options.max_bisection) + " iterations");
  }
  // bracket collapsed on a KL discontinuity; keep the feasible side
  high.constraint_active = true;
  high.bisection_iterations = options.max_bisection;
  return high;
}

}  // namespace tcn
