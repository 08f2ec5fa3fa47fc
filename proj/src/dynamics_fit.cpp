#include "tcn/rl.hpp"

#include <Eigen/Eigenvalues>

#include <sstream>

namespace tcn {
namespace {

struct StepStats {
  Vector mean_z, mean_y;
  Matrix szz, syz, syy;
};

}  // namespace

LinearDynamics fit_linear_dynamics(const std::vector<Trajectory>& rollouts,
                                   const DynamicsFitOptions& options) {
  if (rollouts.size() < 2) throw std::invalid_argument("fit_linear_dynamics: need at least 2 rollouts");
  if (options.ridge < 0.0 || options.prior_strength < 0.0) {
    throw std::invalid_argument("fit_linear_dynamics: ridge and prior strength must be >= 0");
  }
  const int horizon = rollouts[0].horizon();
  const auto nx = rollouts[0].states.rows();
  const auto nu = rollouts[0].actions.rows();
  for (const auto& r : rollouts) {
    if (r.horizon() != horizon || r.states.rows() != nx || r.actions.rows() != nu ||
        r.actions.cols() != horizon) {
      throw DimensionError("fit_linear_dynamics: rollouts differ in horizon or dimensions");
    }
  }
  if (horizon < 2) throw std::invalid_argument("fit_linear_dynamics: horizon must be >= 2");
  const auto n = nx + nu;
  const double count = static_cast<double>(rollouts.size());

  std::vector<StepStats> stats(static_cast<std::size_t>(horizon - 1));
  StepStats pooled{Vector(), Vector(), Matrix::Zero(n, n), Matrix::Zero(nx, n), Matrix::Zero(nx, nx)};
  for (int t = 0; t + 1 < horizon; ++t) {
    Matrix z(n, static_cast<Eigen::Index>(rollouts.size()));
    Matrix y(nx, z.cols());
    for (std::size_t r = 0; r < rollouts.size(); ++r) {
      const auto c = static_cast<Eigen::Index>(r);
      z.col(c) << rollouts[r].states.col(t), rollouts[r].actions.col(t);
      y.col(c) = rollouts[r].states.col(t + 1);
    }
    auto& s = stats[static_cast<std::size_t>(t)];
    s.mean_z = z.rowwise().mean();
    s.mean_y = y.rowwise().mean();
    const Matrix zc = z.colwise() - s.mean_z;
    const Matrix yc = y.colwise() - s.mean_y;
    s.szz = zc * zc.transpose() / count;
    s.syz = yc * zc.transpose() / count;
    s.syy = yc * yc.transpose() / count;
    pooled.szz += s.szz;
    pooled.syz += s.syz;
    pooled.syy += s.syy;
  }
  const double steps = static_cast<double>(horizon - 1);
  pooled.szz /= steps;
  pooled.syz /= steps;
  pooled.syy /= steps;

  LinearDynamics dyn;
  const double m = options.prior_strength;
  for (int t = 0; t + 1 < horizon; ++t) {
    const auto& s = stats[static_cast<std::size_t>(t)];
    const Matrix szz = (count * s.szz + m * pooled.szz) / (count + m);
    const Matrix syz = (count * s.syz + m * pooled.syz) / (count + m);
    const Matrix syy = (count * s.syy + m * pooled.syy) / (count + m);
    Matrix a = szz + options.ridge * Matrix::Identity(n, n);
    a = 0.5 * (a + a.transpose());
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > options.max_condition) {
      std::ostringstream os;
      os << "fit_linear_dynamics: regressor covariance at step " << t << " is ill-conditioned (eigenvalues "
         << lo << " .. " << hi << "); add rollouts, ridge or prior strength";
      throw ConditioningError(os.str());
    }
    const Eigen::LLT<Matrix> llt(a);
    const Matrix f = llt.solve(syz.transpose()).transpose();
    dyn.fx.push_back(f.leftCols(nx));
    dyn.fu.push_back(f.rightCols(nu));
    dyn.fc.push_back(s.mean_y - f * s.mean_z);
    Matrix resid = syy - f * syz.transpose() - syz * f.transpose() + f * szz * f.transpose();
    dyn.noise.emplace_back(floor_eigenvalues(resid, 1e-8));
  }

  Matrix x0(nx, static_cast<Eigen::Index>(rollouts.size()));
  for (std::size_t r = 0; r < rollouts.size(); ++r) x0.col(static_cast<Eigen::Index>(r)) = rollouts[r].states.col(0);
  dyn.initial_mean = x0.rowwise().mean();
  const Matrix c0 = x0.colwise() - dyn.initial_mean;
  dyn.initial_covariance = SymmetricPD(floor_eigenvalues(c0 * c0.transpose() / count, 1e-6));
  return dyn;
}

}  // namespace tcn
