#include "tcn/numerics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace tcn {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed), engine_(mix_seed(seed, 0)) {}

double SeededRng::uniform() {
  ++position_;
  // 53 random mantissa bits
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double SeededRng::normal() {
  ++position_;
  return normal_(engine_);
}

double SeededRng::normal(double mean, double stddev) { return mean + stddev * normal(); }

std::int64_t SeededRng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
  ++position_;
  std::uniform_int_distribution<std::int64_t> dist(lo, hi);
  return dist(engine_);
}

bool SeededRng::bernoulli(double p) { return uniform() < p; }

Vector SeededRng::normal_vector(Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
  return v;
}

SeededRng SeededRng::fork(std::uint64_t stream_id) const {
  return SeededRng(mix_seed(seed_, stream_id + 0x5bd1e995ULL));
}

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

SymmetricPD::SymmetricPD(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("SymmetricPD: matrix is not square");
  if (!all_finite(m)) throw NumericError("SymmetricPD: non-finite entries");
  if (!is_symmetric(m)) throw FactorizationError("SymmetricPD: matrix is not symmetric");
  matrix_ = 0.5 * (m + m.transpose());
  Eigen::LLT<Matrix> llt(matrix_);
  if (llt.info() != Eigen::Success) {
    throw FactorizationError("SymmetricPD: Cholesky factorization failed (matrix not positive definite)");
  }
  lower_ = llt.matrixL();
  for (Eigen::Index i = 0; i < lower_.rows(); ++i) {
    if (!(lower_(i, i) > 0.0)) {
      throw FactorizationError("SymmetricPD: non-positive Cholesky pivot");
    }
  }
}

SymmetricPD SymmetricPD::identity(Eigen::Index n) { return SymmetricPD(Matrix::Identity(n, n)); }

SymmetricPD SymmetricPD::diagonal(const Vector& d) { return SymmetricPD(Matrix(d.asDiagonal())); }

Matrix SymmetricPD::inverse() const {
  return solve(Matrix(Matrix::Identity(dim(), dim())));
}

double SymmetricPD::log_det() const {
  return 2.0 * lower_.diagonal().array().log().sum();
}

Vector SymmetricPD::solve(const Vector& b) const {
  const auto l = lower_.triangularView<Eigen::Lower>();
  return l.transpose().solve(l.solve(b));
}

Matrix SymmetricPD::solve(const Matrix& b) const {
  const auto l = lower_.triangularView<Eigen::Lower>();
  return l.transpose().solve(l.solve(b));
}

Matrix floor_eigenvalues(const Matrix& m, double floor) {
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  Vector values = eig.eigenvalues().cwiseMax(floor);
  return eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
}

Vector gaussian_sample(SeededRng& rng, const Vector& mean, const SymmetricPD& cov) {
  if (mean.size() != cov.dim()) {
    throw DimensionError("gaussian_sample: mean and covariance dimensions differ");
  }
  return mean + cov.cholesky_lower() * rng.normal_vector(mean.size());
}

Vector finite_difference_gradient(const ScalarFunction& fn, const Vector& point, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite_difference_gradient: step must be > 0");
  Vector grad(point.size());
  Vector x = point;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + step;
    const double up = fn(x);
    x[i] = orig - step;
    const double down = fn(x);
    x[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      std::ostringstream os;
      os << "finite_difference_gradient: non-finite function value at coordinate " << i;
      throw NumericError(os.str());
    }
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

double gaussian_kl(const Vector& mean_a, const SymmetricPD& cov_a, const Vector& mean_b,
                   const SymmetricPD& cov_b) {
  const Eigen::Index n = mean_a.size();
  if (mean_b.size() != n || cov_a.dim() != n || cov_b.dim() != n) {
    throw DimensionError("gaussian_kl: dimension mismatch");
  }
  const Vector diff = mean_b - mean_a;
  const double trace_term = cov_b.solve(cov_a.matrix()).trace();
  const double maha = diff.dot(cov_b.solve(diff));
  const double kl =
      0.5 * (trace_term + maha - static_cast<double>(n) + cov_b.log_det() - cov_a.log_det());
  // rounding can leave a tiny negative for identical inputs
  return std::max(0.0, kl);
}

double gaussian_log_density(const Vector& x, const Vector& mean, const SymmetricPD& cov) {
  const Vector diff = x - mean;
  const double n = static_cast<double>(x.size());
  return -0.5 * (diff.dot(cov.solve(diff)) + cov.log_det() + n * std::log(2.0 * std::numbers::pi));
}

double relative_error(const Vector& analytic, const Vector& numeric) {
  const double denom = std::max({analytic.norm(), numeric.norm(), 1e-8});
  return (analytic - numeric).norm() / denom;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace tcn
