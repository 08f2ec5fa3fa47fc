#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace tcn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a covariance or Gram matrix fails its Cholesky factorization.
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised on a non-finite intermediate (NaN/Inf) where a finite value is required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised on mismatched vector/matrix dimensions.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Seeded pseudo-random stream. Every stochastic component in the project draws
// from one of these; identical seed + call sequence gives identical output.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t position() const { return position_; }

  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double normal();
  double normal(double mean, double stddev);
  // Inclusive on both ends.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  bool bernoulli(double p);
  Vector normal_vector(Eigen::Index n);

  // Independent child stream keyed by `stream_id`; does not advance this stream.
  SeededRng fork(std::uint64_t stream_id) const;

 private:
  std::uint64_t seed_;
  std::uint64_t position_ = 0;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

// Symmetric positive-definite matrix with a cached lower Cholesky factor.
// Construction fails loudly instead of jittering the diagonal.
class SymmetricPD {
 public:
  explicit SymmetricPD(const Matrix& m);
  static SymmetricPD identity(Eigen::Index n);
  static SymmetricPD diagonal(const Vector& d);

  Eigen::Index dim() const { return matrix_.rows(); }
  const Matrix& matrix() const { return matrix_; }
  const Matrix& cholesky_lower() const { return lower_; }

  Matrix inverse() const;
  double log_det() const;
  // Solves A x = b.
  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;

 private:
  Matrix matrix_;
  Matrix lower_;
};

bool is_symmetric(const Matrix& m, double rel_tol = 1e-12);

// Symmetrizes (m + mᵀ)/2 and floors eigenvalues at `floor`.
Matrix floor_eigenvalues(const Matrix& m, double floor);

/// mean + L·z with z ~ N(0, I) from `rng`.
Vector gaussian_sample(SeededRng& rng, const Vector& mean, const SymmetricPD& cov);

using ScalarFunction = std::function<double(const Vector&)>;

/// Central-difference gradient: (f(x + h eᵢ) − f(x − h eᵢ)) / 2h per coordinate.
Vector finite_difference_gradient(const ScalarFunction& fn, const Vector& point,
                                  double step = 1e-5);

/// KL(N(mean_a, cov_a) ‖ N(mean_b, cov_b)).
double gaussian_kl(const Vector& mean_a, const SymmetricPD& cov_a, const Vector& mean_b,
                   const SymmetricPD& cov_b);

// Log-density of N(mean, cov) at x.
double gaussian_log_density(const Vector& x, const Vector& mean, const SymmetricPD& cov);

// max |a−b| / max(1, |a|, |b|) style relative error used by the gradient checks.
double relative_error(const Vector& analytic, const Vector& numeric);

bool all_finite(const Matrix& m);

}  // namespace tcn
