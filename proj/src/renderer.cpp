#include "tcn/envsim.hpp"

#include <cmath>
#include <numbers>

namespace tcn {
namespace {

Matrix gaussian_matrix(SeededRng& rng, Eigen::Index rows, Eigen::Index cols, double stddev) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal(0.0, stddev);
  }
  return m;
}

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

RendererFamily RendererFamily::random(int input_dim, int hidden_dim, int output_dim, SeededRng& rng,
                                      double input_gain, double offset_scale) {
  if (input_dim <= 0 || hidden_dim <= 0 || output_dim <= 0) {
    throw std::invalid_argument("RendererFamily: dimensions must be positive");
  }
  RendererFamily f;
  const double s1 = input_gain / std::sqrt(static_cast<double>(input_dim));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  f.w1_a = gaussian_matrix(rng, hidden_dim, input_dim, s1);
  f.w1_b = gaussian_matrix(rng, hidden_dim, input_dim, s1);
  f.w2_a = gaussian_matrix(rng, output_dim, hidden_dim, s2);
  f.w2_b = gaussian_matrix(rng, output_dim, hidden_dim, s2);
  f.b1 = 0.3 * rng.normal_vector(hidden_dim);
  f.b2 = 0.1 * rng.normal_vector(output_dim);
  f.offset_basis = gaussian_matrix(rng, output_dim, 2, offset_scale);
  return f;
}

ViewRenderer::ViewRenderer(const RendererFamily& family, int view_id, double angle_deg,
                           double noise_scale, int native_dim)
    : view_id_(view_id), angle_deg_(angle_deg), noise_scale_(noise_scale) {
  if (noise_scale < 0.0) throw std::invalid_argument("ViewRenderer: negative noise scale");
  const double c = std::cos(radians(angle_deg));
  const double s = std::sin(radians(angle_deg));
  w1_ = c * family.w1_a + s * family.w1_b;
  w2_ = c * family.w2_a + s * family.w2_b;
  b1_ = family.b1;
  b2_ = family.b2;
  offset_ = family.offset_basis * Eigen::Vector2d(c, s);
  native_dim_ = native_dim < 0 ? family.output_dim() : native_dim;
  if (native_dim_ > family.output_dim()) {
    throw DimensionError("ViewRenderer: native dim exceeds the family output dim");
  }
}

Vector ViewRenderer::render(const Vector& input, SeededRng* noise) const {
  if (input.size() != w1_.cols()) {
    throw DimensionError("ViewRenderer::render: expected input of size " +
                         std::to_string(w1_.cols()) + ", got " + std::to_string(input.size()));
  }
  Vector y = w2_ * (w1_ * input + b1_).array().tanh().matrix() + b2_ + offset_;
  if (noise != nullptr && noise_scale_ > 0.0) {
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += noise_scale_ * noise->normal();
  }
  y.tail(y.size() - native_dim_).setZero();
  return y;
}

Matrix ViewRenderer::render_sequence(const Matrix& inputs, SeededRng* noise) const {
  Matrix out(output_dim(), inputs.cols());
  for (Eigen::Index k = 0; k < inputs.cols(); ++k) out.col(k) = render(inputs.col(k), noise);
  return out;
}

int frame_count(double duration, double frame_rate) {
  if (!(duration >= 0.0) || !(frame_rate > 0.0)) {
    throw std::invalid_argument("frame_count: need duration >= 0 and a positive frame rate");
  }
  return static_cast<int>(std::floor(duration * frame_rate + 1e-9)) + 1;
}

Vector frame_times(int frames, double frame_rate) {
  Vector t(frames);
  for (int k = 0; k < frames; ++k) t[k] = k / frame_rate;
  return t;
}

Matrix band_limited_trajectory(SeededRng& rng, int dims, const Vector& times, double max_freq_hz,
                               double amplitude, int components) {
  if (components <= 0 || max_freq_hz <= 0.0) {
    throw std::invalid_argument("band_limited_trajectory: need positive frequency and components");
  }
  Matrix out = Matrix::Zero(dims, times.size());
  for (int d = 0; d < dims; ++d) {
    double total = 0.0;
    for (int c = 0; c < components; ++c) {
      const double a = rng.uniform(0.5, 1.0);
      const double f = max_freq_hz * rng.uniform(0.2, 1.0);
      const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      total += a;
      for (Eigen::Index k = 0; k < times.size(); ++k) {
        out(d, k) += a * std::sin(2.0 * std::numbers::pi * f * times[k] + phase);
      }
    }
    out.row(d) *= amplitude / total;
  }
  return out;
}

}  // namespace tcn
