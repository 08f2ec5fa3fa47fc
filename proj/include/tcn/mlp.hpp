#pragma once

#include "tcn/numerics.hpp"

#include <nlohmann/json_fwd.hpp>

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tcn {

/// Raised when an optimizer update would write a non-finite parameter.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& parameter, const std::string& what)
      : std::runtime_error(what), parameter_(parameter) {}
  const std::string& parameter() const { return parameter_; }

 private:
  std::string parameter_;
};

struct DenseLayer {
  Matrix weight;  // out × in
  Vector bias;    // out
};

// Gradients share the layer layout of the network they belong to.
using MlpGradients = std::vector<DenseLayer>;

// Fully-connected network with SiLU hidden activations, a linear last layer and
// an optional unit-norm projection of the output. Batches are column-major:
// one sample per column.
class Mlp {
 public:
  struct Cache {
    Matrix input;
    std::vector<Matrix> pre;   // pre-activation of each layer
    std::vector<Matrix> post;  // post-activation (last entry = raw output)
    Vector norms;              // per-sample output norm (normalized nets only)
    Matrix output;
  };

  Mlp() = default;
  Mlp(std::vector<int> widths, bool normalize_output);

  // Weights ~ N(0, 1/fan_in), zero biases.
  static Mlp random(std::vector<int> widths, bool normalize_output, SeededRng& rng);

  int input_dim() const { return widths_.front(); }
  int output_dim() const { return widths_.back(); }
  const std::vector<int>& widths() const { return widths_; }
  bool normalizes_output() const { return normalize_output_; }

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  Matrix forward(const Matrix& batch) const;
  Vector forward(const Vector& observation) const;
  Cache forward_cached(const Matrix& batch) const;

  // Gradient of Σᵢ ⟨upstreamᵢ, f(xᵢ)⟩ with respect to every parameter; optionally
  // also with respect to the inputs.
  MlpGradients backward(const Cache& cache, const Matrix& upstream,
                        Matrix* input_grad = nullptr) const;
  MlpGradients backward(const Matrix& batch, const Matrix& upstream) const;

  MlpGradients zero_gradients() const;

  Eigen::Index parameter_count() const;
  Vector flat_parameters() const;
  void set_flat_parameters(const Vector& flat);
  std::string parameter_name(std::size_t layer, bool bias) const;

  nlohmann::json to_json() const;
  static Mlp from_json(const nlohmann::json& j);

 private:
  std::vector<int> widths_;
  bool normalize_output_ = false;
  std::vector<DenseLayer> layers_;
};

using EmbeddingNet = Mlp;

// D → hidden… → out, unit-normalized by default.
EmbeddingNet make_embedding_net(int input_dim, SeededRng& rng,
                                const std::vector<int>& hidden = {128, 64}, int output_dim = 32,
                                bool normalize = true);

Vector flatten(const MlpGradients& grads);
MlpGradients unflatten_like(const Mlp& net, const Vector& flat);
void accumulate(MlpGradients& into, const MlpGradients& g, double scale = 1.0);

struct AdamSettings {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  AdamSettings settings;
  MlpGradients first_moment;
  MlpGradients second_moment;
  long step = 0;

  nlohmann::json to_json() const;
  static OptimizerState from_json(const nlohmann::json& j);
};

OptimizerState make_optimizer(const Mlp& net, const AdamSettings& settings = {});

// One Adam update in place. Throws DivergenceError naming the offending block if
// the gradient carries a non-finite entry; the net is left untouched in that case.
void train_step(Mlp& net, OptimizerState& optimizer, const MlpGradients& gradient);

// Versioned JSON container for one or more named networks plus optional
// optimizer state and the hash of the config that produced them.
struct Checkpoint {
  std::map<std::string, Mlp> networks;
  std::map<std::string, OptimizerState> optimizers;
  std::map<std::string, Matrix> tensors;  // auxiliary arrays (e.g. demo embeddings)
  std::string config_hash;
  long step = 0;
};

inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

}  // namespace tcn
