#include "tcn/mlp.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace tcn {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Matrix silu(const Matrix& z) {
  return z.unaryExpr([](double v) { return v * sigmoid(v); });
}

Matrix silu_derivative(const Matrix& z) {
  return z.unaryExpr([](double v) {
    const double s = sigmoid(v);
    return s * (1.0 + v * (1.0 - s));
  });
}

constexpr double kNormFloor = 1e-12;

}  // namespace

Mlp::Mlp(std::vector<int> widths, bool normalize_output)
    : widths_(std::move(widths)), normalize_output_(normalize_output) {
  if (widths_.size() < 2) throw std::invalid_argument("Mlp: need at least input and output widths");
  for (int w : widths_) {
    if (w <= 0) throw std::invalid_argument("Mlp: widths must be positive");
  }
  for (std::size_t i = 0; i + 1 < widths_.size(); ++i) {
    layers_.push_back({Matrix::Zero(widths_[i + 1], widths_[i]), Vector::Zero(widths_[i + 1])});
  }
}

Mlp Mlp::random(std::vector<int> widths, bool normalize_output, SeededRng& rng) {
  Mlp net(std::move(widths), normalize_output);
  for (auto& layer : net.layers_) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = scale * rng.normal();
    }
  }
  return net;
}

Mlp::Cache Mlp::forward_cached(const Matrix& batch) const {
  if (batch.rows() != input_dim()) {
    std::ostringstream os;
    os << "Mlp::forward: observation dimension " << batch.rows() << " != input width " << input_dim();
    throw DimensionError(os.str());
  }
  Cache cache;
  cache.input = batch;
  const Matrix* current = &cache.input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Matrix z = layers_[i].weight * (*current);
    z.colwise() += layers_[i].bias;
    cache.pre.push_back(std::move(z));
    if (i + 1 < layers_.size()) {
      cache.post.push_back(silu(cache.pre.back()));
    } else {
      cache.post.push_back(cache.pre.back());
    }
    current = &cache.post.back();
  }
  const Matrix& raw = cache.post.back();
  if (normalize_output_) {
    cache.norms = raw.colwise().norm().transpose().cwiseMax(kNormFloor);
    cache.output = raw * cache.norms.cwiseInverse().asDiagonal();
  } else {
    cache.output = raw;
  }
  return cache;
}

Matrix Mlp::forward(const Matrix& batch) const { return forward_cached(batch).output; }

Vector Mlp::forward(const Vector& observation) const {
  return forward(Matrix(observation)).col(0);
}

MlpGradients Mlp::backward(const Cache& cache, const Matrix& upstream, Matrix* input_grad) const {
  if (upstream.rows() != output_dim() || upstream.cols() != cache.output.cols()) {
    throw DimensionError("Mlp::backward: upstream gradient shape does not match forward output");
  }
  Matrix delta;
  if (normalize_output_) {
    // d(y/|y|) = (I − e eᵀ) dy / |y|
    const Matrix& e = cache.output;
    const Eigen::RowVectorXd proj = (e.array() * upstream.array()).colwise().sum();
    delta = (upstream - e * proj.asDiagonal()) * cache.norms.cwiseInverse().asDiagonal();
  } else {
    delta = upstream;
  }
  MlpGradients grads(layers_.size());
  for (std::size_t k = layers_.size(); k-- > 0;) {
    if (k + 1 < layers_.size()) {
      delta = delta.cwiseProduct(silu_derivative(cache.pre[k]));
    }
    const Matrix& in = (k == 0) ? cache.input : cache.post[k - 1];
    grads[k].weight = delta * in.transpose();
    grads[k].bias = delta.rowwise().sum();
    if (k > 0 || input_grad != nullptr) {
      Matrix next = layers_[k].weight.transpose() * delta;
      if (k == 0) {
        *input_grad = std::move(next);
      } else {
        delta = std::move(next);
      }
    }
  }
  return grads;
}

MlpGradients Mlp::backward(const Matrix& batch, const Matrix& upstream) const {
  return backward(forward_cached(batch), upstream);
}

MlpGradients Mlp::zero_gradients() const {
  MlpGradients g;
  for (const auto& layer : layers_) {
    g.push_back({Matrix::Zero(layer.weight.rows(), layer.weight.cols()),
                 Vector::Zero(layer.bias.size())});
  }
  return g;
}

Eigen::Index Mlp::parameter_count() const {
  Eigen::Index n = 0;
  for (const auto& layer : layers_) n += layer.weight.size() + layer.bias.size();
  return n;
}

Vector flatten(const MlpGradients& grads) {
  Eigen::Index n = 0;
  for (const auto& g : grads) n += g.weight.size() + g.bias.size();
  Vector flat(n);
  Eigen::Index offset = 0;
  for (const auto& g : grads) {
    for (Eigen::Index r = 0; r < g.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < g.weight.cols(); ++c) flat[offset++] = g.weight(r, c);
    }
    flat.segment(offset, g.bias.size()) = g.bias;
    offset += g.bias.size();
  }
  return flat;
}

MlpGradients unflatten_like(const Mlp& net, const Vector& flat) {
  if (flat.size() != net.parameter_count()) {
    throw DimensionError("unflatten_like: flat vector has the wrong length");
  }
  MlpGradients out = net.zero_gradients();
  Eigen::Index offset = 0;
  for (auto& g : out) {
    for (Eigen::Index r = 0; r < g.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < g.weight.cols(); ++c) g.weight(r, c) = flat[offset++];
    }
    g.bias = flat.segment(offset, g.bias.size());
    offset += g.bias.size();
  }
  return out;
}

Vector Mlp::flat_parameters() const { return flatten(layers_); }

void Mlp::set_flat_parameters(const Vector& flat) { layers_ = unflatten_like(*this, flat); }

std::string Mlp::parameter_name(std::size_t layer, bool bias) const {
  std::ostringstream os;
  os << "layer" << layer << (bias ? ".bias" : ".weight");
  return os.str();
}

void accumulate(MlpGradients& into, const MlpGradients& g, double scale) {
  if (into.size() != g.size()) throw DimensionError("accumulate: layer count mismatch");
  for (std::size_t i = 0; i < g.size(); ++i) {
    into[i].weight += scale * g[i].weight;
    into[i].bias += scale * g[i].bias;
  }
}

EmbeddingNet make_embedding_net(int input_dim, SeededRng& rng, const std::vector<int>& hidden,
                                int output_dim, bool normalize) {
  std::vector<int> widths{input_dim};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(output_dim);
  return Mlp::random(widths, normalize, rng);
}

OptimizerState make_optimizer(const Mlp& net, const AdamSettings& settings) {
  OptimizerState s;
  s.settings = settings;
  s.first_moment = net.zero_gradients();
  s.second_moment = net.zero_gradients();
  return s;
}

void train_step(Mlp& net, OptimizerState& opt, const MlpGradients& gradient) {
  auto& layers = net.layers();
  if (gradient.size() != layers.size() || opt.first_moment.size() != layers.size()) {
    throw DimensionError("train_step: gradient layout does not match the network");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (gradient[i].weight.rows() != layers[i].weight.rows() ||
        gradient[i].weight.cols() != layers[i].weight.cols() ||
        gradient[i].bias.size() != layers[i].bias.size()) {
      throw DimensionError("train_step: gradient shape mismatch at " + net.parameter_name(i, false));
    }
    if (!gradient[i].weight.allFinite()) {
      throw DivergenceError(net.parameter_name(i, false),
                            "non-finite gradient in " + net.parameter_name(i, false));
    }
    if (!gradient[i].bias.allFinite()) {
      throw DivergenceError(net.parameter_name(i, true),
                            "non-finite gradient in " + net.parameter_name(i, true));
    }
  }
  const auto& s = opt.settings;
  opt.step += 1;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(opt.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(opt.step));
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = s.beta1 * m + (1.0 - s.beta1) * g;
    v = s.beta2 * v + (1.0 - s.beta2) * g.cwiseProduct(g);
    param.array() -= s.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + s.epsilon);
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    update(layers[i].weight, opt.first_moment[i].weight, opt.second_moment[i].weight,
           gradient[i].weight);
    update(layers[i].bias, opt.first_moment[i].bias, opt.second_moment[i].bias, gradient[i].bias);
  }
}

nlohmann::json matrix_to_json(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw std::runtime_error("matrix_from_json: data length does not match rows*cols");
  }
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[k++].get<double>();
  }
  return m;
}

namespace {

nlohmann::json layers_to_json(const std::vector<DenseLayer>& layers) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& l : layers) {
    arr.push_back({{"weight", matrix_to_json(l.weight)}, {"bias", matrix_to_json(l.bias)}});
  }
  return arr;
}

std::vector<DenseLayer> layers_from_json(const nlohmann::json& arr) {
  std::vector<DenseLayer> layers;
  for (const auto& l : arr) {
    layers.push_back({matrix_from_json(l.at("weight")), matrix_from_json(l.at("bias")).col(0)});
  }
  return layers;
}

}  // namespace

nlohmann::json Mlp::to_json() const {
  return {{"widths", widths_},
          {"activation", "silu"},
          {"normalize_output", normalize_output_},
          {"layers", layers_to_json(layers_)}};
}

Mlp Mlp::from_json(const nlohmann::json& j) {
  if (j.value("activation", "silu") != "silu") {
    throw std::runtime_error("Mlp::from_json: unsupported activation");
  }
  Mlp net(j.at("widths").get<std::vector<int>>(), j.at("normalize_output").get<bool>());
  auto layers = layers_from_json(j.at("layers"));
  if (layers.size() != net.layers_.size()) {
    throw std::runtime_error("Mlp::from_json: layer count does not match widths");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].weight.rows() != net.layers_[i].weight.rows() ||
        layers[i].weight.cols() != net.layers_[i].weight.cols() ||
        layers[i].bias.size() != net.layers_[i].bias.size()) {
      throw std::runtime_error("Mlp::from_json: layer shape does not match widths");
    }
  }
  net.layers_ = std::move(layers);
  return net;
}

nlohmann::json OptimizerState::to_json() const {
  return {{"learning_rate", settings.learning_rate},
          {"beta1", settings.beta1},
          {"beta2", settings.beta2},
          {"epsilon", settings.epsilon},
          {"step", step},
          {"first_moment", layers_to_json(first_moment)},
          {"second_moment", layers_to_json(second_moment)}};
}

OptimizerState OptimizerState::from_json(const nlohmann::json& j) {
  OptimizerState s;
  s.settings.learning_rate = j.at("learning_rate").get<double>();
  s.settings.beta1 = j.at("beta1").get<double>();
  s.settings.beta2 = j.at("beta2").get<double>();
  s.settings.epsilon = j.at("epsilon").get<double>();
  s.step = j.at("step").get<long>();
  s.first_moment = layers_from_json(j.at("first_moment"));
  s.second_moment = layers_from_json(j.at("second_moment"));
  return s;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  nlohmann::json j;
  j["format"] = "tcn-checkpoint";
  j["version"] = kCheckpointVersion;
  j["config_hash"] = ck.config_hash;
  j["step"] = ck.step;
  j["networks"] = nlohmann::json::object();
  for (const auto& [name, net] : ck.networks) j["networks"][name] = net.to_json();
  j["optimizers"] = nlohmann::json::object();
  for (const auto& [name, opt] : ck.optimizers) j["optimizers"][name] = opt.to_json();
  j["tensors"] = nlohmann::json::object();
  for (const auto& [name, m] : ck.tensors) j["tensors"][name] = matrix_to_json(m);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out << j.dump();
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("load_checkpoint: malformed checkpoint " + path + ": " + e.what());
  }
  if (j.value("format", "") != "tcn-checkpoint") {
    throw std::runtime_error("load_checkpoint: " + path + " is not a checkpoint");
  }
  if (j.value("version", 0) != kCheckpointVersion) {
    throw std::runtime_error("load_checkpoint: unsupported checkpoint version in " + path);
  }
  Checkpoint ck;
  ck.config_hash = j.value("config_hash", "");
  ck.step = j.value("step", 0L);
  for (const auto& [name, v] : j.at("networks").items()) ck.networks.emplace(name, Mlp::from_json(v));
  if (j.contains("optimizers")) {
    for (const auto& [name, v] : j.at("optimizers").items()) {
      ck.optimizers.emplace(name, OptimizerState::from_json(v));
    }
  }
  if (j.contains("tensors")) {
    for (const auto& [name, v] : j.at("tensors").items()) ck.tensors.emplace(name, matrix_from_json(v));
  }
  return ck;
}

}  // namespace tcn
