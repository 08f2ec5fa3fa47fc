#include "tcn/eval.hpp"

#include <cmath>

namespace tcn {
namespace {

std::size_t argmin_earliest(const std::vector<double>& v, const char* who) {
  if (v.empty()) throw std::invalid_argument(std::string(who) + ": no checkpoints");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::isnan(v[i])) continue;
    if (std::isnan(v[best]) || v[i] < v[best]) best = i;
  }
  return best;
}

}  // namespace

std::size_t select_model_by_val_loss(const std::vector<double>& validation_losses) {
  return argmin_earliest(validation_losses, "select_model_by_val_loss");
}

std::size_t select_model_by_val_classification(const std::vector<double>& validation_errors) {
  return argmin_earliest(validation_errors, "select_model_by_val_classification");
}

}  // namespace tcn
