#include "tcn/eval.hpp"

#include <limits>
#include <set>

namespace tcn {
namespace {

void check_labels(const AttributeLabelSet& labels, Eigen::Index frames, const char* which) {
  if (labels.empty()) throw std::invalid_argument(std::string("classification: no attributes in ") + which);
  for (const auto& [name, values] : labels) {
    if (static_cast<Eigen::Index>(values.size()) != frames) {
      throw DimensionError(std::string("classification: attribute '") + name + "' in " + which +
                           " has " + std::to_string(values.size()) + " labels for " +
                           std::to_string(frames) + " frames");
    }
  }
}

// Class-balanced error given per-query predictions.
double balanced_error(const std::vector<int>& truth, const std::vector<int>& predicted) {
  std::map<int, std::pair<int, int>> per_class;  // class → (errors, count)
  for (std::size_t i = 0; i < truth.size(); ++i) {
    auto& c = per_class[truth[i]];
    c.second += 1;
    if (predicted[i] != truth[i]) c.first += 1;
  }
  double sum = 0.0;
  for (const auto& [cls, c] : per_class) sum += static_cast<double>(c.first) / c.second;
  return sum / static_cast<double>(per_class.size());
}

}  // namespace

ClassificationResult classification_error_knn(const Matrix& reference, const AttributeLabelSet& reference_labels,
                                              const Matrix& query, const AttributeLabelSet& query_labels,
                                              bool exclude_same_index) {
  check_labels(reference_labels, reference.cols(), "reference");
  check_labels(query_labels, query.cols(), "query");
  if (exclude_same_index && reference.cols() != query.cols()) {
    throw std::invalid_argument("classification: self-exclusion needs identical reference and query sets");
  }
  if (reference.cols() < (exclude_same_index ? 2 : 1)) throw std::invalid_argument("classification: empty reference set");
  std::vector<int> nn;
  if (!exclude_same_index) {
    nn = nearest_neighbors(query, reference);
  } else {
    const Vector cn = reference.colwise().squaredNorm().transpose();
    const Matrix dots = reference.transpose() * query;
    nn.resize(static_cast<std::size_t>(query.cols()));
    for (Eigen::Index q = 0; q < query.cols(); ++q) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < reference.cols(); ++c) {
        if (c == q) continue;
        const double d = cn[c] - 2.0 * dots(c, q);
        if (d < best) {
          best = d;
          nn[static_cast<std::size_t>(q)] = static_cast<int>(c);
        }
      }
    }
  }
  ClassificationResult out;
  double sum = 0.0;
  for (const auto& [name, truth] : query_labels) {
    const auto it = reference_labels.find(name);
    if (it == reference_labels.end()) {
      throw std::invalid_argument("classification: attribute '" + name + "' missing from the reference labels");
    }
    std::vector<int> predicted(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) predicted[i] = it->second[static_cast<std::size_t>(nn[i])];
    const std::set<int> query_classes(truth.begin(), truth.end());
    for (int c : std::set<int>(it->second.begin(), it->second.end())) {
      if (!query_classes.count(c)) out.excluded_classes.push_back(name + "=" + std::to_string(c));
    }
    out.per_attribute[name] = balanced_error(truth, predicted);
    sum += out.per_attribute[name];
  }
  out.aggregate = sum / static_cast<double>(out.per_attribute.size());
  return out;
}

ClassificationResult chance_classification_error(const AttributeLabelSet& reference_labels,
                                                 const AttributeLabelSet& query_labels) {
  ClassificationResult out;
  double sum = 0.0;
  for (const auto& [name, truth] : query_labels) {
    const auto it = reference_labels.find(name);
    if (it == reference_labels.end() || it->second.empty()) {
      throw std::invalid_argument("chance_classification_error: no reference labels for '" + name + "'");
    }
    std::map<int, double> prior;
    for (int c : it->second) prior[c] += 1.0 / static_cast<double>(it->second.size());
    const std::set<int> classes(truth.begin(), truth.end());
    double err = 0.0;
    for (int c : classes) err += 1.0 - (prior.count(c) ? prior[c] : 0.0);
    for (const auto& [c, unused] : prior) {
      (void)unused;
      if (!classes.count(c)) out.excluded_classes.push_back(name + "=" + std::to_string(c));
    }
    out.per_attribute[name] = err / static_cast<double>(classes.size());
    sum += out.per_attribute[name];
  }
  out.aggregate = sum / static_cast<double>(out.per_attribute.size());
  return out;
}

AttributeLabelSet concatenate_labels(const std::vector<AttributeLabelSet>& parts) {
  AttributeLabelSet out;
  for (const auto& p : parts) {
    if (!parts.empty() && p.size() != parts[0].size()) {
      throw std::invalid_argument("concatenate_labels: attribute sets differ");
    }
    for (const auto& [name, values] : p) {
      if (!parts[0].count(name)) throw std::invalid_argument("concatenate_labels: attribute '" + name + "' not in every part");
      auto& dst = out[name];
      dst.insert(dst.end(), values.begin(), values.end());
    }
  }
  return out;
}

}  // namespace tcn
