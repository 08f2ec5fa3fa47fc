#pragma once

#include "tcn/mlp.hpp"
#include "tcn/numerics.hpp"
#include "tcn/sequence.hpp"

#include <map>
#include <string>
#include <vector>

namespace tcn {

enum class AlignmentNormalization {
  // |nn − target| / (N₂ − 1): always in [0, 1]
  kSequence,
  // |nn − target| / length of the keyframe segment holding the target, clamped to 1
  kSegment,
};

struct AlignmentOptions {
  AlignmentNormalization normalization = AlignmentNormalization::kSequence;
};

// Real-valued position in sequence 2 corresponding to `frame` of sequence 1 under
// the piecewise-linear map through (0, 0), the four keyframe pairs and (N₁−1, N₂−1).
double corresponding_position(int frame, int n1, int n2, const KeyframeAlignment& k1,
                              const KeyframeAlignment& k2);

// Index of the nearest column of `candidates` (Euclidean, first on ties) for each query column.
std::vector<int> nearest_neighbors(const Matrix& queries, const Matrix& candidates);

// Mean over frames of sequence 1 of the normalized distance between its nearest
// neighbor in sequence 2 and the corresponding position. Embeddings are d × N.
double alignment_error(const Matrix& emb1, const Matrix& emb2, const KeyframeAlignment& k1,
                       const KeyframeAlignment& k2, const AlignmentOptions& options = {});

double alignment_error(const EmbeddingNet& net, const Matrix& frames1, const Matrix& frames2,
                       const KeyframeAlignment& k1, const KeyframeAlignment& k2,
                       const AlignmentOptions& options = {});

// Exact expectation of alignment_error when every nearest neighbor is uniform over sequence 2.
double random_alignment_error(int n1, int n2, const KeyframeAlignment& k1, const KeyframeAlignment& k2,
                              const AlignmentOptions& options = {});

struct ClassificationResult {
  std::map<std::string, double> per_attribute;
  double aggregate = 0.0;
  // Classes of the reference priors that had no query frames, as "attribute=class".
  std::vector<std::string> excluded_classes;
};

// 1-NN label transfer per attribute, class-balanced error (mean over query classes of
// the within-class error rate), aggregate = unweighted mean over attributes. With
// exclude_same_index the query and reference sets are the same frames and a frame
// never retrieves itself.
ClassificationResult classification_error_knn(const Matrix& reference, const AttributeLabelSet& reference_labels,
                                              const Matrix& query, const AttributeLabelSet& query_labels,
                                              bool exclude_same_index = false);

// Class-balanced error of a classifier that draws labels from the reference prior.
ClassificationResult chance_classification_error(const AttributeLabelSet& reference_labels,
                                                 const AttributeLabelSet& query_labels);

// argmin, earliest index on ties.
std::size_t select_model_by_val_loss(const std::vector<double>& validation_losses);
std::size_t select_model_by_val_classification(const std::vector<double>& validation_errors);

// Concatenates per-sequence label sets frame-wise (attributes must agree).
AttributeLabelSet concatenate_labels(const std::vector<AttributeLabelSet>& parts);

}  // namespace tcn
