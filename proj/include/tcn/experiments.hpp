#pragma once

#include "tcn/config.hpp"
#include "tcn/envsim.hpp"
#include "tcn/eval.hpp"
#include "tcn/imitation.hpp"
#include "tcn/pouring_task.hpp"
#include "tcn/rl.hpp"
#include "tcn/trainer.hpp"

#include <functional>
#include <string>
#include <vector>

namespace tcn {

// ---------------------------------------------------------------------------
// Config → module settings

PouringConfig pouring_config(const ExperimentConfig& c);
PoseConfig pose_config(const ExperimentConfig& c);
TrainerConfig trainer_config(const ExperimentConfig& c);
RewardParams reward_params(const ExperimentConfig& c);
PilqrConfig pilqr_config(const ExperimentConfig& c);
AlignmentOptions alignment_options(const ExperimentConfig& c);
SupervisionConfig supervision_config(const ExperimentConfig& c, const std::string& spec);

// ---------------------------------------------------------------------------
// Pouring corpus

struct PouringDataset {
  std::vector<GeneratedSequence> train;
  std::vector<GeneratedSequence> validation;
  std::vector<GeneratedSequence> test;

  const GeneratedSequence& find(const std::string& id) const;
};

// Sequence i of the corpus is drawn from its own stream mix_seed(seed, i).
PouringDataset generate_pouring_dataset(const PouringWorld& world, std::uint64_t seed);

std::vector<MultiViewSequence> sequences_of(const std::vector<GeneratedSequence>& generated);

// Refuses to overwrite an existing store.
void write_pouring_dataset(const std::string& dir, const PouringDataset& data, const std::string& config_hash);
PouringDataset load_pouring_dataset(const std::string& dir);

// ---------------------------------------------------------------------------
// Embeddings

// Maps D × N observations to d × N embeddings.
using Embedder = std::function<Matrix(const Matrix&)>;

Embedder net_embedder(const EmbeddingNet& net);
// Independent uniformly random unit vectors per frame (chance-level control).
Embedder random_embedder(int dim, std::uint64_t seed);

void save_embedding_checkpoint(const std::string& path, const EmbeddingNet& net, const OrderHead* head,
                               const std::string& config_hash, long step);
EmbeddingNet load_embedding_checkpoint(const std::string& path);

struct EmbeddingEvaluation {
  double alignment_error = 0.0;
  double random_alignment_error = 0.0;
  int pairs = 0;
  ClassificationResult classification;
  ClassificationResult chance;
};

// Alignment over ordered test pairs (view 0 of the first against view 1 of the second);
// classification with validation frames as reference and test frames as queries.
EmbeddingEvaluation evaluate_embedding(const Embedder& embed, const PouringDataset& data,
                                       const AlignmentOptions& options = {});

struct SelectionRow {
  long step = 0;
  double validation_loss = 0.0;
  double validation_classification_error = 0.0;
  double test_classification_error = 0.0;
};

struct ModelSelectionReport {
  std::vector<SelectionRow> rows;
  std::size_t by_loss = 0;
  std::size_t by_classification = 0;
};

// Validation classification uses leave-one-out retrieval within the validation frames.
ModelSelectionReport compare_model_selection(const TrainingResult& result, const PouringDataset& data);

struct TableOneRow {
  std::string method;
  std::uint64_t seed = 0;
  EmbeddingEvaluation evaluation;
};

// Methods: "random" or "<sampler>-<loss>", e.g. "multiview-triplet", "singleview-triplet",
// "multiview-npairs", "singleview-shuffle-learn". Each seed draws its own corpus.
std::vector<TableOneRow> run_table_one(const ExperimentConfig& c, const std::vector<std::string>& methods,
                                       const std::vector<std::uint64_t>& seeds);

void write_table_one(const std::string& dir, const std::vector<TableOneRow>& rows, const std::string& config_hash);

// ---------------------------------------------------------------------------
// Policy learning on the arm surrogate

struct PolicyRunResult {
  std::string demo_id;
  int horizon = 0;
  std::vector<IterationMetrics> curve;  // iterations + 1 rows
  // Mean final fill of the mean-action policy on fixed evaluation streams, per row.
  std::vector<double> policy_success;
  TVLGPolicy policy;
};

PolicyRunResult run_policy_learning(const PouringWorld& world, const EmbeddingNet& net, const GeneratedSequence& demo,
                                    const ExperimentConfig& c, std::uint64_t seed);

void write_policy_curve(const std::string& path, const PolicyRunResult& result, const std::string& config_hash);

// ---------------------------------------------------------------------------
// Pose imitation

struct PoseDatasets {
  std::vector<GeneratedSequence> mixed;  // robot views then human views
  std::vector<GeneratedSequence> self;
  std::vector<GeneratedSequence> human;
  std::vector<GeneratedSequence> test;   // training views followed by the held-out view
  RegressionSet self_data;
  RegressionSet human_clean;
  RegressionSet test_data;
  RegressionSet heldout_data;
};

PoseDatasets generate_pose_datasets(const PoseWorld& world, const ExperimentConfig& c, std::uint64_t seed);

// Multi-view triplet embedding trained on the mixed human/robot sequences.
EmbeddingNet train_pose_tc_embedding(const PoseDatasets& data, const ExperimentConfig& c, std::uint64_t seed);

struct PoseSeedResult {
  std::map<std::string, JointErrorReport> test;
  std::map<std::string, JointErrorReport> heldout;
  JointErrorReport random;
  JointErrorReport random_heldout;
  JointErrorReport random_expected;
};

// `tc_net` overrides the per-seed TC pretraining when given.
PoseSeedResult run_pose_seed(const PoseWorld& world, const ExperimentConfig& c, std::uint64_t seed,
                             const EmbeddingNet* tc_net = nullptr);

struct PoseTable {
  std::vector<std::string> supervision;  // row order, without "Random"
  std::vector<PoseSeedResult> seeds;
};

PoseTable run_pose_experiment(const ExperimentConfig& c, const std::vector<std::uint64_t>& seeds,
                              const EmbeddingNet* tc_net = nullptr);

void write_pose_table(const std::string& dir, const PoseTable& table, const std::string& config_hash);

// ---------------------------------------------------------------------------

void write_embeddings_csv(const std::string& path, const Embedder& embed,
                          const std::vector<MultiViewSequence>& sequences, const std::string& config_hash);

// Sample mean and standard deviation (n − 1 denominator; 0 for one value).
double mean_of(const std::vector<double>& v);
double std_of(const std::vector<double>& v);

// `count` seeds derived from `base`: base, base + 1, …
std::vector<std::uint64_t> seed_list(std::uint64_t base, int count);

}  // namespace tcn
