#include "tcn/experiments.hpp"

#include "tcn/csv.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <numeric>

namespace fs = std::filesystem;

namespace tcn {

// ---------------------------------------------------------------------------
// Config mapping

PouringConfig pouring_config(const ExperimentConfig& c) {
  PouringConfig p;
  p.frame_rate = c.get_double("data.frame_rate");
  p.observation_dim = c.get_int("data.observation_dim");
  p.noise_scale = c.get_double("data.noise");
  p.min_duration = c.get_double("data.min_duration");
  p.max_duration = c.get_double("data.max_duration");
  p.train_sequences = c.get_int("data.train");
  p.validation_sequences = c.get_int("data.validation");
  p.test_sequences = c.get_int("data.test");
  p.renderer_seed = c.get_u64("data.renderer_seed");
  if (p.min_duration < kMinPouringDuration || p.max_duration < p.min_duration) {
    throw ConfigError("data.min_duration", "durations must satisfy 3 <= min <= max");
  }
  if (p.train_sequences < 1 || p.validation_sequences < 1 || p.test_sequences < 2) {
    throw ConfigError("data.test", "need at least one train/validation and two test sequences");
  }
  return p;
}

PoseConfig pose_config(const ExperimentConfig& c) {
  PoseConfig p;
  p.frame_rate = c.get_double("data.frame_rate");
  p.observation_dim = c.get_int("data.observation_dim");
  p.noise_scale = c.get_double("data.noise");
  p.renderer_seed = c.get_u64("pose.renderer_seed");
  return p;
}

TrainerConfig trainer_config(const ExperimentConfig& c) {
  TrainerConfig t;
  t.loss = parse_loss(c.get("train.loss"));
  t.sampler = parse_sampler(c.get("train.sampler"));
  t.steps = c.get_int("train.steps");
  t.batch_size = c.get_int("train.batch_size");
  t.eval_every = c.get_int("train.eval_every");
  t.checkpoint_every = c.get_int("train.checkpoint_every");
  t.validation_batches = c.get_int("train.validation_batches");
  t.adam.learning_rate = c.get_double("train.learning_rate");
  t.triplet_margin = c.get_double("train.triplet_margin");
  t.lifted_margin = c.get_double("train.lifted_margin");
  t.multiview.negative_exclusion_seconds = c.get_double("train.negative_exclusion");
  t.positive_range = c.get_double("train.positive_range");
  t.negative_multiplier = c.get_double("train.negative_multiplier");
  t.shuffle_tmax = c.get_int("train.shuffle_tmax");
  t.shuffle_tmin = c.get_int("train.shuffle_tmin");
  t.shuffle_negative_ratio = c.get_double("train.shuffle_negative_ratio");
  t.hidden.clear();
  for (double h : c.get_doubles("train.hidden")) t.hidden.push_back(static_cast<int>(h));
  t.embedding_dim = c.get_int("train.embedding_dim");
  if (t.steps < 1) throw ConfigError("train.steps", "must be >= 1");
  if (t.eval_every < 1 || t.checkpoint_every < 1) throw ConfigError("train.eval_every", "intervals must be >= 1");
  return t;
}

RewardParams reward_params(const ExperimentConfig& c) {
  RewardParams p;
  p.alpha = c.get_double("reward.alpha");
  p.beta = c.get_double("reward.beta");
  p.gamma = c.get_double("reward.gamma");
  p.action_weight = c.get_double("reward.action_weight");
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("reward", e.what());
  }
  return p;
}

PilqrConfig pilqr_config(const ExperimentConfig& c) {
  PilqrConfig p;
  p.rollouts = c.get_int("rl.rollouts");
  p.kl_epsilon = c.get_double("rl.epsilon");
  p.use_pi2 = c.get_bool("rl.use_pi2");
  p.fit.prior_strength = c.get_double("rl.prior_strength");
  if (p.rollouts < 2) throw ConfigError("rl.rollouts", "need at least 2 rollouts per iteration");
  if (!(p.kl_epsilon > 0.0)) throw ConfigError("rl.epsilon", "must be > 0");
  return p;
}

AlignmentOptions alignment_options(const ExperimentConfig& c) {
  const std::string& n = c.get("eval.normalization");
  AlignmentOptions o;
  if (n == "sequence") {
    o.normalization = AlignmentNormalization::kSequence;
  } else if (n == "segment") {
    o.normalization = AlignmentNormalization::kSegment;
  } else {
    throw ConfigError("eval.normalization", "expected 'sequence' or 'segment', got '" + n + "'");
  }
  return o;
}

SupervisionConfig supervision_config(const ExperimentConfig& c, const std::string& spec) {
  SupervisionConfig s;
  try {
    s = parse_supervision(spec);
    s.human_label_noise = c.get_double("pose.label_noise");
    s.fine_tune = c.get_bool("pose.fine_tune");
    s.steps = c.get_int("pose.decoder_steps");
    s.batch_size = c.get_int("pose.batch_size");
    s.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("pose.supervision", "'" + spec + "': " + e.what());
  }
  return s;
}

// ---------------------------------------------------------------------------
// Pouring corpus

const GeneratedSequence& PouringDataset::find(const std::string& id) const {
  for (const auto* split : {&train, &validation, &test}) {
    for (const auto& g : *split) {
      if (g.sequence.id() == id) return g;
    }
  }
  throw std::invalid_argument("no sequence '" + id + "' in the dataset");
}

PouringDataset generate_pouring_dataset(const PouringWorld& world, std::uint64_t seed) {
  const PouringConfig& p = world.config();
  PouringDataset data;
  const int total = p.train_sequences + p.validation_sequences + p.test_sequences;
  for (int i = 0; i < total; ++i) {
    SeededRng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
    const double duration = rng.uniform(p.min_duration, p.max_duration);
    char id[32];
    std::snprintf(id, sizeof id, "pour-%03d", i);
    auto g = world.generate(rng, id, duration);
    if (i < p.train_sequences) {
      data.train.push_back(std::move(g));
    } else if (i < p.train_sequences + p.validation_sequences) {
      data.validation.push_back(std::move(g));
    } else {
      data.test.push_back(std::move(g));
    }
  }
  return data;
}

std::vector<MultiViewSequence> sequences_of(const std::vector<GeneratedSequence>& generated) {
  std::vector<MultiViewSequence> out;
  out.reserve(generated.size());
  for (const auto& g : generated) out.push_back(g.sequence);
  return out;
}

void write_pouring_dataset(const std::string& dir, const PouringDataset& data, const std::string& config_hash) {
  if (fs::exists(fs::path(dir) / "manifest.json")) {
    throw std::runtime_error("refusing to overwrite the dataset in '" + dir + "'");
  }
  StoreManifest m;
  m.kind = "pouring";
  m.config_hash = config_hash;
  std::vector<std::pair<MultiViewSequence, std::string>> seqs;
  std::vector<EvaluationSidecar> sidecars;
  for (const auto& [split, part] : {std::pair{"train", &data.train}, std::pair{"validation", &data.validation},
                                    std::pair{"test", &data.test}}) {
    for (const auto& g : *part) {
      seqs.emplace_back(g.sequence, split);
      sidecars.push_back(g.sidecar);
      m.observation_dim = g.sequence.observation_dim();
    }
  }
  write_store(dir, m, seqs, sidecars);
}

PouringDataset load_pouring_dataset(const std::string& dir) {
  SequenceStore store(dir);
  PouringDataset data;
  for (const auto& [split, part] :
       {std::pair{"train", &data.train}, std::pair{"validation", &data.validation}, std::pair{"test", &data.test}}) {
    for (const auto& id : store.ids(split)) part->push_back({store.load(id), load_sidecar(dir, id)});
  }
  if (data.train.empty() || data.validation.empty() || data.test.empty()) {
    throw std::runtime_error("dataset '" + dir + "' lacks a train, validation or test split");
  }
  return data;
}

// ---------------------------------------------------------------------------
// Embeddings

Embedder net_embedder(const EmbeddingNet& net) {
  auto shared = std::make_shared<EmbeddingNet>(net);
  return [shared](const Matrix& frames) { return shared->forward(frames); };
}

Embedder random_embedder(int dim, std::uint64_t seed) {
  auto rng = std::make_shared<SeededRng>(seed);
  return [rng, dim](const Matrix& frames) {
    Matrix out(dim, frames.cols());
    for (Eigen::Index k = 0; k < frames.cols(); ++k) out.col(k) = rng->normal_vector(dim).normalized();
    return out;
  };
}

void save_embedding_checkpoint(const std::string& path, const EmbeddingNet& net, const OrderHead* head,
                               const std::string& config_hash, long step) {
  Checkpoint ck;
  ck.networks.emplace("embedding", net);
  if (head != nullptr) ck.networks.emplace("order_head", *head);
  ck.config_hash = config_hash;
  ck.step = step;
  save_checkpoint(path, ck);
}

EmbeddingNet load_embedding_checkpoint(const std::string& path) {
  Checkpoint ck = load_checkpoint(path);
  const auto it = ck.networks.find("embedding");
  if (it == ck.networks.end()) throw std::runtime_error("checkpoint '" + path + "' has no 'embedding' network");
  return it->second;
}

namespace {

struct EmbeddedFrames {
  Matrix embeddings;
  AttributeLabelSet labels;
};

EmbeddedFrames embed_views(const Embedder& embed, const std::vector<GeneratedSequence>& seqs,
                           const std::vector<int>& views) {
  std::vector<Matrix> parts;
  std::vector<AttributeLabelSet> labels;
  Eigen::Index cols = 0;
  for (const auto& g : seqs) {
    for (int v : views) {
      parts.push_back(embed(g.sequence.view(v)));
      cols += parts.back().cols();
      labels.push_back(g.sidecar.attributes);
    }
  }
  EmbeddedFrames out;
  out.embeddings.resize(parts.empty() ? 0 : parts[0].rows(), cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.embeddings.middleCols(at, p.cols()) = p;
    at += p.cols();
  }
  out.labels = concatenate_labels(labels);
  return out;
}

}  // namespace

EmbeddingEvaluation evaluate_embedding(const Embedder& embed, const PouringDataset& data,
                                       const AlignmentOptions& options) {
  EmbeddingEvaluation ev;
  const auto& test = data.test;
  std::vector<Matrix> first, second;
  for (const auto& g : test) {
    if (!g.sidecar.keyframes) throw std::invalid_argument("evaluate_embedding: test sequence without keyframes");
    first.push_back(embed(g.sequence.view(0)));
    second.push_back(embed(g.sequence.view(1)));
  }
  double total = 0.0;
  double random_total = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    for (std::size_t j = 0; j < test.size(); ++j) {
      if (i == j) continue;
      const auto& ki = *test[i].sidecar.keyframes;
      const auto& kj = *test[j].sidecar.keyframes;
      total += alignment_error(first[i], second[j], ki, kj, options);
      random_total += random_alignment_error(static_cast<int>(first[i].cols()), static_cast<int>(second[j].cols()),
                                             ki, kj, options);
      ++ev.pairs;
    }
  }
  ev.alignment_error = total / ev.pairs;
  ev.random_alignment_error = random_total / ev.pairs;

  const auto ref = embed_views(embed, data.validation, {0, 1});
  const auto query = embed_views(embed, data.test, {0, 1});
  ev.classification = classification_error_knn(ref.embeddings, ref.labels, query.embeddings, query.labels);
  ev.chance = chance_classification_error(ref.labels, query.labels);
  return ev;
}

ModelSelectionReport compare_model_selection(const TrainingResult& result, const PouringDataset& data) {
  ModelSelectionReport report;
  std::vector<double> losses, errors;
  for (const auto& snap : result.checkpoints) {
    const Embedder embed = net_embedder(snap.net);
    // cross-view retrieval inside the validation split: no test labels involved
    const auto val_ref = embed_views(embed, data.validation, {0});
    const auto val_query = embed_views(embed, data.validation, {1});
    const auto test_query = embed_views(embed, data.test, {0, 1});
    SelectionRow row;
    row.step = snap.step;
    row.validation_loss = snap.validation_loss;
    row.validation_classification_error =
        classification_error_knn(val_ref.embeddings, val_ref.labels, val_query.embeddings, val_query.labels).aggregate;
    const auto ref = embed_views(embed, data.validation, {0, 1});
    row.test_classification_error =
        classification_error_knn(ref.embeddings, ref.labels, test_query.embeddings, test_query.labels).aggregate;
    losses.push_back(row.validation_loss);
    errors.push_back(row.validation_classification_error);
    report.rows.push_back(row);
  }
  if (!report.rows.empty()) {
    report.by_loss = select_model_by_val_loss(losses);
    report.by_classification = select_model_by_val_classification(errors);
  }
  return report;
}

std::vector<TableOneRow> run_table_one(const ExperimentConfig& c, const std::vector<std::string>& methods,
                                       const std::vector<std::uint64_t>& seeds) {
  const PouringWorld world(pouring_config(c));
  const TrainerConfig base = trainer_config(c);
  const AlignmentOptions options = alignment_options(c);
  std::vector<TableOneRow> rows;
  for (std::uint64_t seed : seeds) {
    const PouringDataset data = generate_pouring_dataset(world, seed);
    const auto train = sequences_of(data.train);
    const auto val = sequences_of(data.validation);
    for (const auto& method : methods) {
      TableOneRow row{method, seed, {}};
      if (method == "random") {
        row.evaluation = evaluate_embedding(random_embedder(base.embedding_dim, mix_seed(seed, 99)), data, options);
      } else {
        const auto dash = method.find('-');
        if (dash == std::string::npos) throw ConfigError("", "method '" + method + "' is not <sampler>-<loss>");
        TrainerConfig tc = base;
        tc.sampler = parse_sampler(method.substr(0, dash));
        tc.loss = parse_loss(method.substr(dash + 1));
        const TrainingResult res = train_embedding(train, val, tc, seed);
        row.evaluation = evaluate_embedding(net_embedder(res.net), data, options);
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_table_one(const std::string& dir, const std::vector<TableOneRow>& rows, const std::string& config_hash) {
  fs::create_directories(dir);
  CsvWriter align((fs::path(dir) / "alignment.csv").string(), schemas::alignment(), config_hash);
  CsvWriter cls((fs::path(dir) / "classification.csv").string(), schemas::classification(), config_hash);
  for (const auto& r : rows) {
    const auto seed = std::to_string(r.seed);
    align.row({r.method, seed, format_double(r.evaluation.alignment_error),
               format_double(r.evaluation.random_alignment_error), std::to_string(r.evaluation.pairs)});
    for (const auto& [attr, err] : r.evaluation.classification.per_attribute) {
      cls.row({r.method, seed, attr, format_double(err), format_double(r.evaluation.chance.per_attribute.at(attr))});
    }
    cls.row({r.method, seed, "aggregate", format_double(r.evaluation.classification.aggregate),
             format_double(r.evaluation.chance.aggregate)});
  }
}

// ---------------------------------------------------------------------------
// Policy learning

PolicyRunResult run_policy_learning(const PouringWorld& world, const EmbeddingNet& net, const GeneratedSequence& demo_seq,
                                    const ExperimentConfig& c, std::uint64_t seed) {
  const int demo_view = c.get_int("rl.demo_view");
  if (demo_view < 0 || demo_view >= demo_seq.sequence.num_views()) {
    throw ConfigError("rl.demo_view", "view outside the demonstration's views");
  }
  const int iterations = c.get_int("rl.iterations");
  if (iterations < 0) throw ConfigError("rl.iterations", "must be >= 0");
  const int evaluations = c.get_int("rl.success_evaluations");
  if (evaluations < 1) throw ConfigError("rl.success_evaluations", "must be >= 1");

  const PouringDemo demo = crop_pouring_demo(demo_seq, demo_view);
  const DemoEmbedding demo_embedding = embed_demonstration(net, demo.frames);
  ArmTaskConfig task_config;
  const ArmPouringTask task(world, task_config, net, demo.horizon());
  const EmbeddingTrackingCost cost(demo_embedding, reward_params(c), ArmPouringTask::kEmbeddingOffset);
  const TVLGPolicy initial = initial_arm_policy(demo.horizon(), task.state_dim(), c.get_double("rl.initial_variance"),
                                                c.get_double("rl.wrist_factor"), task_config.arm.wrist_joint);
  PilqrLearner learner(task, cost, initial, pilqr_config(c), seed);

  // same evaluation streams every iteration so successive policies are compared on equal terms
  const SeededRng eval_root(mix_seed(seed, 0x5eed));
  auto policy_success = [&]() {
    double sum = 0.0;
    for (int k = 0; k < evaluations; ++k) {
      SeededRng stream = eval_root.fork(static_cast<std::uint64_t>(k));
      sum += rollout(task, learner.policy(), cost, stream, true).success;
    }
    return sum / evaluations;
  };

  PolicyRunResult out;
  out.demo_id = demo.sequence_id;
  out.horizon = demo.horizon();
  for (int i = 0; i < iterations; ++i) {
    out.policy_success.push_back(policy_success());
    out.curve.push_back(learner.step());
  }
  out.policy_success.push_back(policy_success());
  out.curve.push_back(learner.evaluate());
  out.policy = learner.policy();
  return out;
}

void write_policy_curve(const std::string& path, const PolicyRunResult& r, const std::string& config_hash) {
  CsvWriter w(path, schemas::policy_curve(), config_hash);
  for (std::size_t i = 0; i < r.curve.size(); ++i) {
    const auto& m = r.curve[i];
    w.row({std::to_string(m.iteration), format_double(m.mean_cost), format_double(m.std_cost),
           format_double(m.min_cost), format_double(m.success_mean), format_double(m.success_std),
           format_double(r.policy_success[i]), format_double(m.kl), format_double(m.epsilon), format_double(m.eta),
           format_double(m.residual_rms), format_double(m.lqr_step_norm), format_double(m.pi2_correction_norm),
           m.epsilon_halved ? "1" : "0"});
  }
}

// ---------------------------------------------------------------------------
// Pose imitation

namespace {

RegressionSet collect_views(const std::vector<GeneratedSequence>& seqs, int first_view, int view_count) {
  Eigen::Index n = 0;
  for (const auto& g : seqs) n += static_cast<Eigen::Index>(view_count) * g.sequence.num_frames();
  RegressionSet r;
  r.observations.resize(seqs.empty() ? 0 : seqs[0].sequence.observation_dim(), n);
  r.joints.resize(kNumJoints, n);
  Eigen::Index at = 0;
  for (const auto& g : seqs) {
    const int t = g.sequence.num_frames();
    for (int v = first_view; v < first_view + view_count; ++v) {
      r.observations.middleCols(at, t) = g.sequence.view(v);
      r.joints.middleCols(at, t) = *g.sidecar.joints;
      at += t;
    }
  }
  return r;
}

std::string indexed_id(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%03d", prefix, i);
  return buf;
}

}  // namespace

PoseDatasets generate_pose_datasets(const PoseWorld& world, const ExperimentConfig& c, std::uint64_t seed) {
  const std::vector<double> views = c.get_doubles("pose.views");
  if (views.size() < 2) throw ConfigError("pose.views", "need at least two camera angles");
  std::vector<double> test_views = views;
  test_views.push_back(c.get_double("pose.heldout_view"));
  const double duration = c.get_double("pose.sequence_duration");
  const double human_duration = c.get_double("pose.human_duration");

  PoseDatasets d;
  auto stream = [seed](std::uint64_t group, int i) {
    return SeededRng(mix_seed(mix_seed(seed, group), static_cast<std::uint64_t>(i)));
  };
  for (int i = 0; i < c.get_int("pose.mixed_sequences"); ++i) {
    SeededRng r = stream(1, i);
    d.mixed.push_back(world.generate_mixed(r, indexed_id("mixed", i), duration, views));
  }
  for (int i = 0; i < c.get_int("pose.self_sequences"); ++i) {
    SeededRng r = stream(2, i);
    d.self.push_back(world.generate(r, indexed_id("self", i), Agent::kRobot, duration, views));
  }
  for (int i = 0; i < c.get_int("pose.human_sequences"); ++i) {
    SeededRng r = stream(3, i);
    d.human.push_back(world.generate(r, indexed_id("human", i), Agent::kHuman, human_duration, views));
  }
  for (int i = 0; i < c.get_int("pose.test_sequences"); ++i) {
    SeededRng r = stream(4, i);
    d.test.push_back(world.generate(r, indexed_id("test", i), Agent::kHuman, duration, test_views));
  }
  if (d.mixed.empty() || d.test.empty()) throw ConfigError("pose.test_sequences", "need mixed and test sequences");
  const int nv = static_cast<int>(views.size());
  if (!d.self.empty()) d.self_data = collect_views(d.self, 0, nv);
  if (!d.human.empty()) d.human_clean = collect_views(d.human, 0, nv);
  d.test_data = collect_views(d.test, 0, nv);
  d.heldout_data = collect_views(d.test, nv, 1);
  return d;
}

EmbeddingNet train_pose_tc_embedding(const PoseDatasets& data, const ExperimentConfig& c, std::uint64_t seed) {
  TrainerConfig tc = trainer_config(c);
  tc.loss = LossKind::kTriplet;
  tc.sampler = SamplerKind::kMultiView;
  tc.steps = c.get_int("pose.tc_steps");
  tc.eval_every = tc.steps;
  tc.checkpoint_every = tc.steps;
  const auto seqs = sequences_of(data.mixed);
  return train_embedding(seqs, {seqs.back()}, tc, seed).net;
}

PoseSeedResult run_pose_seed(const PoseWorld& world, const ExperimentConfig& c, std::uint64_t seed,
                             const EmbeddingNet* tc_net) {
  std::vector<SupervisionConfig> configs;
  bool any_tc = false;
  for (const auto& spec : c.get_list("pose.supervision")) {
    configs.push_back(supervision_config(c, spec));
    any_tc = any_tc || configs.back().time_contrastive;
  }
  if (configs.empty()) throw ConfigError("pose.supervision", "empty supervision set");

  const PoseDatasets data = generate_pose_datasets(world, c, mix_seed(seed, 1));
  EmbeddingNet tc;
  if (tc_net != nullptr) {
    tc = *tc_net;
  } else if (any_tc) {
    tc = train_pose_tc_embedding(data, c, mix_seed(seed, 2));
  }
  NoisyHumanLabels noisy;
  if (data.human_clean.size() > 0) {
    SeededRng noise(mix_seed(seed, 4));
    noisy = make_noisy_human_labels(data.human_clean, c.get_double("pose.label_noise"), world.ranges(), noise);
  }
  const TrainerConfig arch = trainer_config(c);

  PoseSeedResult out;
  for (const auto& sc : configs) {
    EmbeddingNet net;
    if (sc.time_contrastive) {
      net = tc;
    } else {
      SeededRng init(mix_seed(seed, 5));
      net = make_embedding_net(world.config().observation_dim, init, arch.hidden, arch.embedding_dim);
    }
    const PoseModel model = train_decoder(std::move(net), sc, &data.self_data, &noisy, world.ranges(), mix_seed(seed, 3));
    out.test[sc.name()] = joint_error(imitate(model, data.test_data.observations), data.test_data.joints, world.ranges());
    out.heldout[sc.name()] =
        joint_error(imitate(model, data.heldout_data.observations), data.heldout_data.joints, world.ranges());
  }
  SeededRng draws(mix_seed(seed, 6));
  out.random = random_joint_baseline(data.test_data.joints, world.ranges(), draws, 20);
  out.random_heldout = random_joint_baseline(data.heldout_data.joints, world.ranges(), draws, 20);
  out.random_expected = random_joint_error_expectation(data.test_data.joints, world.ranges());
  return out;
}

PoseTable run_pose_experiment(const ExperimentConfig& c, const std::vector<std::uint64_t>& seeds,
                              const EmbeddingNet* tc_net) {
  const PoseWorld world(pose_config(c));
  PoseTable table;
  for (const auto& spec : c.get_list("pose.supervision")) table.supervision.push_back(supervision_config(c, spec).name());
  for (std::uint64_t seed : seeds) table.seeds.push_back(run_pose_seed(world, c, seed, tc_net));
  return table;
}

void write_pose_table(const std::string& dir, const PoseTable& table, const std::string& config_hash) {
  fs::create_directories(dir);
  CsvWriter rows((fs::path(dir) / "pose_table.csv").string(), schemas::pose_table(), config_hash);
  CsvWriter joints((fs::path(dir) / "pose_joints.csv").string(), schemas::pose_joints(), config_hash);
  const auto n = std::to_string(table.seeds.size());

  auto emit = [&](const std::string& name, auto test_of, auto heldout_of) {
    std::vector<double> t, h;
    for (const auto& s : table.seeds) {
      t.push_back(test_of(s).mean);
      h.push_back(heldout_of(s).mean);
    }
    rows.row({name, format_double(mean_of(t)), format_double(std_of(t)), format_double(mean_of(h)),
              format_double(std_of(h)), n});
    for (int j = 0; j <= kNumJoints + 1; ++j) {
      std::vector<double> v;
      for (const auto& s : table.seeds) {
        const JointErrorReport& r = test_of(s);
        v.push_back(j < kNumJoints ? r.per_joint[j] : (j == kNumJoints ? r.mean : r.mean_excluding));
      }
      const std::string label = j < kNumJoints ? std::to_string(j) : (j == kNumJoints ? "all" : "all_excluding_0");
      joints.row({name, label, format_double(mean_of(v)), format_double(std_of(v))});
    }
  };
  emit("Random", [](const PoseSeedResult& s) -> const JointErrorReport& { return s.random; },
       [](const PoseSeedResult& s) -> const JointErrorReport& { return s.random_heldout; });
  for (const auto& name : table.supervision) {
    emit(name, [&name](const PoseSeedResult& s) -> const JointErrorReport& { return s.test.at(name); },
         [&name](const PoseSeedResult& s) -> const JointErrorReport& { return s.heldout.at(name); });
  }
}

// ---------------------------------------------------------------------------

void write_embeddings_csv(const std::string& path, const Embedder& embed,
                          const std::vector<MultiViewSequence>& sequences, const std::string& config_hash) {
  std::vector<Matrix> cache;
  int dim = -1;
  for (const auto& s : sequences) {
    for (int v = 0; v < s.num_views(); ++v) {
      cache.push_back(embed(s.view(v)));
      dim = static_cast<int>(cache.back().rows());
    }
  }
  std::vector<std::string> columns{"sequence_id", "view", "frame"};
  for (int i = 0; i < dim; ++i) columns.push_back("e" + std::to_string(i));
  CsvWriter w(path, schemas::embeddings(), config_hash, columns);
  std::size_t at = 0;
  for (const auto& s : sequences) {
    for (int v = 0; v < s.num_views(); ++v, ++at) {
      const Matrix& e = cache[at];
      for (Eigen::Index k = 0; k < e.cols(); ++k) {
        std::vector<std::string> cells{s.id(), std::to_string(v), std::to_string(k)};
        for (Eigen::Index i = 0; i < e.rows(); ++i) cells.push_back(format_double(e(i, k)));
        w.row(cells);
      }
    }
  }
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::vector<std::uint64_t> seed_list(std::uint64_t base, int count) {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < count; ++i) out.push_back(base + static_cast<std::uint64_t>(i));
  return out;
}

}  // namespace tcn
