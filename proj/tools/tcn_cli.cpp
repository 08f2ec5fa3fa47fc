// Command-line front end: dataset generation, embedding training, evaluation,
// policy learning, pose imitation and embedding export.

#include "tcn/csv.hpp"
#include "tcn/experiments.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace tcn;

namespace {

struct Options {
  std::string config_path;
  std::string checkpoint;
  std::string out;
  std::string seed;
};

ExperimentConfig resolve_config(const Options& o) {
  ExperimentConfig c = o.config_path.empty() ? ExperimentConfig() : ExperimentConfig::load(o.config_path);
  if (!o.seed.empty()) c.set("seed", o.seed);
  c.get_u64("seed");  // validates
  return c;
}

// Outputs always go to a fresh (missing or empty) directory.
fs::path prepare_out(const Options& o) {
  if (o.out.empty()) throw ConfigError("--out", "an output directory is required");
  const fs::path dir(o.out);
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    throw ConfigError("--out", "'" + o.out + "' exists and is not empty; outputs go to fresh directories");
  }
  fs::create_directories(dir);
  return dir;
}

void write_resolved_config(const fs::path& dir, const ExperimentConfig& c) {
  std::ofstream f(dir / "config.txt");
  f << "# config_hash=" << c.hash() << "\n" << c.canonical();
}

std::string require_data_dir(const ExperimentConfig& c) {
  const std::string& d = c.get("data.dir");
  if (d.empty()) throw ConfigError("data.dir", "a dataset directory is required (run generate-data first)");
  return d;
}

EmbeddingNet embedding_for(const Options& o, const ExperimentConfig& c, const std::string& mode_key) {
  const std::string& mode = c.get(mode_key);
  if (mode == "random") {
    SeededRng rng(mix_seed(c.get_u64("seed"), 77));
    const TrainerConfig t = trainer_config(c);
    return make_embedding_net(c.get_int("data.observation_dim"), rng, t.hidden, t.embedding_dim);
  }
  if (mode != "checkpoint") throw ConfigError(mode_key, "expected 'checkpoint' or 'random', got '" + mode + "'");
  if (o.checkpoint.empty()) throw ConfigError("--checkpoint", "a checkpoint file is required");
  if (!fs::exists(o.checkpoint)) throw std::runtime_error("checkpoint '" + o.checkpoint + "' does not exist");
  return load_embedding_checkpoint(o.checkpoint);
}

void cmd_generate_data(const Options& o) {
  const ExperimentConfig c = resolve_config(o);
  const fs::path out = prepare_out(o);
  const std::uint64_t seed = c.get_u64("seed");
  const std::string& task = c.get("data.task");
  if (task == "pouring") {
    const PouringWorld world(pouring_config(c));
    write_pouring_dataset(out.string(), generate_pouring_dataset(world, seed), c.hash());
  } else if (task == "pose") {
    const PoseWorld world(pose_config(c));
    const PoseDatasets d = generate_pose_datasets(world, c, seed);
    StoreManifest m;
    m.kind = "pose";
    m.config_hash = c.hash();
    m.observation_dim = world.config().observation_dim;
    m.metadata["views"] = c.get("pose.views");
    m.metadata["heldout_view"] = c.get("pose.heldout_view");
    std::vector<std::pair<MultiViewSequence, std::string>> seqs;
    std::vector<EvaluationSidecar> sidecars;
    for (const auto& [split, part] : {std::pair{"mixed", &d.mixed}, std::pair{"self", &d.self},
                                      std::pair{"human", &d.human}, std::pair{"test", &d.test}}) {
      for (const auto& g : *part) {
        seqs.emplace_back(g.sequence, split);
        sidecars.push_back(g.sidecar);
      }
    }
    write_store(out.string(), m, seqs, sidecars);
  } else {
    throw ConfigError("data.task", "expected 'pouring' or 'pose', got '" + task + "'");
  }
  write_resolved_config(out, c);
  std::cout << "wrote dataset to " << out.string() << " (config " << c.hash() << ")\n";
}

void cmd_train_embedding(const Options& o) {
  const ExperimentConfig c = resolve_config(o);
  const PouringDataset data = load_pouring_dataset(require_data_dir(c));
  const TrainerConfig tc = trainer_config(c);
  const fs::path out = prepare_out(o);
  write_resolved_config(out, c);
  const TrainingResult res =
      train_embedding(sequences_of(data.train), sequences_of(data.validation), tc, c.get_u64("seed"));

  fs::create_directories(out / "checkpoints");
  for (const auto& snap : res.checkpoints) {
    char name[48];
    std::snprintf(name, sizeof name, "step-%06ld.json", snap.step);
    save_embedding_checkpoint((out / "checkpoints" / name).string(), snap.net, snap.head ? &*snap.head : nullptr,
                              c.hash(), snap.step);
  }
  save_embedding_checkpoint((out / "final.json").string(), res.net, res.head ? &*res.head : nullptr, c.hash(),
                            tc.steps);

  CsvWriter curve((out / "loss_curve.csv").string(), schemas::loss_curve(), c.hash());
  curve.row({"0", "nan", format_double(res.initial_validation_loss)});
  for (const auto& p : res.curve) {
    curve.row({std::to_string(p.step), format_double(p.train_loss), format_double(p.validation_loss)});
  }
  const ModelSelectionReport sel = compare_model_selection(res, data);
  CsvWriter ms((out / "model_selection.csv").string(), schemas::model_selection(), c.hash());
  for (std::size_t i = 0; i < sel.rows.size(); ++i) {
    const auto& r = sel.rows[i];
    ms.row({std::to_string(r.step), format_double(r.validation_loss), format_double(r.validation_classification_error),
            format_double(r.test_classification_error), i == sel.by_loss ? "1" : "0",
            i == sel.by_classification ? "1" : "0"});
  }
  std::cout << "trained " << loss_name(tc.loss) << "/" << sampler_name(tc.sampler) << " for " << tc.steps
            << " steps: validation loss " << res.initial_validation_loss << " -> "
            << (res.curve.empty() ? res.initial_validation_loss : res.curve.back().validation_loss) << "\n";
}

void cmd_evaluate(const Options& o) {
  const ExperimentConfig c = resolve_config(o);
  const AlignmentOptions options = alignment_options(c);
  const std::string& mode = c.get("eval.embedding");
  Embedder embed;
  if (mode == "random") {
    embed = random_embedder(c.get_int("train.embedding_dim"), mix_seed(c.get_u64("seed"), 99));
  } else {
    embed = net_embedder(embedding_for(o, c, "eval.embedding"));
  }
  const PouringDataset data = load_pouring_dataset(require_data_dir(c));
  const fs::path out = prepare_out(o);
  write_resolved_config(out, c);
  TableOneRow row{mode == "random" ? "random" : "checkpoint", c.get_u64("seed"),
                  evaluate_embedding(embed, data, options)};
  write_table_one(out.string(), {row}, c.hash());
  std::cout << "alignment error " << row.evaluation.alignment_error << " (random "
            << row.evaluation.random_alignment_error << "), classification error "
            << row.evaluation.classification.aggregate << " (chance " << row.evaluation.chance.aggregate << ")\n";
}

void cmd_train_policy(const Options& o) {
  const ExperimentConfig c = resolve_config(o);
  const EmbeddingNet net = embedding_for(o, c, "rl.embedding");
  const PouringDataset data = load_pouring_dataset(require_data_dir(c));
  const std::string& demo_id = c.get("rl.demo");
  const GeneratedSequence& demo = demo_id.empty() ? data.test.front() : data.find(demo_id);
  const PouringWorld world(pouring_config(c));
  const fs::path out = prepare_out(o);
  write_resolved_config(out, c);
  const PolicyRunResult r = run_policy_learning(world, net, demo, c, c.get_u64("seed"));
  write_policy_curve((out / "policy_curve.csv").string(), r, c.hash());
  nlohmann::json pj = r.policy.to_json();
  pj["config_hash"] = c.hash();
  pj["demo"] = r.demo_id;
  std::ofstream(out / "policy.json") << pj.dump(1);
  const double first = r.curve.front().mean_cost;
  const double last = r.curve.back().mean_cost;
  std::cout << "demo " << r.demo_id << " (T=" << r.horizon << "): mean cost " << first << " -> " << last << " ("
            << 100.0 * (1.0 - last / first) << "% reduction), fill " << r.curve.back().success_mean << "\n";
}

void cmd_imitate_pose(const Options& o) {
  const ExperimentConfig c = resolve_config(o);
  std::optional<EmbeddingNet> tc;
  if (!o.checkpoint.empty()) tc = embedding_for(o, c, "rl.embedding");
  const int n = c.get_int("pose.seeds");
  if (n < 1) throw ConfigError("pose.seeds", "must be >= 1");
  for (const auto& spec : c.get_list("pose.supervision")) supervision_config(c, spec);
  if (c.get_list("pose.supervision").empty()) throw ConfigError("pose.supervision", "empty supervision set");
  const fs::path out = prepare_out(o);
  write_resolved_config(out, c);
  const PoseTable table = run_pose_experiment(c, seed_list(c.get_u64("seed"), n), tc ? &*tc : nullptr);
  write_pose_table(out.string(), table, c.hash());
  const CsvTable t = read_csv((out / "pose_table.csv").string());
  for (const auto& row : t.rows) std::cout << row[0] << ": " << row[1] << " +- " << row[2] << "\n";
}

void cmd_export_embeddings(const Options& o) {
  const ExperimentConfig c = resolve_config(o);
  const EmbeddingNet net = embedding_for(o, c, "rl.embedding");
  SequenceStore store(require_data_dir(c));
  const std::string& split = c.get("export.split");
  const auto seqs = store.load_split(split);
  if (seqs.empty()) throw ConfigError("export.split", "no sequences in split '" + split + "'");
  const fs::path out = prepare_out(o);
  write_resolved_config(out, c);
  write_embeddings_csv((out / "embeddings.csv").string(), net_embedder(net), seqs, c.hash());
  std::cout << "exported " << seqs.size() << " sequences from split '" << split << "'\n";
}

int report(const std::string& command, const std::string& type, const std::string& message, int code,
           const std::string& key = "", long step = -1) {
  nlohmann::json j{{"command", command}, {"type", type}, {"message", message}};
  if (!key.empty()) j["key"] = key;
  if (step >= 0) j["step"] = step;
  std::cerr << "error: " << j.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-contrastive embedding toolkit"};
  app.require_subcommand(1);
  Options o;
  std::string command;
  const std::vector<std::pair<std::string, std::function<void(const Options&)>>> commands = {
      {"generate-data", cmd_generate_data},   {"train-embedding", cmd_train_embedding},
      {"evaluate", cmd_evaluate},             {"train-policy", cmd_train_policy},
      {"imitate-pose", cmd_imitate_pose},     {"export-embeddings", cmd_export_embeddings},
  };
  const std::map<std::string, std::string> help = {
      {"generate-data", "Generate a synthetic dataset (data.task = pouring | pose)"},
      {"train-embedding", "Train an embedding on data.dir; writes checkpoints and loss curves"},
      {"evaluate", "Alignment and attribute classification errors of a checkpoint"},
      {"train-policy", "Learn an arm policy from one demonstration with the embedding reward"},
      {"imitate-pose", "Pose imitation under each supervision combination"},
      {"export-embeddings", "Write per-frame embeddings of a split to CSV"},
  };
  for (const auto& [name, fn] : commands) {
    auto* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", o.config_path, "key=value config file");
    sub->add_option("--checkpoint", o.checkpoint, "embedding checkpoint (JSON)");
    sub->add_option("--out", o.out, "fresh output directory");
    sub->add_option("--seed", o.seed, "overrides the config seed");
    sub->callback([&command, name = name] { command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(command.empty() ? "tcn" : command, "UsageError", e.what(), 2);
  }

  if (const char* w = std::getenv("TCN_MAX_WORKERS")) {
    if (std::atoi(w) < 1) return report(command, "ConfigError", "TCN_MAX_WORKERS must be a positive integer", 2);
  }
  try {
    for (const auto& [name, fn] : commands) {
      if (name == command) fn(o);
    }
  } catch (const ConfigError& e) {
    return report(command, "ConfigError", e.what(), 2, e.key());
  } catch (const TrainingDivergence& e) {
    return report(command, "DivergenceError", e.what(), 1, "", e.step());
  } catch (const ManifestError& e) {
    return report(command, "ManifestError", e.what(), 1, e.field());
  } catch (const std::exception& e) {
    return report(command, "Error", e.what(), 1);
  }
  return 0;
}
