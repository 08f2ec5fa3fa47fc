#include "tcn/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tcn {

const std::map<std::string, std::string>& default_config_values() {
  static const std::map<std::string, std::string> defaults = {
      {"seed", "1"},
      // dataset
      {"data.task", "pouring"},
      {"data.train", "133"},
      {"data.validation", "17"},
      {"data.test", "30"},
      {"data.min_duration", "4.5"},
      {"data.max_duration", "6.0"},
      {"data.frame_rate", "10"},
      {"data.observation_dim", "64"},
      {"data.noise", "0.05"},
      {"data.renderer_seed", "1234"},
      {"data.dir", ""},
      // embedding training
      {"train.loss", "triplet"},
      {"train.sampler", "multiview"},
      {"train.steps", "2000"},
      {"train.batch_size", "32"},
      {"train.eval_every", "250"},
      {"train.checkpoint_every", "250"},
      {"train.validation_batches", "8"},
      {"train.learning_rate", "0.001"},
      {"train.triplet_margin", "0.2"},
      {"train.lifted_margin", "1.0"},
      {"train.negative_exclusion", "0.2"},
      {"train.positive_range", "0.2"},
      {"train.negative_multiplier", "2.0"},
      {"train.shuffle_tmax", "20"},
      {"train.shuffle_tmin", "5"},
      {"train.shuffle_negative_ratio", "0.75"},
      {"train.hidden", "128,64"},
      {"train.embedding_dim", "32"},
      // evaluation
      {"eval.normalization", "sequence"},
      {"eval.embedding", "checkpoint"},
      // reward + RL
      {"reward.alpha", "0.5"},
      {"reward.beta", "1.0"},
      {"reward.gamma", "0.0001"},
      {"reward.action_weight", "0.001"},
      {"rl.demo", ""},
      {"rl.demo_view", "1"},
      {"rl.embedding", "checkpoint"},
      {"rl.iterations", "10"},
      {"rl.rollouts", "10"},
      {"rl.epsilon", "5"},
      {"rl.use_pi2", "true"},
      {"rl.prior_strength", "5"},
      {"rl.initial_variance", "0.5"},
      {"rl.wrist_factor", "4"},
      {"rl.success_evaluations", "20"},
      // pose imitation
      {"pose.supervision", "Self;Human;Human+Self;TC+Self;TC+Human;TC+Human+Self"},
      {"pose.seeds", "5"},
      {"pose.views", "0,60,120"},
      {"pose.heldout_view", "90"},
      {"pose.sequence_duration", "15"},
      {"pose.mixed_sequences", "60"},
      {"pose.self_sequences", "20"},
      {"pose.human_sequences", "3"},
      {"pose.human_duration", "5"},
      {"pose.test_sequences", "6"},
      {"pose.label_noise", "0.1"},
      {"pose.fine_tune", "false"},
      {"pose.tc_steps", "5000"},
      {"pose.decoder_steps", "2000"},
      {"pose.batch_size", "64"},
      {"pose.renderer_seed", "4321"},
      // export
      {"export.split", "test"},
  };
  return defaults;
}

ExperimentConfig::ExperimentConfig() : values_(default_config_values()) {}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text, const std::string& source) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", source + ":" + std::to_string(lineno) + ": expected key=value, got '" + line + "'");
    }
    c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("", "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path);
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (default_config_values().count(key) == 0) throw ConfigError(key, "unknown key");
  values_[key] = value;
}

const std::string& ExperimentConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(key, "unknown key");
  return it->second;
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& v, const char* kind) {
  T out{};
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end) throw ConfigError(key, "expected " + std::string(kind) + ", got '" + v + "'");
  return out;
}

}  // namespace

int ExperimentConfig::get_int(const std::string& key) const { return parse_number<int>(key, get(key), "an integer"); }

long ExperimentConfig::get_long(const std::string& key) const {
  return parse_number<long>(key, get(key), "an integer");
}

std::uint64_t ExperimentConfig::get_u64(const std::string& key) const {
  return parse_number<std::uint64_t>(key, get(key), "a non-negative integer");
}

double ExperimentConfig::get_double(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "inf" || v == "infinity") return INFINITY;
  const double d = parse_number<double>(key, v, "a number");
  if (!std::isfinite(d)) throw ConfigError(key, "value must be finite");
  return d;
}

bool ExperimentConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "expected true/false, got '" + v + "'");
}

std::vector<std::string> ExperimentConfig::get_list(const std::string& key, char separator) const {
  std::vector<std::string> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, separator)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> ExperimentConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : get_list(key, ',')) out.push_back(parse_number<double>(key, item, "a number list"));
  return out;
}

std::string ExperimentConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ExperimentConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical())));
  return buf;
}

}  // namespace tcn
