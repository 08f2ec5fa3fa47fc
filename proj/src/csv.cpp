#include "tcn/csv.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace tcn {
namespace schemas {

const CsvSchema& loss_curve() {
  static const CsvSchema s{"loss_curve", 1, {"step", "train_loss", "validation_loss"}};
  return s;
}
const CsvSchema& model_selection() {
  static const CsvSchema s{"model_selection", 1,
                           {"step", "validation_loss", "validation_classification_error", "test_classification_error",
                            "selected_by_loss", "selected_by_classification"}};
  return s;
}
const CsvSchema& alignment() {
  static const CsvSchema s{"alignment", 1,
                           {"method", "seed", "alignment_error", "random_alignment_error", "pairs"}};
  return s;
}
const CsvSchema& classification() {
  static const CsvSchema s{"classification", 1, {"method", "seed", "attribute", "error", "chance_error"}};
  return s;
}
const CsvSchema& policy_curve() {
  static const CsvSchema s{"policy_curve", 1,
                           {"iteration", "mean_cost", "std_cost", "min_cost", "success_mean", "success_std",
                            "policy_success", "kl", "epsilon", "eta", "residual_rms", "lqr_step_norm",
                            "pi2_correction_norm", "epsilon_halved"}};
  return s;
}
const CsvSchema& pose_table() {
  static const CsvSchema s{"pose_table", 1,
                           {"supervision", "mean_error", "std_error", "heldout_mean_error", "heldout_std_error",
                            "seeds"}};
  return s;
}
const CsvSchema& pose_joints() {
  static const CsvSchema s{"pose_joints", 1,
                           {"supervision", "joint", "mean_error", "std_error"}};
  return s;
}
const CsvSchema& embeddings() {
  static const CsvSchema s{"embeddings", 1, {}};
  return s;
}
const CsvSchema& acceptance() {
  static const CsvSchema s{"acceptance", 1, {"criterion", "passed", "detail"}};
  return s;
}

const CsvSchema& find(const std::string& id) {
  static const std::map<std::string, const CsvSchema*> all = {
      {loss_curve().id(), &loss_curve()},       {model_selection().id(), &model_selection()},
      {alignment().id(), &alignment()},         {classification().id(), &classification()},
      {policy_curve().id(), &policy_curve()},   {pose_table().id(), &pose_table()},
      {pose_joints().id(), &pose_joints()},     {embeddings().id(), &embeddings()},
      {acceptance().id(), &acceptance()},
  };
  const auto it = all.find(id);
  if (it == all.end()) throw CsvError("unknown CSV schema '" + id + "'");
  return *it->second;
}

}  // namespace schemas

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].find_first_of(",\n\"") != std::string::npos) {
      throw CsvError("CSV cell contains a delimiter: '" + cells[i] + "'");
    }
    out += (i ? "," : "") + cells[i];
  }
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvWriter::CsvWriter(const std::string& path, const CsvSchema& schema, const std::string& config_hash,
                     std::vector<std::string> columns)
    : out_(path, std::ios::binary), path_(path), columns_(schema.columns.empty() ? std::move(columns) : schema.columns) {
  if (!out_) throw CsvError("cannot write '" + path + "'");
  if (columns_.empty()) throw CsvError("schema " + schema.id() + " needs explicit columns");
  out_ << "# schema=" << schema.id() << " config_hash=" << config_hash << "\n" << join(columns_) << "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size()) {
    throw CsvError(path_ + ": row has " + std::to_string(cells.size()) + " cells, expected " +
                   std::to_string(columns_.size()));
  }
  out_ << join(cells) << "\n";
  if (!out_) throw CsvError("write failed for '" + path_ + "'");
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  throw CsvError("no column '" + name + "' in " + schema);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("# schema=", 0) != 0) {
    throw CsvError(path + ": missing '# schema=' version line");
  }
  CsvTable t;
  std::istringstream head(line.substr(2));
  std::string token;
  while (head >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) continue;
    if (token.substr(0, eq) == "schema") t.schema = token.substr(eq + 1);
    if (token.substr(0, eq) == "config_hash") t.config_hash = token.substr(eq + 1);
  }
  if (t.config_hash.empty()) throw CsvError(path + ": missing config_hash");
  const CsvSchema& schema = schemas::find(t.schema);
  if (!std::getline(in, line)) throw CsvError(path + ": missing column header");
  t.columns = split(line);
  if (!schema.columns.empty() && t.columns != schema.columns) {
    throw CsvError(path + ": header does not match schema " + schema.id());
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.columns.size()) {
      throw CsvError(path + ": row " + std::to_string(t.rows.size() + 1) + " has " + std::to_string(cells.size()) +
                     " cells, expected " + std::to_string(t.columns.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

}  // namespace tcn
