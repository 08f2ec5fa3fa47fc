#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tcn {

// Versioned CSV: the first line is `# schema=<name>/<version> config_hash=<hash>`, the
// second the column header.
struct CsvSchema {
  std::string name;
  int version = 1;
  std::vector<std::string> columns;  // empty = columns given per file (e.g. embeddings)

  std::string id() const { return name + "/" + std::to_string(version); }
};

namespace schemas {
const CsvSchema& loss_curve();
const CsvSchema& model_selection();
const CsvSchema& alignment();
const CsvSchema& classification();
const CsvSchema& policy_curve();
const CsvSchema& pose_table();
const CsvSchema& pose_joints();
const CsvSchema& embeddings();
const CsvSchema& acceptance();
// Looks up by "name/version".
const CsvSchema& find(const std::string& id);
}  // namespace schemas

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const CsvSchema& schema, const std::string& config_hash,
            std::vector<std::string> columns = {});

  void row(const std::vector<std::string>& cells);
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::ofstream out_;
  std::string path_;
  std::vector<std::string> columns_;
};

struct CsvTable {
  std::string schema;
  std::string config_hash;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;
};

// Parses and validates the header against the registered schema.
CsvTable read_csv(const std::string& path);

}  // namespace tcn
