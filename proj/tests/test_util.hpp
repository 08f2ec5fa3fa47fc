#pragma once

#include "tcn/numerics.hpp"
#include "tcn/sequence.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

namespace tcn::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("tcn-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline MultiViewSequence random_sequence(const std::string& id, int views, int frames, int dim, SeededRng& rng,
                                         double frame_rate = 10.0) {
  std::vector<Matrix> v;
  for (int i = 0; i < views; ++i) {
    Matrix m(dim, frames);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.normal();
    v.push_back(std::move(m));
  }
  return MultiViewSequence(id, frame_rate, std::move(v));
}

}  // namespace tcn::testing
