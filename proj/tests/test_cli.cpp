#include "test_util.hpp"

#include "tcn/csv.hpp"
#include "tcn/rl.hpp"
#include "tcn/sequence.hpp"

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>

#include <sys/wait.h>

using namespace tcn;
using tcn::testing::read_file;
using tcn::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  RunResult run(const std::string& args) const {
    const std::string log = dir_ / "stderr.txt";
    const std::string cmd = "TCN_MAX_WORKERS=1 '" + std::string(TCN_CLI_PATH) + "' " + args + " > /dev/null 2> '" + log + "'";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(log)};
  }

  std::string config(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  // Pouring dataset shared by the tests in this fixture.
  std::string dataset() {
    if (!fs::exists(dir_ / "data")) {
      EXPECT_EQ(run("generate-data --seed 5 --out " + (dir_ / "data")).code, 0);
    }
    return dir_ / "data";
  }

  TempDir dir_{"cli"};
};

}  // namespace

TEST_F(CliTest, GenerateDataIsByteIdentical) {
  ASSERT_EQ(run("generate-data --seed 5 --out " + (dir_ / "a")).code, 0);
  ASSERT_EQ(run("generate-data --seed 5 --out " + (dir_ / "b")).code, 0);
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir_ / "a")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const fs::path other = fs::path(dir_ / "b") / fs::relative(e.path(), dir_ / "a");
    EXPECT_EQ(read_file(e.path()), read_file(other)) << e.path();
  }
  EXPECT_GT(files, 2);
}

TEST_F(CliTest, RefusesNonEmptyOutput) {
  const std::string data = dataset();
  const RunResult r = run("generate-data --out " + data);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("\"key\":\"--out\""), std::string::npos) << r.err;
}

TEST_F(CliTest, UnknownConfigKeyExitsWithConfigError) {
  const RunResult r = run("generate-data --config " + config("bad.cfg", "train.stepz=3\n") + " --out " + (dir_ / "x"));
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error: ", 0), 0u);
  const auto j = nlohmann::json::parse(r.err.substr(7));
  EXPECT_EQ(j.at("key"), "train.stepz");
  EXPECT_EQ(j.at("command"), "generate-data");
  EXPECT_FALSE(fs::exists(dir_ / "x"));
}

TEST_F(CliTest, OneStepTrainingWritesOneCheckpoint) {
  const std::string cfg = config("t.cfg", "data.dir=" + dataset() + "\ntrain.steps=1\n");
  ASSERT_EQ(run("train-embedding --config " + cfg + " --out " + (dir_ / "e")).code, 0);
  int checkpoints = 0;
  for (const auto& e : fs::directory_iterator(fs::path(dir_ / "e") / "checkpoints")) {
    ++checkpoints;
    EXPECT_EQ(e.path().filename(), "step-000001.json");
  }
  EXPECT_EQ(checkpoints, 1);
  EXPECT_TRUE(fs::exists(dir_ / "e/final.json"));
  const CsvTable curve = read_csv(dir_ / "e/loss_curve.csv");
  EXPECT_EQ(curve.schema, "loss_curve/1");
  EXPECT_EQ(curve.rows.size(), 2u);
}

TEST_F(CliTest, ExportWritesOneRowPerFrameAndView) {
  const std::string data = dataset();
  ASSERT_EQ(run("train-embedding --config " + config("t.cfg", "data.dir=" + data + "\ntrain.steps=1\n") +
                " --out " + (dir_ / "e"))
                .code,
            0);
  const std::string cfg = config("x.cfg", "data.dir=" + data + "\nexport.split=test\n");
  ASSERT_EQ(run("export-embeddings --config " + cfg + " --checkpoint " + (dir_ / "e/final.json") + " --out " +
                (dir_ / "x"))
                .code,
            0);
  std::size_t expected = 0;
  for (const auto& s : SequenceStore(data).load_split("test")) {
    expected += static_cast<std::size_t>(s.num_frames() * s.num_views());
  }
  const CsvTable t = read_csv(dir_ / "x/embeddings.csv");
  EXPECT_EQ(t.rows.size(), expected);
  EXPECT_EQ(t.columns.size(), 3u + 32u);
}

TEST_F(CliTest, ZeroIterationPolicyEchoesInitialPolicy) {
  const std::string cfg =
      config("p.cfg", "data.dir=" + dataset() + "\nrl.embedding=random\nrl.iterations=0\nrl.success_evaluations=2\n");
  ASSERT_EQ(run("train-policy --config " + cfg + " --out " + (dir_ / "p")).code, 0);
  const CsvTable curve = read_csv(dir_ / "p/policy_curve.csv");
  EXPECT_EQ(curve.rows.size(), 1u);
  const TVLGPolicy p = TVLGPolicy::from_json(nlohmann::json::parse(read_file(dir_ / "p/policy.json")));
  for (int t = 0; t < p.horizon(); ++t) {
    EXPECT_EQ(p.gains[t].cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(p.offsets[t].cwiseAbs().maxCoeff(), 0.0);
  }
  EXPECT_DOUBLE_EQ(p.covariances[0].matrix()(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(p.covariances[0].matrix()(2, 2), 2.0);
}

TEST_F(CliTest, MissingCheckpointFails) {
  const std::string cfg = config("p.cfg", "data.dir=" + dataset() + "\n");
  const RunResult r = run("train-policy --config " + cfg + " --checkpoint " + (dir_ / "nope.json") + " --out " +
                          (dir_ / "p"));
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("nope.json"), std::string::npos) << r.err;
}

TEST_F(CliTest, TimeContrastiveAloneRejected) {
  const std::string cfg = config("s.cfg", "pose.supervision=TC\n");
  const RunResult r = run("imitate-pose --config " + cfg + " --out " + (dir_ / "s"));
  EXPECT_EQ(r.code, 2) << r.err;
}
