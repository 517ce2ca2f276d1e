#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "negograph/config.hpp"
#include "support.hpp"

using negograph::testing::read_file;
using negograph::testing::TempDir;
using json = nlohmann::json;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(NEGOGRAPH_CLI) + " --log-level warn " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST(Cli, ExitCodes) {
  EXPECT_EQ(std::system((std::string(NEGOGRAPH_CLI) + " --help >/dev/null").c_str()), 0);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run(""), 2);
  TempDir dir;
  EXPECT_EQ(run("train --corpus " + q(dir / "missing.jsonl") + " --out " + q(dir / "o")), 1);
}

TEST(Cli, EvalRescoresAPredictionDump) {
  TempDir dir;
  const std::string dump = std::string(NEGOGRAPH_TEST_DATA) + "/perfect_predictions.jsonl";
  ASSERT_EQ(run("eval --predictions '" + dump + "' --out " + q(dir.path())), 0);
  const auto j = json::parse(read_file(dir / "metrics.json"));
  const auto& m = j["metrics"];
  EXPECT_EQ(m["strategy"]["f1"]["macro"], 1.0);
  EXPECT_EQ(m["strategy"]["f1"]["micro"], 1.0);
  EXPECT_EQ(m["dialogue_act"]["f1"]["micro"], 1.0);
  EXPECT_NEAR(m["bleu"].get<double>(), 100.0, 1e-9);
}

TEST(Cli, SynthTrainEvalExplainAndDeterminism) {
  TempDir dir;
  ASSERT_EQ(run("synth --out " + q(dir / "corpus") + " --dialogues 40 --turns 6 --seed 3"), 0);
  for (const char* split : {"train.jsonl", "valid.jsonl", "test.jsonl"})
    EXPECT_TRUE(std::filesystem::exists(dir / "corpus" / split)) << split;

  auto cfg = negograph::testing::tiny_config();
  cfg.max_epochs = 3;
  {
    std::ofstream out(dir / "config.json");
    out << cfg.to_json().dump(2);
  }
  const std::string train = "train --corpus " + q(dir / "corpus") + " --config " + q(dir / "config.json");
  ASSERT_EQ(run(train + " --out " + q(dir / "a")), 0);
  ASSERT_EQ(run(train + " --out " + q(dir / "b")), 0);
  EXPECT_EQ(read_file(dir / "a" / "train_log.csv"), read_file(dir / "b" / "train_log.csv"));
  EXPECT_EQ(read_file(dir / "a" / "checkpoint.bin"), read_file(dir / "b" / "checkpoint.bin"));
  const auto log = read_file(dir / "a" / "train_log.csv");
  EXPECT_NE(log.find(cfg.hash_hex()), std::string::npos);

  ASSERT_EQ(run("eval --checkpoint " + q(dir / "a" / "checkpoint.bin") + " --corpus " + q(dir / "corpus") +
                " --out " + q(dir / "eval")),
            0);
  const auto metrics = json::parse(read_file(dir / "eval" / "metrics.json"));
  EXPECT_EQ(metrics["config_hash"], cfg.hash_hex());
  ASSERT_TRUE(std::filesystem::exists(dir / "eval" / "traces.jsonl"));

  ASSERT_EQ(run("explain --traces " + q(dir / "eval" / "traces.jsonl") + " --out " + q(dir / "explain") + " --dot"),
            0);
  EXPECT_TRUE(std::filesystem::exists(dir / "explain" / "influence.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "explain" / "associations.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "explain" / "propose_report.json"));
}
