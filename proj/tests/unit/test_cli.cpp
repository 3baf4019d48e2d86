#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "mccws/corpus/text.hpp"
#include "mccws/train/checkpoint.hpp"
#include "run_config.hpp"

using namespace mccws;
using namespace mccws::app;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> columns(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, '\t');) out.push_back(f);
  return out;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

const char* kToyConfig = R"({
  "corpora": [{"name": "A", "path": "prep"}, {"name": "B", "path": "prep", "script": "traditional"}],
  "model": {"embed_dim": 8, "d_model": 16, "num_layers": 1, "num_heads": 2, "d_ff": 32},
  "train": {"epochs": 2, "batch_size": 8, "dropout": 0.1, "constant_lr": 0.01},
  "output_dir": "out",
  "seed": 5
})";

// A synthetic A/B/C workspace with the preprocessed corpora and a toy config.
class Workspace : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / "mccws_cli_test";
    fs::remove_all(root_);
    fs::create_directories(root_);
    cmd_synth({root_ / "raw", 3, 60, 20, "ABC"});
    std::ostringstream log;
    cmd_preprocess({root_ / "raw", root_ / "prep", 1, 0.1}, log);
    write(root_ / "run.json", kToyConfig);
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  static fs::path root_;
};

fs::path Workspace::root_;

struct Outcome {
  int code = 0;
  std::string out, err;
};

Outcome run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string(MCCWS_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

}  // namespace

TEST_F(Workspace, ConfigParsesAndResolvesPaths) {
  const RunConfig c = load_run_config(root_ / "run.json");
  ASSERT_EQ(c.corpora.size(), 2u);
  EXPECT_EQ(c.corpora[0].criterion, "A");
  EXPECT_EQ(c.corpora[1].script, Script::traditional);
  EXPECT_EQ(c.corpora[0].path, root_ / "prep");
  EXPECT_EQ(c.output_dir, root_ / "out");
  EXPECT_EQ(c.model.d_model, 16u);
  EXPECT_EQ(c.train.epochs, 2u);
  EXPECT_EQ(c.train.seed, 5u);
  EXPECT_EQ(c.transfer.epochs, 2u);
  EXPECT_TRUE(c.problems().empty());
  EXPECT_EQ(c.corpus_for("B").name, "B");
  EXPECT_THROW(c.corpus_for("Q"), ConfigError);
}

TEST_F(Workspace, ConfigErrorsAreReported) {
  write(root_ / "bad_key.json", R"({"corpora": [], "modle": {}})");
  EXPECT_THROW(load_run_config(root_ / "bad_key.json"), ConfigError);
  write(root_ / "bad_json.json", "{");
  EXPECT_THROW(load_run_config(root_ / "bad_json.json"), ConfigError);
  EXPECT_THROW(load_run_config(root_ / "absent.json"), ConfigError);
  write(root_ / "dup.json", R"({"corpora": [{"name": "A", "path": "prep"}, {"name": "B", "criterion": "A", "path": "nowhere"}],
                               "model": {"d_model": 6, "num_heads": 4}, "train": {"batch_size": 0}})");
  const auto problems = load_run_config(root_ / "dup.json").problems();
  auto mentions = [&](const std::string& needle) {
    return std::any_of(problems.begin(), problems.end(),
                       [&](const std::string& p) { return p.find(needle) != std::string::npos; });
  };
  EXPECT_TRUE(mentions("duplicate criterion"));
  EXPECT_TRUE(mentions("does not exist"));
  EXPECT_TRUE(mentions("model"));
  EXPECT_TRUE(mentions("train"));
}

TEST_F(Workspace, PreprocessWritesSplitsAndStats) {
  for (const char* name : {"A", "B", "C"})
    for (const char* split : {"train", "dev", "test"}) EXPECT_TRUE(fs::exists(root_ / "prep" / (std::string(name) + "." + split + ".txt")));
  for (const char* f : {"unigrams.tsv", "bigrams.tsv", "criteria.tsv"}) EXPECT_TRUE(fs::exists(root_ / "prep" / f));
  const auto stats = lines_of(slurp(root_ / "prep" / "stats.tsv"));
  EXPECT_EQ(stats[0], "corpus\tsplit\twords\tchars\tword_types\tchar_types\toov_rate");
  EXPECT_EQ(stats.size(), 7u);

  std::ostringstream log;
  cmd_preprocess({root_ / "raw", root_ / "prep2", 2, 0.1}, log);
  EXPECT_EQ(slurp(root_ / "prep" / "A.test.txt"), slurp(root_ / "prep2" / "A.test.txt"));
  EXPECT_NE(slurp(root_ / "prep" / "A.dev.txt"), slurp(root_ / "prep2" / "A.dev.txt"));
  auto sorted_lines = [&](const fs::path& dir) {
    auto all = lines_of(slurp(dir / "A.train.txt"));
    for (auto& l : lines_of(slurp(dir / "A.dev.txt"))) all.push_back(l);
    std::sort(all.begin(), all.end());
    return all;
  };
  EXPECT_EQ(sorted_lines(root_ / "prep"), sorted_lines(root_ / "prep2"));

  cmd_preprocess({root_ / "prep", root_ / "prep3", 1, 0.1}, log);
  EXPECT_EQ(slurp(root_ / "prep" / "A.test.txt"), slurp(root_ / "prep3" / "A.test.txt"));
}

TEST_F(Workspace, PipelineCommands) {
  const RunConfig config = load_run_config(root_ / "run.json");
  const fs::path ckpt = root_ / "model.ckpt";
  std::ostringstream train_out, log;
  cmd_train(config, ckpt, train_out, log);
  const auto rows = lines_of(train_out.str());
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], "epoch\tstep\tloss\tdev_f1_A\tdev_f1_B\tmacro_dev_f1\tpretrained_frozen");
  EXPECT_NO_THROW(load_checkpoint(ckpt));

  std::ostringstream again;
  cmd_train(config, root_ / "again.ckpt", again, log);
  EXPECT_EQ(again.str(), train_out.str());

  std::ostringstream eval_out;
  cmd_eval(config, ckpt, eval_out);
  const auto eval_rows = lines_of(eval_out.str());
  ASSERT_EQ(eval_rows.size(), 4u);
  EXPECT_EQ(columns(eval_rows[1])[0], "A");
  EXPECT_EQ(columns(eval_rows[3])[0], "Avg.");

  std::istringstream text("天地人\n\nＡＢ１２。\n");
  std::ostringstream seg;
  cmd_segment(ckpt, "A", text, seg);
  const auto seg_rows = lines_of(seg.str());
  ASSERT_EQ(seg_rows.size(), 3u);
  EXPECT_EQ(seg_rows[1], "");
  std::string joined = seg_rows[2];
  joined.erase(std::remove(joined.begin(), joined.end(), ' '), joined.end());
  EXPECT_EQ(joined, "AB12。");
  std::istringstream none("天");
  std::ostringstream ignored;
  EXPECT_THROW(cmd_segment(ckpt, "Z", none, ignored), UnknownCriterionError);

  RunConfig with_c = config;
  with_c.corpora.push_back({"C", "C", root_ / "prep", Script::simplified});
  std::ostringstream transfer_out;
  cmd_transfer(with_c, ckpt, "C", {0, 10, 20}, transfer_out, log);
  const auto transfer_rows = lines_of(transfer_out.str());
  ASSERT_EQ(transfer_rows.size(), 4u);
  EXPECT_EQ(transfer_rows[0], "shots\tdev_f1\ttest_f1\ttest_oov_recall");
  EXPECT_EQ(columns(transfer_rows[3])[0], "20");
  EXPECT_TRUE(fs::exists(config.output_dir / "transfer-C-10.ckpt"));
  EXPECT_THROW(cmd_transfer(with_c, ckpt, "A", {1}, transfer_out, log), std::invalid_argument);

  std::ostringstream pca;
  cmd_analyze_criteria(config.output_dir / "transfer-C-10.ckpt", pca, log);
  const auto pca_rows = lines_of(pca.str());
  ASSERT_EQ(pca_rows.size(), 4u);
  EXPECT_EQ(pca_rows[0], "criterion\tx\ty");

  const Vocab vocab = load_checkpoint(ckpt).vocab;
  std::string query;
  for (std::int64_t i = 6; query.empty(); ++i)
    if (vocab.bigrams.symbol(i).find('<') == std::string::npos) query = vocab.bigrams.symbol(i);
  std::ostringstream near;
  cmd_nearest_bigrams(ckpt, query, 4, near);
  const auto near_rows = lines_of(near.str());
  ASSERT_EQ(near_rows.size(), 5u);
  EXPECT_EQ(near_rows[0], "rank\tbigram\tcosine");
  std::ostringstream bad;
  EXPECT_THROW(cmd_nearest_bigrams(ckpt, "QZ", 4, bad), std::invalid_argument);
  EXPECT_TRUE(bad.str().empty());
}

TEST_F(Workspace, BinaryReportsOneLineErrors) {
  const RunConfig config = load_run_config(root_ / "run.json");
  const fs::path ckpt = root_ / "bin.ckpt";
  const auto trained = run_cli("train --config " + (root_ / "run.json").string() + " --checkpoint " + ckpt.string(), root_);
  ASSERT_EQ(trained.code, 0) << trained.err;
  EXPECT_EQ(lines_of(trained.out).size(), 3u);

  write(root_ / "in.txt", "天地人\n");
  const auto ok = run_cli("segment --checkpoint " + ckpt.string() + " --criterion B " + (root_ / "in.txt").string(), root_);
  EXPECT_EQ(ok.code, 0);
  EXPECT_EQ(lines_of(ok.out).size(), 1u);

  const auto unknown = run_cli("segment --checkpoint " + ckpt.string() + " --criterion Z " + (root_ / "in.txt").string(), root_);
  EXPECT_EQ(unknown.code, 1);
  ASSERT_EQ(lines_of(unknown.err).size(), 1u);
  EXPECT_EQ(columns(unknown.err)[0], "error");
  EXPECT_EQ(columns(unknown.err)[1], "unknown-criterion");
  EXPECT_NE(unknown.err.find("A"), std::string::npos);

  const auto missing = run_cli("analyze-criteria --checkpoint " + (root_ / "nope.ckpt").string(), root_);
  EXPECT_EQ(missing.code, 1);
  EXPECT_EQ(columns(missing.err)[1], "checkpoint");

  const auto usage = run_cli("train", root_);
  EXPECT_EQ(usage.code, 2);
  EXPECT_EQ(columns(usage.err)[1], "usage");

  write(root_ / "broken.json", R"({"corpora": [], "train": {"epochs": 1}})");
  const auto broken = run_cli("train --config " + (root_ / "broken.json").string(), root_);
  EXPECT_EQ(broken.code, 1);
  EXPECT_EQ(columns(broken.err)[1], "config");
}
