#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mccws/model/config.hpp"
#include "mccws/train/trainer.hpp"

namespace mccws::app {

enum class Script { simplified, traditional };

// A preprocessed corpus: `path` is the directory holding
// <name>.train.txt, <name>.dev.txt and <name>.test.txt.
struct CorpusDecl {
  std::string name;
  std::string criterion;
  std::filesystem::path path;
  Script script = Script::simplified;

  std::filesystem::path file(const std::string& split) const { return path / (name + "." + split + ".txt"); }
};

struct RunConfig {
  std::vector<CorpusDecl> corpora;
  ModelConfig model;
  TrainConfig train;
  TrainConfig transfer;  // defaults to the train section
  std::filesystem::path output_dir = "run";
  std::uint64_t seed = 1;

  // Every violated constraint, one message each.
  std::vector<std::string> problems() const;
  const CorpusDecl& corpus_for(const std::string& criterion) const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// JSON document with keys corpora, model, train, transfer, output_dir, seed.
// Unknown keys are rejected; relative paths resolve against the file's directory.
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace mccws::app
