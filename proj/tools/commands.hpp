#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace mccws::app {

struct PreprocessOptions {
  std::filesystem::path raw_dir;
  std::filesystem::path out_dir;
  std::uint64_t seed = 1;
  double dev_ratio = 0.1;
};

// Reads <name>.train.txt / <name>.test.txt from raw_dir and writes the
// preprocessed train/dev/test files, unigrams.tsv, bigrams.tsv, criteria.tsv
// and stats.tsv to out_dir.
void cmd_preprocess(const PreprocessOptions& options, std::ostream& log);

// Overrides applied on top of a loaded config.
struct TrainOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<DecoderKind> decoder;
  bool no_bigram = false;
  std::optional<std::string> embeddings;
};

void apply_overrides(RunConfig& config, const TrainOverrides& overrides);

// Trains on every declared corpus; writes the best checkpoint to
// `checkpoint` and one TSV log row per epoch to `out`.
void cmd_train(const RunConfig& config, const std::filesystem::path& checkpoint, std::ostream& out, std::ostream& log);

// Per-criterion test scores of every declared corpus plus the Avg. row.
void cmd_eval(const RunConfig& config, const std::filesystem::path& checkpoint, std::ostream& out);

// One space-joined segmentation per input line, flushed line by line.
void cmd_segment(const std::filesystem::path& checkpoint, const std::string& criterion, std::istream& in,
                 std::ostream& out);

// For each shot count: transfer to `criterion`, save <output_dir>/transfer-<criterion>-<shots>.ckpt
// and emit a shots/dev-F1/test-F1 row.
void cmd_transfer(const RunConfig& config, const std::filesystem::path& checkpoint, const std::string& criterion,
                  const std::vector<std::size_t>& shots, std::ostream& out, std::ostream& log);

void cmd_analyze_criteria(const std::filesystem::path& checkpoint, std::ostream& out, std::ostream& log);

void cmd_nearest_bigrams(const std::filesystem::path& checkpoint, const std::string& query, std::size_t k,
                         std::ostream& out);

struct SynthOptions {
  std::filesystem::path out_dir;
  std::uint64_t seed = 1;
  std::size_t train_size = 5000;
  std::size_t test_size = 500;
  std::string criteria = "ABC";
};

void cmd_synth(const SynthOptions& options);

}  // namespace mccws::app
