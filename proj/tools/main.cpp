#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "mccws/corpus/text.hpp"

namespace {

using namespace mccws;
using namespace mccws::app;

// stdout unless --out names a file.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw std::runtime_error("cannot write " + path);
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::string one_line(std::string text) {
  for (auto& c : text)
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
  return text;
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const UnknownCriterionError*>(&e)) return "unknown-criterion";
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const CheckpointError*>(&e)) return "checkpoint";
  if (dynamic_cast<const CorpusError*>(&e) || dynamic_cast<const TextError*>(&e)) return "corpus";
  if (dynamic_cast<const TrainingDivergedError*>(&e)) return "diverged";
  if (dynamic_cast<const std::invalid_argument*>(&e)) return "invalid-argument";
  return "runtime";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-criteria Chinese word segmentation"};
  app.require_subcommand(1);

  std::string config_path, checkpoint, criterion, out_path, query, decoder, embeddings, shots_text = "0,10,100";
  std::uint64_t seed = 1;
  std::size_t k = 10;
  bool no_bigram = false;
  PreprocessOptions pre;
  SynthOptions synth;
  std::string input_path;

  auto* preprocess = app.add_subcommand("preprocess", "Normalize, split and index raw corpora");
  preprocess->add_option("raw_dir", pre.raw_dir, "Directory of <name>.train.txt / <name>.test.txt")->required();
  preprocess->add_option("--out", pre.out_dir, "Output directory")->required();
  preprocess->add_option("--seed", pre.seed, "Train/dev split seed");
  preprocess->add_option("--dev-ratio", pre.dev_ratio, "Share of training sentences held out")->check(CLI::Range(0.0, 1.0));

  auto* train_cmd = app.add_subcommand("train", "Train a unified model on the configured corpora");
  train_cmd->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--checkpoint", checkpoint, "Checkpoint path (default <output_dir>/model.ckpt)");
  auto* seed_opt = train_cmd->add_option("--seed", seed);
  auto* decoder_opt = train_cmd->add_option("--decoder", decoder)->check(CLI::IsMember({"crf", "mlp"}));
  train_cmd->add_flag("--no-bigram", no_bigram);
  auto* embeddings_opt = train_cmd->add_option("--embeddings", embeddings, "Pre-trained unigram/bigram vectors");
  train_cmd->add_option("--out", out_path, "Training log TSV (default stdout)");

  auto* eval_cmd = app.add_subcommand("eval", "Score a checkpoint on the configured test sets");
  eval_cmd->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--checkpoint", checkpoint)->required();
  eval_cmd->add_option("--out", out_path);

  auto* segment_cmd = app.add_subcommand("segment", "Segment text line by line");
  segment_cmd->add_option("--checkpoint", checkpoint)->required();
  segment_cmd->add_option("--criterion", criterion)->required();
  segment_cmd->add_option("input", input_path, "Input file (default stdin)");
  segment_cmd->add_option("--out", out_path);

  auto* transfer_cmd = app.add_subcommand("transfer", "Learn a new criterion embedding only");
  transfer_cmd->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
  transfer_cmd->add_option("--checkpoint", checkpoint)->required();
  transfer_cmd->add_option("--criterion", criterion)->required();
  transfer_cmd->add_option("--shots", shots_text, "Comma-separated training sentence counts");
  auto* transfer_seed = transfer_cmd->add_option("--seed", seed);
  transfer_cmd->add_option("--out", out_path);

  auto* analyze_cmd = app.add_subcommand("analyze-criteria", "2-D PCA of the criterion embeddings");
  analyze_cmd->add_option("--checkpoint", checkpoint)->required();
  analyze_cmd->add_option("--out", out_path);

  auto* nearest_cmd = app.add_subcommand("nearest-bigrams", "Cosine nearest neighbours of a bigram");
  nearest_cmd->add_option("--checkpoint", checkpoint)->required();
  nearest_cmd->add_option("query", query, "Two characters")->required();
  nearest_cmd->add_option("--k", k)->check(CLI::PositiveNumber);
  nearest_cmd->add_option("--out", out_path);

  auto* synth_cmd = app.add_subcommand("synth", "Write the synthetic A/B/C corpora");
  synth_cmd->add_option("--out", synth.out_dir)->required();
  synth_cmd->add_option("--seed", synth.seed);
  synth_cmd->add_option("--train-size", synth.train_size);
  synth_cmd->add_option("--test-size", synth.test_size);
  synth_cmd->add_option("--criteria", synth.criteria);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error\tusage\t" << one_line(e.what()) << '\n';
    return 2;
  }

  try {
    if (preprocess->parsed()) {
      cmd_preprocess(pre, std::cerr);
    } else if (train_cmd->parsed()) {
      RunConfig config = load_run_config(config_path);
      TrainOverrides o;
      if (*seed_opt) o.seed = seed;
      if (*decoder_opt) o.decoder = decoder_kind_from_string(decoder);
      o.no_bigram = no_bigram;
      if (*embeddings_opt) o.embeddings = embeddings;
      apply_overrides(config, o);
      const auto ckpt = checkpoint.empty() ? config.output_dir / "model.ckpt" : std::filesystem::path(checkpoint);
      std::filesystem::create_directories(config.output_dir);
      Output out(out_path);
      cmd_train(config, ckpt, out.stream(), std::cerr);
    } else if (eval_cmd->parsed()) {
      Output out(out_path);
      cmd_eval(load_run_config(config_path), checkpoint, out.stream());
    } else if (segment_cmd->parsed()) {
      Output out(out_path);
      if (input_path.empty()) {
        cmd_segment(checkpoint, criterion, std::cin, out.stream());
      } else {
        std::ifstream in(input_path);
        if (!in) throw CorpusError("cannot read " + input_path);
        cmd_segment(checkpoint, criterion, in, out.stream());
      }
    } else if (transfer_cmd->parsed()) {
      RunConfig config = load_run_config(config_path);
      if (*transfer_seed) apply_overrides(config, {.seed = seed});
      std::vector<std::size_t> shots;
      for (const auto& piece : CLI::detail::split(shots_text, ',')) shots.push_back(std::stoul(piece));
      Output out(out_path);
      cmd_transfer(config, checkpoint, criterion, shots, out.stream(), std::cerr);
    } else if (analyze_cmd->parsed()) {
      Output out(out_path);
      cmd_analyze_criteria(checkpoint, out.stream(), std::cerr);
    } else if (nearest_cmd->parsed()) {
      Output out(out_path);
      cmd_nearest_bigrams(checkpoint, query, k, out.stream());
    } else if (synth_cmd->parsed()) {
      cmd_synth(synth);
    }
  } catch (const std::exception& e) {
    std::cerr << "error\t" << error_kind(e) << '\t' << one_line(e.what()) << '\n';
    return 1;
  }
  return 0;
}
