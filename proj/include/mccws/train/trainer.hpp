#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mccws/corpus/corpus.hpp"
#include "mccws/eval/metrics.hpp"
#include "mccws/model/batch.hpp"
#include "mccws/model/model.hpp"
#include "mccws/train/checkpoint.hpp"

namespace mccws {

class TrainingDivergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 256;
  double dropout = 0.2;
  std::int64_t warmup_steps = 4000;
  std::size_t freeze_pretrained_epochs = 80;
  std::uint64_t seed = 1;
  DecoderKind decoder = DecoderKind::crf;
  bool bigram_enabled = true;
  std::optional<std::string> pretrained_embeddings;
  // Multiplier on the warmup schedule.
  double lr_scale = 1.0;
  // Replaces the warmup schedule with a fixed rate when set.
  std::optional<double> constant_lr;
  // Global gradient-norm bound; 0 disables clipping.
  double clip_norm = 0;

  void validate() const;
};

// One criterion's labeled data; corpora sharing a criterion name share its token.
struct TrainingCorpus {
  std::string criterion;
  std::vector<LabeledSentence> train;
  std::vector<LabeledSentence> dev;
};

// Single-criterion batches: each corpus is shuffled for the epoch, cut into
// batches, and the batches of all corpora are shuffled together. `criteria[i]`
// is the criterion index of `corpora[i]`.
std::vector<Batch> make_batches(const Vocab& vocab, const std::vector<const std::vector<LabeledSentence>*>& corpora,
                                const std::vector<std::size_t>& criteria, std::size_t batch_size, std::uint64_t seed,
                                std::size_t epoch);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  std::int64_t step = 0;
  double mean_loss = 0;
  std::vector<std::pair<std::string, double>> dev_f1;  // per evaluated criterion, vocab order
  double macro_dev_f1 = 0;
  bool pretrained_frozen = false;
};

struct TrainResult {
  Checkpoint best;
  std::vector<EpochRecord> log;
  std::vector<double> step_losses;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

TrainResult train(const ModelConfig& model_config, const TrainConfig& config, const std::vector<TrainingCorpus>& corpora,
                  const EpochCallback& on_epoch = {});

// Learns one new criterion row (initialised to the mean of the existing rows)
// from the first `shots` sentences of `train_sentences`; every other parameter
// stays fixed. Dev F1 on `dev_sentences` selects the returned checkpoint.
TrainResult transfer(const Checkpoint& base, const std::string& criterion,
                     const std::vector<LabeledSentence>& train_sentences,
                     const std::vector<LabeledSentence>& dev_sentences, std::size_t shots, const TrainConfig& config,
                     const EpochCallback& on_epoch = {});

// Label sequences predicted for `sentences` under criterion index `criterion`.
std::vector<std::vector<Label>> predict(const Model& model, const std::vector<LabeledSentence>& sentences,
                                        std::size_t criterion, std::size_t batch_size = 256);

// Scores predictions for `sentences` under `criterion` against their gold labels.
EvalRow evaluate(const Model& model, const std::vector<LabeledSentence>& sentences, const std::string& criterion,
                 const std::unordered_set<std::string>& training_words, std::size_t batch_size = 256);

// Segments raw text under a named criterion. Whitespace is dropped and the
// original digit and Latin runs are restored in the output words.
std::vector<std::string> segment(const Model& model, std::string_view text, const std::string& criterion);

}  // namespace mccws
