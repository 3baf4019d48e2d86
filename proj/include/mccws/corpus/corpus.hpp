#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mccws/corpus/bmes.hpp"
#include "mccws/corpus/vocab.hpp"

namespace mccws {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Word-segmented lines as read from disk (SIGHAN bakeoff layout).
struct RawCorpus {
  std::string name;
  std::string criterion;
  std::vector<std::string> lines;
};

struct LabeledSentence {
  std::vector<std::string> chars;  // post-preprocessing tokens
  std::vector<Label> labels;
  std::size_t criterion_id = 0;

  std::vector<std::string> words() const { return bmes_to_words(chars, labels); }
};

// A preprocessed corpus under one criterion.
struct Corpus {
  std::string name;
  std::string criterion;
  std::vector<LabeledSentence> sentences;
};

RawCorpus read_raw_corpus(const std::filesystem::path& path, std::string name, std::string criterion);

// Width-normalizes a segmented line and replaces digit/Latin runs inside each word.
std::vector<std::string> preprocess_words(std::string_view line);

LabeledSentence make_sentence(const std::vector<std::string>& words, std::size_t criterion_id = 0);

// Full preprocessing; clause splitting is applied only when requested (train/dev).
Corpus preprocess_corpus(const RawCorpus& raw, bool split_into_clauses);

// Bigram symbols around each token: (BOS,x1), (x1,x2), ..., (xT,EOS).
std::vector<std::string> sentence_bigrams(const std::vector<std::string>& chars);

Vocab build_vocab(const std::vector<Corpus>& corpora, std::int64_t min_count_unigram = 1,
                  std::int64_t min_count_bigram = 1);

// Deterministic shuffled split: floor(n * ratio) sentences (at least one) go to dev.
std::pair<std::vector<LabeledSentence>, std::vector<LabeledSentence>> split_train_dev(
    const std::vector<LabeledSentence>& sentences, double ratio, std::uint64_t seed);

std::unordered_set<std::string> training_word_set(const std::vector<LabeledSentence>& sentences);

struct CorpusStats {
  std::size_t words = 0;
  std::size_t chars = 0;
  std::size_t word_types = 0;
  std::size_t char_types = 0;
  // Share of word tokens absent from the reference word set, when one is given.
  std::optional<double> oov_rate;
};

CorpusStats corpus_stats(const std::vector<LabeledSentence>& sentences,
                         const std::unordered_set<std::string>* training_words = nullptr);

void write_segmented(const std::filesystem::path& path, const std::vector<LabeledSentence>& sentences);

}  // namespace mccws
