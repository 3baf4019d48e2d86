#include "mccws/corpus/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <unordered_map>

#include "mccws/corpus/text.hpp"

namespace mccws {

RawCorpus read_raw_corpus(const std::filesystem::path& path, std::string name, std::string criterion) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot read corpus file " + path.string());
  RawCorpus raw{std::move(name), std::move(criterion), {}};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (split_words(line).empty()) continue;
    raw.lines.push_back(line);
  }
  return raw;
}

std::vector<std::string> preprocess_words(std::string_view line) {
  std::vector<std::string> words;
  for (const auto& w : split_words(normalize_width(line))) words.push_back(join_words(replace_runs(split_chars(w)), ""));
  return words;
}

LabeledSentence make_sentence(const std::vector<std::string>& words, std::size_t criterion_id) {
  LabeledSentence s;
  s.criterion_id = criterion_id;
  std::vector<std::size_t> lengths;
  for (const auto& w : words) {
    auto chars = split_chars(w);
    lengths.push_back(chars.size());
    s.chars.insert(s.chars.end(), chars.begin(), chars.end());
  }
  s.labels = words_to_bmes(lengths);
  return s;
}

Corpus preprocess_corpus(const RawCorpus& raw, bool split_into_clauses) {
  Corpus corpus{raw.name, raw.criterion, {}};
  for (const auto& line : raw.lines) {
    auto words = preprocess_words(line);
    if (words.empty()) continue;
    if (split_into_clauses) {
      for (const auto& clause : split_clauses(words)) corpus.sentences.push_back(make_sentence(clause));
    } else {
      corpus.sentences.push_back(make_sentence(words));
    }
  }
  return corpus;
}

std::vector<std::string> sentence_bigrams(const std::vector<std::string>& chars) {
  std::vector<std::string> out;
  out.reserve(chars.size() + 1);
  const std::string& bos = kReservedSymbols[kBos];
  const std::string& eos = kReservedSymbols[kEos];
  for (std::size_t t = 0; t <= chars.size(); ++t) {
    const std::string& left = t == 0 ? bos : chars[t - 1];
    const std::string& right = t == chars.size() ? eos : chars[t];
    out.push_back(bigram_symbol(left, right));
  }
  return out;
}

Vocab build_vocab(const std::vector<Corpus>& corpora, std::int64_t min_count_unigram, std::int64_t min_count_bigram) {
  if (corpora.empty()) throw CorpusError("build_vocab: no corpora");
  // Count first, then insert in first-seen order so indices are deterministic.
  std::vector<std::string> uni_order, bi_order;
  std::unordered_map<std::string, std::int64_t> uni_count, bi_count;
  Vocab vocab;
  for (const auto& corpus : corpora) {
    vocab.add_criterion(corpus.criterion);
    for (const auto& s : corpus.sentences) {
      for (const auto& c : s.chars)
        if (uni_count[c]++ == 0) uni_order.push_back(c);
      for (const auto& b : sentence_bigrams(s.chars))
        if (bi_count[b]++ == 0) bi_order.push_back(b);
    }
  }
  for (const auto& c : uni_order)
    if (uni_count[c] >= min_count_unigram) vocab.unigrams.add(c, uni_count[c]);
  for (const auto& b : bi_order)
    if (bi_count[b] >= min_count_bigram) vocab.bigrams.add(b, bi_count[b]);
  return vocab;
}

std::pair<std::vector<LabeledSentence>, std::vector<LabeledSentence>> split_train_dev(
    const std::vector<LabeledSentence>& sentences, double ratio, std::uint64_t seed) {
  if (sentences.size() < 10) {
    throw CorpusError("split_train_dev: need at least 10 sentences, got " + std::to_string(sentences.size()));
  }
  std::vector<std::size_t> order(sentences.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_dev = std::max<std::size_t>(1, static_cast<std::size_t>(static_cast<double>(sentences.size()) * ratio));
  std::vector<std::size_t> dev_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_dev));
  std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_dev), order.end());
  std::sort(dev_idx.begin(), dev_idx.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::pair<std::vector<LabeledSentence>, std::vector<LabeledSentence>> out;
  for (auto i : train_idx) out.first.push_back(sentences[i]);
  for (auto i : dev_idx) out.second.push_back(sentences[i]);
  return out;
}

std::unordered_set<std::string> training_word_set(const std::vector<LabeledSentence>& sentences) {
  std::unordered_set<std::string> words;
  for (const auto& s : sentences)
    for (auto& w : s.words()) words.insert(std::move(w));
  return words;
}

CorpusStats corpus_stats(const std::vector<LabeledSentence>& sentences,
                         const std::unordered_set<std::string>* training_words) {
  CorpusStats stats;
  std::unordered_set<std::string> word_types, char_types;
  std::size_t oov = 0;
  for (const auto& s : sentences) {
    stats.chars += s.chars.size();
    char_types.insert(s.chars.begin(), s.chars.end());
    for (auto& w : s.words()) {
      ++stats.words;
      if (training_words && !training_words->contains(w)) ++oov;
      word_types.insert(std::move(w));
    }
  }
  stats.word_types = word_types.size();
  stats.char_types = char_types.size();
  if (training_words) stats.oov_rate = stats.words ? static_cast<double>(oov) / static_cast<double>(stats.words) : 0.0;
  return stats;
}

void write_segmented(const std::filesystem::path& path, const std::vector<LabeledSentence>& sentences) {
  std::ofstream out(path);
  if (!out) throw CorpusError("cannot write " + path.string());
  for (const auto& s : sentences) out << join_words(s.words()) << '\n';
}

}  // namespace mccws
