#include "mccws/model/batch.hpp"

#include <algorithm>
#include <stdexcept>

namespace mccws {

namespace {

Batch allocate(std::size_t size, std::size_t max_len) {
  Batch b;
  b.size = size;
  b.max_len = max_len;
  b.criteria.resize(size);
  b.lengths.resize(size);
  b.unigrams.assign(size * max_len, kPad);
  b.bigrams.assign(size * (max_len + 1), kPad);
  return b;
}

void fill_row(Batch& b, std::size_t i, const Vocab& vocab, const std::vector<std::string>& chars) {
  if (chars.empty()) throw std::invalid_argument("batch rows must contain at least one token");
  b.lengths[i] = chars.size();
  for (std::size_t t = 0; t < chars.size(); ++t) b.unigrams[i * b.max_len + t] = vocab.unigrams.index(chars[t]);
  const auto bigrams = sentence_bigrams(chars);
  for (std::size_t t = 0; t < bigrams.size(); ++t) b.bigrams[i * (b.max_len + 1) + t] = vocab.bigrams.index(bigrams[t]);
}

}  // namespace

Batch make_batch(const Vocab& vocab, std::span<const LabeledSentence* const> sentences) {
  std::size_t max_len = 0;
  for (const auto* s : sentences) max_len = std::max(max_len, s->chars.size());
  Batch b = allocate(sentences.size(), max_len);
  b.labels.assign(b.size * max_len, -1);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto& s = *sentences[i];
    if (s.labels.size() != s.chars.size()) throw std::invalid_argument("sentence label count differs from length");
    b.criteria[i] = s.criterion_id;
    fill_row(b, i, vocab, s.chars);
    for (std::size_t t = 0; t < s.labels.size(); ++t) b.labels[i * max_len + t] = static_cast<int>(s.labels[t]);
  }
  return b;
}

Batch make_batch(const Vocab& vocab, const std::vector<LabeledSentence>& sentences) {
  std::vector<const LabeledSentence*> ptrs;
  for (const auto& s : sentences) ptrs.push_back(&s);
  return make_batch(vocab, ptrs);
}

Batch make_unlabeled_batch(const Vocab& vocab, const std::vector<std::vector<std::string>>& token_rows,
                           std::size_t criterion) {
  std::size_t max_len = 0;
  for (const auto& r : token_rows) max_len = std::max(max_len, r.size());
  Batch b = allocate(token_rows.size(), max_len);
  for (std::size_t i = 0; i < token_rows.size(); ++i) {
    b.criteria[i] = criterion;
    fill_row(b, i, vocab, token_rows[i]);
  }
  return b;
}

PackedLayout pack_layout(const Batch& batch) {
  PackedLayout layout;
  std::size_t row = 0, chars = 0;
  for (std::size_t i = 0; i < batch.size; ++i) {
    const std::size_t len = batch.lengths[i];
    layout.encoder_segments.push_back({row, len + 1});
    layout.char_segments.push_back({chars, len});
    layout.criterion_rows.push_back(static_cast<std::int64_t>(row));
    for (std::size_t t = 0; t < len; ++t) layout.char_rows.push_back(static_cast<std::int64_t>(row + 1 + t));
    row += len + 1;
    chars += len;
  }
  layout.encoder_rows = row;
  layout.char_count = chars;
  return layout;
}

}  // namespace mccws
