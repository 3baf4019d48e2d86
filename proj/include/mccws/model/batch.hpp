#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mccws/corpus/corpus.hpp"
#include "mccws/corpus/vocab.hpp"
#include "mccws/numeric/kernels.hpp"

namespace mccws {

// Sentences padded to a common length. Positions t >= lengths[i] are padding:
// they carry kPad ids and label -1 and are excluded from attention and loss.
struct Batch {
  std::size_t size = 0;
  std::size_t max_len = 0;
  std::vector<std::size_t> criteria;
  std::vector<std::size_t> lengths;
  std::vector<std::int64_t> unigrams;  // size x max_len
  std::vector<std::int64_t> bigrams;   // size x (max_len + 1); bigram t sits between tokens t-1 and t
  std::vector<int> labels;             // size x max_len, empty for unlabeled batches

  bool is_valid(std::size_t i, std::size_t t) const { return t < lengths[i]; }
  bool labeled() const { return !labels.empty(); }
};

// Builds a batch from labeled sentences (criterion taken from each sentence).
Batch make_batch(const Vocab& vocab, std::span<const LabeledSentence* const> sentences);
Batch make_batch(const Vocab& vocab, const std::vector<LabeledSentence>& sentences);
// Builds an unlabeled batch of token sequences under one criterion.
Batch make_unlabeled_batch(const Vocab& vocab, const std::vector<std::vector<std::string>>& token_rows,
                           std::size_t criterion);

// Row layout of a batch once padding is dropped.
struct PackedLayout {
  std::vector<kernels::Segment> encoder_segments;  // T+1 rows per sentence (criterion row first)
  std::vector<kernels::Segment> char_segments;     // T rows per sentence
  std::vector<std::int64_t> char_rows;             // encoder row of every character
  std::vector<std::int64_t> criterion_rows;        // encoder row of every criterion token
  std::size_t encoder_rows = 0;
  std::size_t char_count = 0;
};

PackedLayout pack_layout(const Batch& batch);

}  // namespace mccws
