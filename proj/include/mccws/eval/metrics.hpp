#pragma once

// Word-level scoring of segmentations: span precision/recall/F1 with
// corpus-level micro counts, OOV recall and the macro average over criteria.

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace mccws {

struct Span {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive
  auto operator<=>(const Span&) const = default;
};

// Spans of one sentence, sorted, tiling [0, T).
using SpanSet = std::vector<Span>;

// Cumulative token-length intervals of the words (a <NUM>/<LAT> marker is one token).
SpanSet extract_spans(const std::vector<std::string>& words);

struct Prf {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t correct = 0;
  std::size_t gold = 0;
  std::size_t predicted = 0;
};

// 2PR/(P+R), 0 when P+R = 0.
double harmonic_f1(double precision, double recall);

// Micro-averaged over sentences. Throws std::invalid_argument when the
// sentence counts differ or a pair covers different lengths.
Prf f1(std::span<const SpanSet> gold, std::span<const SpanSet> pred);

struct OovRecall {
  double recall = 1;
  bool vacuous = true;  // no gold word was out of vocabulary
  std::size_t oov_words = 0;
  std::size_t oov_correct = 0;
};

// Fraction of gold words outside `training_words` whose exact span is predicted.
OovRecall oov_recall(std::span<const std::vector<std::string>> gold_words, std::span<const SpanSet> pred,
                     const std::unordered_set<std::string>& training_words);

// Unweighted mean; throws on an empty list.
double macro_average(std::span<const double> values);

struct EvalRow {
  std::string criterion;
  Prf prf;
  OovRecall oov;
};

struct EvalReport {
  std::vector<EvalRow> rows;

  double macro_f1() const;
  // criterion, P, R, F1, OOV-recall, OOV-vacuous as percentages with two
  // decimals, then an "Avg." row with the unweighted means.
  void write_tsv(std::ostream& out) const;
};

}  // namespace mccws
