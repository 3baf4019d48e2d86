#include "mccws/eval/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "mccws/corpus/text.hpp"

namespace mccws {

SpanSet extract_spans(const std::vector<std::string>& words) {
  SpanSet spans;
  spans.reserve(words.size());
  std::size_t start = 0;
  for (const auto& w : words) {
    const std::size_t len = split_chars(w).size();
    spans.push_back({start, start + len});
    start += len;
  }
  return spans;
}

double harmonic_f1(double precision, double recall) {
  return precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
}

namespace {

std::size_t covered_length(const SpanSet& s) { return s.empty() ? 0 : s.back().end; }

std::size_t intersect(const SpanSet& a, const SpanSet& b) {
  // Both sorted by start; tiling spans are unique per start.
  std::size_t i = 0, j = 0, n = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++n;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return n;
}

}  // namespace

Prf f1(std::span<const SpanSet> gold, std::span<const SpanSet> pred) {
  if (gold.size() != pred.size())
    throw std::invalid_argument("f1: " + std::to_string(gold.size()) + " gold vs " + std::to_string(pred.size()) +
                                " predicted sentences");
  const auto n = static_cast<std::ptrdiff_t>(gold.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (covered_length(gold[i]) != covered_length(pred[i]))
      throw std::invalid_argument("f1: sentence " + std::to_string(i) + " has different gold and predicted lengths");
  }
  std::size_t correct = 0, g = 0, p = 0;
#pragma omp parallel for reduction(+ : correct, g, p) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    correct += intersect(gold[i], pred[i]);
    g += gold[i].size();
    p += pred[i].size();
  }
  Prf r;
  r.correct = correct;
  r.gold = g;
  r.predicted = p;
  r.precision = p ? static_cast<double>(correct) / static_cast<double>(p) : 0.0;
  r.recall = g ? static_cast<double>(correct) / static_cast<double>(g) : 0.0;
  r.f1 = harmonic_f1(r.precision, r.recall);
  return r;
}

OovRecall oov_recall(std::span<const std::vector<std::string>> gold_words, std::span<const SpanSet> pred,
                     const std::unordered_set<std::string>& training_words) {
  if (gold_words.size() != pred.size()) throw std::invalid_argument("oov_recall: sentence counts differ");
  OovRecall r;
  for (std::size_t i = 0; i < gold_words.size(); ++i) {
    const SpanSet spans = extract_spans(gold_words[i]);
    for (std::size_t w = 0; w < spans.size(); ++w) {
      if (training_words.contains(gold_words[i][w])) continue;
      ++r.oov_words;
      if (std::binary_search(pred[i].begin(), pred[i].end(), spans[w])) ++r.oov_correct;
    }
  }
  r.vacuous = r.oov_words == 0;
  r.recall = r.vacuous ? 1.0 : static_cast<double>(r.oov_correct) / static_cast<double>(r.oov_words);
  return r;
}

double macro_average(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("macro_average of an empty list");
  double sum = 0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double EvalReport::macro_f1() const {
  std::vector<double> f;
  for (const auto& r : rows) f.push_back(r.prf.f1);
  return macro_average(f);
}

void EvalReport::write_tsv(std::ostream& out) const {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::fixed << std::setprecision(2);
  out << "criterion\tP\tR\tF1\tOOV-recall\tOOV-vacuous\n";
  for (const auto& r : rows) {
    out << r.criterion << '\t' << 100 * r.prf.precision << '\t' << 100 * r.prf.recall << '\t' << 100 * r.prf.f1
        << '\t' << 100 * r.oov.recall << '\t' << (r.oov.vacuous ? "yes" : "no") << '\n';
  }
  if (!rows.empty()) {
    std::vector<double> p, rc, f, o;
    bool all_vacuous = true;
    for (const auto& r : rows) {
      p.push_back(r.prf.precision);
      rc.push_back(r.prf.recall);
      f.push_back(r.prf.f1);
      o.push_back(r.oov.recall);
      all_vacuous = all_vacuous && r.oov.vacuous;
    }
    out << "Avg.\t" << 100 * macro_average(p) << '\t' << 100 * macro_average(rc) << '\t' << 100 * macro_average(f)
        << '\t' << 100 * macro_average(o) << '\t' << (all_vacuous ? "yes" : "no") << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace mccws
