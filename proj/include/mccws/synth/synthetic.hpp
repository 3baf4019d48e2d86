#pragma once

// Deterministic synthetic corpora under three disagreeing criteria:
//   A: every digit run is one word, everything else a single character;
//   B: A plus greedy left-to-right merging of a 50-pair dictionary;
//   C: the same with another 50-pair dictionary that shares most pairs with B.

#include <cstdint>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace mccws {

class SyntheticSuite {
 public:
  using Pair = std::pair<std::string, std::string>;

  static constexpr std::size_t kAlphabetSize = 60;
  static constexpr std::size_t kDictionarySize = 50;
  static constexpr std::size_t kSharedPairs = 40;

  explicit SyntheticSuite(std::uint64_t seed = 2019);

  const std::vector<std::string>& alphabet() const { return alphabet_; }
  // Empty for criterion 'A'.
  const std::set<Pair>& dictionary(char criterion) const;

  // One unsegmented sentence as characters, ending in "。".
  std::vector<std::string> sample_text(std::mt19937_64& rng) const;
  std::vector<std::vector<std::string>> sample_texts(std::size_t count, std::uint64_t seed) const;

  std::vector<std::string> segment(const std::vector<std::string>& text, char criterion) const;

  // Writes <criterion>.train.txt and <criterion>.test.txt (bakeoff layout) for
  // every criterion in `criteria`. Test inputs are shared across criteria.
  void write_corpora(const std::filesystem::path& dir, const std::string& criteria, std::size_t train_count,
                     std::size_t test_count, std::uint64_t seed) const;

 private:
  std::vector<std::string> alphabet_;
  std::vector<Pair> pairs_;  // B∪C pool used by the text sampler
  std::set<Pair> dict_b_, dict_c_, empty_;
};

}  // namespace mccws
