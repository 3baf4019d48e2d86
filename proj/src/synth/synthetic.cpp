#include "mccws/synth/synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "mccws/corpus/text.hpp"

namespace mccws {

namespace {

constexpr std::string_view kCharacters =
    "天地人日月山水火木金土风云雨雪春夏秋冬东南西北上下左右前后大小多少高低长短新旧好坏来去出入开关手口心石田花草鸟鱼马牛羊虫";

bool is_digit(const std::string& c) { return c.size() == 1 && c[0] >= '0' && c[0] <= '9'; }

}  // namespace

SyntheticSuite::SyntheticSuite(std::uint64_t seed) {
  alphabet_ = split_chars(kCharacters);
  if (alphabet_.size() != kAlphabetSize) throw std::logic_error("synthetic alphabet has the wrong size");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet_.size() - 1);
  std::set<Pair> seen;
  const std::size_t total = 2 * kDictionarySize - kSharedPairs;
  while (pairs_.size() < total) {
    const auto a = pick(rng), b = pick(rng);
    if (a == b) continue;
    Pair p{alphabet_[a], alphabet_[b]};
    if (seen.insert(p).second) pairs_.push_back(p);
  }
  // Pool layout: [shared | B only | C only].
  const std::size_t own = kDictionarySize - kSharedPairs;
  for (std::size_t i = 0; i < kSharedPairs + own; ++i) dict_b_.insert(pairs_[i]);
  for (std::size_t i = 0; i < kSharedPairs; ++i) dict_c_.insert(pairs_[i]);
  for (std::size_t i = kSharedPairs + own; i < total; ++i) dict_c_.insert(pairs_[i]);
}

const std::set<SyntheticSuite::Pair>& SyntheticSuite::dictionary(char criterion) const {
  switch (criterion) {
    case 'A': return empty_;
    case 'B': return dict_b_;
    case 'C': return dict_c_;
    default: throw std::invalid_argument(std::string("unknown synthetic criterion '") + criterion + "'");
  }
}

std::vector<std::string> SyntheticSuite::sample_text(std::mt19937_64& rng) const {
  std::uniform_int_distribution<int> chunks(6, 20), digits(1, 4), digit(0, 9);
  std::uniform_int_distribution<std::size_t> pair_pick(0, pairs_.size() - 1), char_pick(0, alphabet_.size() - 1);
  std::uniform_real_distribution<double> kind(0, 1);
  std::vector<std::string> text;
  for (int n = chunks(rng); n > 0; --n) {
    const double u = kind(rng);
    if (u < 0.45) {
      const auto& p = pairs_[pair_pick(rng)];
      text.push_back(p.first);
      text.push_back(p.second);
    } else if (u < 0.55) {
      for (int d = digits(rng); d > 0; --d) text.push_back(std::string(1, static_cast<char>('0' + digit(rng))));
    } else {
      text.push_back(alphabet_[char_pick(rng)]);
    }
  }
  text.push_back("。");
  return text;
}

std::vector<std::vector<std::string>> SyntheticSuite::sample_texts(std::size_t count, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::string>> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_text(rng));
  return out;
}

std::vector<std::string> SyntheticSuite::segment(const std::vector<std::string>& text, char criterion) const {
  const auto& dict = dictionary(criterion);
  std::vector<std::string> words;
  for (std::size_t i = 0; i < text.size();) {
    if (is_digit(text[i])) {
      std::string run;
      while (i < text.size() && is_digit(text[i])) run += text[i++];
      words.push_back(run);
    } else if (i + 1 < text.size() && dict.contains({text[i], text[i + 1]})) {
      words.push_back(text[i] + text[i + 1]);
      i += 2;
    } else {
      words.push_back(text[i++]);
    }
  }
  return words;
}

void SyntheticSuite::write_corpora(const std::filesystem::path& dir, const std::string& criteria,
                                   std::size_t train_count, std::size_t test_count, std::uint64_t seed) const {
  std::filesystem::create_directories(dir);
  const auto test_texts = sample_texts(test_count, seed);
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const char c = criteria[k];
    dictionary(c);
    const auto train_texts = sample_texts(train_count, seed + 1 + k);
    auto write = [&](const std::string& split, const std::vector<std::vector<std::string>>& texts) {
      const auto path = dir / (std::string(1, c) + "." + split + ".txt");
      std::ofstream out(path);
      if (!out) throw std::runtime_error("cannot write " + path.string());
      for (const auto& t : texts) out << join_words(segment(t, c)) << '\n';
    };
    write("train", train_texts);
    write("test", test_texts);
  }
}

}  // namespace mccws
