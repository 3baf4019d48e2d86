#include "mccws/corpus/bmes.hpp"

#include <stdexcept>

namespace mccws {

char label_char(Label label) {
  static constexpr char kChars[] = {'B', 'M', 'E', 'S'};
  return kChars[static_cast<int>(label)];
}

Label label_from_char(char c) {
  switch (c) {
    case 'B': return Label::B;
    case 'M': return Label::M;
    case 'E': return Label::E;
    case 'S': return Label::S;
    default: throw std::invalid_argument(std::string("not a BMES label: ") + c);
  }
}

std::string labels_to_string(const std::vector<Label>& labels) {
  std::string s;
  for (Label l : labels) s += label_char(l);
  return s;
}

std::vector<Label> labels_from_string(const std::string& text) {
  std::vector<Label> out;
  for (char c : text)
    if (c != ' ') out.push_back(label_from_char(c));
  return out;
}

bool is_well_formed(const std::vector<Label>& labels) {
  if (labels.empty()) return false;
  for (std::size_t t = 0; t + 1 < labels.size(); ++t) {
    const Label cur = labels[t], next = labels[t + 1];
    const bool open = cur == Label::B || cur == Label::M;
    const bool continues = next == Label::M || next == Label::E;
    if (open != continues) return false;
  }
  const Label last = labels.back();
  return last == Label::E || last == Label::S;
}

std::vector<Label> words_to_bmes(const std::vector<std::size_t>& word_lengths) {
  std::vector<Label> labels;
  for (std::size_t n : word_lengths) {
    if (n == 0) throw std::invalid_argument("words_to_bmes: empty word");
    if (n == 1) {
      labels.push_back(Label::S);
      continue;
    }
    labels.push_back(Label::B);
    labels.insert(labels.end(), n - 2, Label::M);
    labels.push_back(Label::E);
  }
  return labels;
}

std::vector<std::pair<std::size_t, std::size_t>> bmes_to_spans(const std::vector<Label>& labels) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  std::size_t start = 0;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const Label l = labels[t];
    if ((l == Label::B || l == Label::S) && t > start) {
      spans.emplace_back(start, t);
      start = t;
    }
    if (l == Label::E || l == Label::S) {
      spans.emplace_back(start, t + 1);
      start = t + 1;
    }
  }
  if (start < labels.size()) spans.emplace_back(start, labels.size());
  return spans;
}

std::vector<std::string> bmes_to_words(const std::vector<std::string>& chars, const std::vector<Label>& labels) {
  if (chars.size() != labels.size()) throw std::invalid_argument("bmes_to_words: length mismatch");
  std::vector<std::string> words;
  for (const auto& [b, e] : bmes_to_spans(labels)) {
    std::string w;
    for (std::size_t t = b; t < e; ++t) w += chars[t];
    words.push_back(std::move(w));
  }
  return words;
}

}  // namespace mccws
