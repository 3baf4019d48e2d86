#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace mccws {

// Label order is also the tie-breaking order used by the decoders.
enum class Label : int { B = 0, M = 1, E = 2, S = 3 };
inline constexpr std::size_t kNumLabels = 4;

char label_char(Label label);
Label label_from_char(char c);
std::string labels_to_string(const std::vector<Label>& labels);
std::vector<Label> labels_from_string(const std::string& text);

// True when every B/M is continued by M/E and the sequence ends in E or S.
bool is_well_formed(const std::vector<Label>& labels);

// `word_lengths[i]` is the token count of word i; a zero length throws.
std::vector<Label> words_to_bmes(const std::vector<std::size_t>& word_lengths);

// Half-open token intervals of the words encoded by `labels`. Malformed input
// is repaired: a boundary goes before every B and S, after every E and S, and
// the trailing open word is closed at the end.
std::vector<std::pair<std::size_t, std::size_t>> bmes_to_spans(const std::vector<Label>& labels);

std::vector<std::string> bmes_to_words(const std::vector<std::string>& chars, const std::vector<Label>& labels);

}  // namespace mccws
