#pragma once

// Character-level text handling: UTF-8 splitting, full-width folding,
// digit/Latin run replacement and clause splitting.

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mccws {

inline constexpr std::string_view kNumToken = "<NUM>";
inline constexpr std::string_view kLatToken = "<LAT>";

class TextError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<char32_t> decode_utf8(std::string_view text);
std::string encode_utf8(char32_t cp);
std::string encode_utf8(const std::vector<char32_t>& cps);

// Folds U+FF01..U+FF5E onto U+0021..U+007E and U+3000 onto U+0020.
std::string normalize_width(std::string_view text);

// Splits text into character tokens. The literal markers <NUM> and <LAT> are
// kept whole so preprocessed text tokenizes back to the same tokens.
std::vector<std::string> split_chars(std::string_view text);

// A preprocessed token and the original characters it stands for.
struct SurfaceToken {
  std::string token;
  std::string surface;
};

// Collapses each maximal run of ASCII digits into <NUM> and each maximal run
// of ASCII letters into <LAT>; other tokens pass through.
std::vector<std::string> replace_runs(const std::vector<std::string>& chars);
std::vector<SurfaceToken> replace_runs_with_surface(const std::vector<std::string>& chars);

bool is_clause_punctuation(std::string_view word);

// Splits a segmented sentence after each clause punctuation word.
std::vector<std::vector<std::string>> split_clauses(const std::vector<std::string>& words);

// Splits on ASCII whitespace, dropping empty pieces.
std::vector<std::string> split_words(std::string_view line);
std::string join_words(const std::vector<std::string>& words, std::string_view sep = " ");

}  // namespace mccws
