#include "mccws/corpus/text.hpp"

#include <array>

namespace mccws {

std::vector<char32_t> decode_utf8(std::string_view text) {
  std::vector<char32_t> out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      throw TextError("invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    if (i + len > text.size()) throw TextError("truncated UTF-8 sequence at offset " + std::to_string(i));
    for (std::size_t j = 1; j < len; ++j) {
      const auto b = static_cast<unsigned char>(text[i + j]);
      if ((b & 0xC0) != 0x80) throw TextError("invalid UTF-8 continuation at offset " + std::to_string(i + j));
      cp = (cp << 6) | (b & 0x3F);
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(char32_t cp) {
  std::string s;
  if (cp < 0x80) {
    s += static_cast<char>(cp);
  } else if (cp < 0x800) {
    s += static_cast<char>(0xC0 | (cp >> 6));
    s += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    s += static_cast<char>(0xE0 | (cp >> 12));
    s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    s += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    s += static_cast<char>(0xF0 | (cp >> 18));
    s += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    s += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return s;
}

std::string encode_utf8(const std::vector<char32_t>& cps) {
  std::string s;
  for (char32_t cp : cps) s += encode_utf8(cp);
  return s;
}

std::string normalize_width(std::string_view text) {
  auto cps = decode_utf8(text);
  for (auto& cp : cps) {
    if (cp >= 0xFF01 && cp <= 0xFF5E) {
      cp -= 0xFEE0;
    } else if (cp == 0x3000) {
      cp = 0x20;
    }
  }
  return encode_utf8(cps);
}

std::vector<std::string> split_chars(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text.substr(i, kNumToken.size()) == kNumToken || text.substr(i, kLatToken.size()) == kLatToken) {
      out.emplace_back(text.substr(i, 5));
      i += 5;
      continue;
    }
    const auto b0 = static_cast<unsigned char>(text[i]);
    std::size_t len = b0 < 0x80 ? 1 : (b0 & 0xE0) == 0xC0 ? 2 : (b0 & 0xF0) == 0xE0 ? 3 : (b0 & 0xF8) == 0xF0 ? 4 : 0;
    if (len == 0 || i + len > text.size()) throw TextError("invalid UTF-8 at offset " + std::to_string(i));
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

namespace {

enum class RunKind { none, digit, latin };

RunKind run_kind(const std::string& ch) {
  if (ch.size() != 1) return RunKind::none;
  const char c = ch[0];
  if (c >= '0' && c <= '9') return RunKind::digit;
  if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) return RunKind::latin;
  return RunKind::none;
}

}  // namespace

std::vector<SurfaceToken> replace_runs_with_surface(const std::vector<std::string>& chars) {
  std::vector<SurfaceToken> out;
  RunKind current = RunKind::none;
  for (const auto& ch : chars) {
    const RunKind kind = run_kind(ch);
    if (kind != RunKind::none && kind == current) {
      out.back().surface += ch;
      continue;
    }
    current = kind;
    if (kind == RunKind::digit) {
      out.push_back({std::string(kNumToken), ch});
    } else if (kind == RunKind::latin) {
      out.push_back({std::string(kLatToken), ch});
    } else {
      out.push_back({ch, ch});
    }
  }
  return out;
}

std::vector<std::string> replace_runs(const std::vector<std::string>& chars) {
  std::vector<std::string> out;
  for (auto& t : replace_runs_with_surface(chars)) out.push_back(std::move(t.token));
  return out;
}

bool is_clause_punctuation(std::string_view word) {
  static constexpr std::array<std::string_view, 11> kPunct = {"。", "，", "！", "？", "；", "、", ".", ",", "!", "?", ";"};
  for (auto p : kPunct)
    if (word == p) return true;
  return false;
}

std::vector<std::vector<std::string>> split_clauses(const std::vector<std::string>& words) {
  std::vector<std::vector<std::string>> clauses;
  std::vector<std::string> current;
  for (const auto& w : words) {
    current.push_back(w);
    if (is_clause_punctuation(w)) {
      clauses.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) clauses.push_back(std::move(current));
  return clauses;
}

std::vector<std::string> split_words(std::string_view line) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r' || line[i] == '\n')) ++i;
    std::size_t j = i;
    while (j < line.size() && !(line[j] == ' ' || line[j] == '\t' || line[j] == '\r' || line[j] == '\n')) ++j;
    if (j > i) words.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return words;
}

std::string join_words(const std::vector<std::string>& words, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += sep;
    out += words[i];
  }
  return out;
}

}  // namespace mccws
