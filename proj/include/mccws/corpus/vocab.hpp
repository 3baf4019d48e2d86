#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace mccws {

// Reserved symbols occupy the first indices of every symbol table.
enum ReservedIndex : std::int64_t { kPad = 0, kUnk = 1, kBos = 2, kEos = 3, kNum = 4, kLat = 5 };
inline const std::vector<std::string> kReservedSymbols = {"<PAD>", "<UNK>", "<BOS>", "<EOS>", "<NUM>", "<LAT>"};

class SymbolTable {
 public:
  SymbolTable();

  // Adds `symbol` if absent (or bumps its count) and returns its index.
  std::int64_t add(const std::string& symbol, std::int64_t count = 1);
  // Index of `symbol`, or kUnk when absent.
  std::int64_t index(const std::string& symbol) const;
  std::optional<std::int64_t> find(const std::string& symbol) const;
  const std::string& symbol(std::int64_t index) const { return symbols_.at(static_cast<std::size_t>(index)); }
  std::int64_t frequency(std::int64_t index) const { return counts_.at(static_cast<std::size_t>(index)); }
  std::size_t size() const { return symbols_.size(); }

  // symbol \t index \t frequency
  void write_tsv(std::ostream& out) const;

 private:
  std::vector<std::string> symbols_;
  std::vector<std::int64_t> counts_;
  std::unordered_map<std::string, std::int64_t> index_;
};

// Joins the two tokens of a bigram into its table symbol.
std::string bigram_symbol(const std::string& left, const std::string& right);

struct Vocab {
  SymbolTable unigrams;
  SymbolTable bigrams;
  std::vector<std::string> criteria;

  std::optional<std::size_t> criterion_index(const std::string& name) const;
  // Returns the existing index or appends a new criterion.
  std::size_t add_criterion(const std::string& name);
  std::string criteria_list() const;
};

}  // namespace mccws
