#include "mccws/corpus/vocab.hpp"

#include <ostream>

namespace mccws {

SymbolTable::SymbolTable() {
  for (const auto& s : kReservedSymbols) add(s, 0);
}

std::int64_t SymbolTable::add(const std::string& symbol, std::int64_t count) {
  if (auto it = index_.find(symbol); it != index_.end()) {
    counts_[static_cast<std::size_t>(it->second)] += count;
    return it->second;
  }
  const auto idx = static_cast<std::int64_t>(symbols_.size());
  symbols_.push_back(symbol);
  counts_.push_back(count);
  index_.emplace(symbol, idx);
  return idx;
}

std::int64_t SymbolTable::index(const std::string& symbol) const {
  auto it = index_.find(symbol);
  return it == index_.end() ? kUnk : it->second;
}

std::optional<std::int64_t> SymbolTable::find(const std::string& symbol) const {
  auto it = index_.find(symbol);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void SymbolTable::write_tsv(std::ostream& out) const {
  for (std::size_t i = 0; i < symbols_.size(); ++i) out << symbols_[i] << '\t' << i << '\t' << counts_[i] << '\n';
}

std::string bigram_symbol(const std::string& left, const std::string& right) { return left + " " + right; }

std::optional<std::size_t> Vocab::criterion_index(const std::string& name) const {
  for (std::size_t i = 0; i < criteria.size(); ++i)
    if (criteria[i] == name) return i;
  return std::nullopt;
}

std::size_t Vocab::add_criterion(const std::string& name) {
  if (auto idx = criterion_index(name)) return *idx;
  criteria.push_back(name);
  return criteria.size() - 1;
}

std::string Vocab::criteria_list() const {
  std::string s;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (i) s += ",";
    s += criteria[i];
  }
  return s;
}

}  // namespace mccws
