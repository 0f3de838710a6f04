#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dsetp/tree.hpp"

namespace dsetp {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Symbol table ranked by frequency (descending), ties broken lexicographically.
// When built with an unknown entry it sits at id 0.
class Vocabulary {
 public:
  static constexpr std::string_view kUnknown = "<UNK>";

  Vocabulary() = default;
  static Vocabulary from_counts(const std::map<std::string, std::size_t>& counts,
                                bool with_unknown);
  // Keeps the given order; used when loading a saved model.
  static Vocabulary from_entries(std::vector<std::pair<std::string, std::size_t>> entries,
                                 bool with_unknown);

  std::size_t size() const noexcept { return symbols_.size(); }
  bool has_unknown() const noexcept { return with_unknown_; }
  const std::string& symbol(std::size_t id) const { return symbols_.at(id); }
  std::size_t count(std::size_t id) const { return counts_.at(id); }
  std::optional<std::size_t> find(std::string_view symbol) const;
  // Falls back to the unknown id; throws std::out_of_range without one.
  std::size_t lookup(std::string_view symbol) const;
  const std::vector<std::string>& symbols() const noexcept { return symbols_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.symbols_ == b.symbols_ && a.counts_ == b.counts_ && a.with_unknown_ == b.with_unknown_;
  }

 private:
  std::vector<std::string> symbols_;
  std::vector<std::size_t> counts_;
  std::map<std::string, std::size_t, std::less<>> index_;
  bool with_unknown_ = false;
};

struct Inventories {
  Vocabulary words;
  Vocabulary chars;
  Vocabulary pos;
  Vocabulary nonterminals;
  // Per word id: may be replaced by the unknown word during training.
  std::vector<bool> unk_replaceable;

  friend bool operator==(const Inventories&, const Inventories&) = default;
};

struct Corpus {
  std::vector<DiscTree> trees;
  Inventories inventories;
};

struct ReadOptions {
  std::string unary_sep = std::string(kDefaultUnarySeparator);
};

// One tree per line: node := "(" LABEL child+ ")", terminal := INDEX "=" TOKEN.
// Several top-level nodes on one line form a forest and get a synthetic root.
DiscTree parse_discbracket(std::string_view line, std::size_t line_number = 1,
                           const ReadOptions& options = {});

std::vector<DiscTree> read_trees(std::istream& in, const ReadOptions& options = {});

// read_trees followed by build_vocabularies.
Corpus read_discbracket(std::istream& in, const ReadOptions& options = {});

std::string write_discbracket(const DiscTree& tree, std::string_view sep = kDefaultUnarySeparator);

inline constexpr double kDefaultUnkFraction = 2.0 / 3.0;

// Throws std::invalid_argument on an empty corpus. Marks the least frequent
// kDefaultUnkFraction of word types as replaceable.
Corpus build_vocabularies(std::vector<DiscTree> trees);

// Marks the floor(fraction * types) least frequent word types as replaceable
// by the unknown word.
void mark_rare_words(Inventories& inv, double fraction);

// Code points of a UTF-8 token, each as its own string.
std::vector<std::string> utf8_chars(std::string_view token);

}  // namespace dsetp
