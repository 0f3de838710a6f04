#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

#include "dsetp/index_set.hpp"

namespace dsetp {

// Label given to the node wrapped around trees that lack a spanning root.
inline constexpr std::string_view kSyntheticRoot = "ROOT";
inline constexpr std::string_view kDefaultUnarySeparator = "+";

struct Constituent {
  std::string label;
  IndexSet yield;

  friend bool operator==(const Constituent&, const Constituent&) = default;
  friend std::strong_ordering operator<=>(const Constituent& a, const Constituent& b) {
    if (auto c = a.yield <=> b.yield; c != 0) return c;
    return a.label.compare(b.label) <=> 0;
  }
};

// A discontinuous constituency tree stored as its set of constituents.
// Preterminals live in pos_tags. Constituents sharing a yield (unary chains)
// are kept adjacent and ordered from the top node down.
struct DiscTree {
  std::vector<std::string> tokens;
  std::vector<std::string> pos_tags;
  std::vector<Constituent> constituents;
  // The root was added at ingestion and is dropped when writing.
  bool synthetic_root = false;

  Position size() const noexcept { return static_cast<Position>(tokens.size()); }

  // Stable sort by yield; keeps unary chains in top-down order.
  void sort_constituents();

  friend bool operator==(const DiscTree&, const DiscTree&) = default;
};

enum class ViolationKind {
  kEmptySentence,
  kLengthMismatch,
  kEmptyYield,
  kOutOfRange,
  kCrossing,
  kMissingRoot,
  kDuplicateYield,
};

struct Violation {
  ViolationKind kind;
  std::string message;
  std::vector<Constituent> constituents;
};

struct ValidateOptions {
  // Accept several constituents with the same yield (uncollapsed input).
  bool allow_unary_chains = false;
};

std::vector<Violation> validate_tree(const DiscTree& tree, ValidateOptions options = {});

// Merge same-yield chains into one constituent labelled "TOP+...+BOTTOM".
// Throws std::invalid_argument if a label already contains the separator.
DiscTree collapse_unaries(const DiscTree& tree, std::string_view sep = kDefaultUnarySeparator);

// Inverse of collapse_unaries.
DiscTree expand_unaries(const DiscTree& tree, std::string_view sep = kDefaultUnarySeparator);

std::vector<std::string> split_label(std::string_view label, std::string_view sep);

}  // namespace dsetp
