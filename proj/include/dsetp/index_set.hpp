#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dsetp {

// Position of a token in the sentence, 0-based.
using Position = std::int32_t;

// Sorted set of token positions. Holds the yield of a (partial) constituent.
class IndexSet {
 public:
  using const_iterator = std::vector<Position>::const_iterator;

  IndexSet() = default;
  IndexSet(std::initializer_list<Position> positions);
  // Sorts the input; throws std::invalid_argument on duplicates or negatives.
  explicit IndexSet(std::vector<Position> positions);

  static IndexSet singleton(Position p);
  // All positions in [first, last] inclusive.
  static IndexSet range(Position first, Position last);

  bool empty() const noexcept { return positions_.empty(); }
  std::size_t size() const noexcept { return positions_.size(); }

  // Throw std::domain_error on the empty set.
  Position min() const;
  Position max() const;

  bool contains(Position p) const;
  bool is_subset_of(const IndexSet& other) const;
  bool is_disjoint_from(const IndexSet& other) const;
  IndexSet union_with(const IndexSet& other) const;

  std::span<const Position> positions() const noexcept { return positions_; }
  const_iterator begin() const noexcept { return positions_.begin(); }
  const_iterator end() const noexcept { return positions_.end(); }

  // "{1,5,6}"
  std::string to_string() const;

  friend bool operator==(const IndexSet&, const IndexSet&) = default;
  friend std::strong_ordering operator<=>(const IndexSet& a, const IndexSet& b) {
    return a.positions_ <=> b.positions_;
  }

 private:
  std::vector<Position> positions_;
};

Position left_index(const IndexSet& s);
Position right_index(const IndexSet& s);

// Positions strictly between min(s) and max(s) that are not in s.
IndexSet gap_set(const IndexSet& s);

// (min(s), max(s), min(gap), max(gap)); gap slots are nullopt for a
// contiguous set.
struct Boundaries {
  Position left = 0;
  Position right = 0;
  std::optional<Position> gap_left;
  std::optional<Position> gap_right;

  friend bool operator==(const Boundaries&, const Boundaries&) = default;
};

Boundaries boundary_tuple(const IndexSet& s);

// s is a subset of g, or s and g are disjoint.
bool compatible(const IndexSet& s, const IndexSet& g);

// Construction order: max(a) < max(b), or equal max and a is a subset of b.
bool precedes(const IndexSet& a, const IndexSet& b);

// Number of maximal contiguous blocks.
int fan_out(const IndexSet& s);

}  // namespace dsetp
