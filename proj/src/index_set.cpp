#include "dsetp/index_set.hpp"

#include <algorithm>
#include <iterator>
#include <stdexcept>

namespace dsetp {

IndexSet::IndexSet(std::initializer_list<Position> positions)
    : IndexSet(std::vector<Position>(positions)) {}

IndexSet::IndexSet(std::vector<Position> positions) : positions_(std::move(positions)) {
  std::sort(positions_.begin(), positions_.end());
  if (std::adjacent_find(positions_.begin(), positions_.end()) != positions_.end())
    throw std::invalid_argument("IndexSet: duplicate position");
  if (!positions_.empty() && positions_.front() < 0)
    throw std::invalid_argument("IndexSet: negative position");
}

IndexSet IndexSet::singleton(Position p) { return IndexSet({p}); }

IndexSet IndexSet::range(Position first, Position last) {
  std::vector<Position> v;
  for (Position p = first; p <= last; ++p) v.push_back(p);
  return IndexSet(std::move(v));
}

Position IndexSet::min() const {
  if (positions_.empty()) throw std::domain_error("IndexSet: min of empty set");
  return positions_.front();
}

Position IndexSet::max() const {
  if (positions_.empty()) throw std::domain_error("IndexSet: max of empty set");
  return positions_.back();
}

bool IndexSet::contains(Position p) const {
  return std::binary_search(positions_.begin(), positions_.end(), p);
}

bool IndexSet::is_subset_of(const IndexSet& other) const {
  return std::includes(other.positions_.begin(), other.positions_.end(), positions_.begin(),
                       positions_.end());
}

bool IndexSet::is_disjoint_from(const IndexSet& other) const {
  auto a = positions_.begin();
  auto b = other.positions_.begin();
  while (a != positions_.end() && b != other.positions_.end()) {
    if (*a == *b) return false;
    if (*a < *b)
      ++a;
    else
      ++b;
  }
  return true;
}

IndexSet IndexSet::union_with(const IndexSet& other) const {
  IndexSet out;
  out.positions_.reserve(size() + other.size());
  std::set_union(positions_.begin(), positions_.end(), other.positions_.begin(),
                 other.positions_.end(), std::back_inserter(out.positions_));
  return out;
}

std::string IndexSet::to_string() const {
  std::string out = "{";
  for (std::size_t k = 0; k < positions_.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(positions_[k]);
  }
  return out + "}";
}

Position left_index(const IndexSet& s) { return s.min(); }
Position right_index(const IndexSet& s) { return s.max(); }

IndexSet gap_set(const IndexSet& s) {
  std::vector<Position> gap;
  auto it = s.begin();
  for (Position p = s.min(); p < s.max(); ++p) {
    if (it != s.end() && *it == p)
      ++it;
    else
      gap.push_back(p);
  }
  return IndexSet(std::move(gap));
}

Boundaries boundary_tuple(const IndexSet& s) {
  Boundaries b{s.min(), s.max(), std::nullopt, std::nullopt};
  // first and last missing position inside [min, max]
  auto pos = s.positions();
  for (std::size_t k = 1; k < pos.size(); ++k) {
    if (pos[k] != pos[k - 1] + 1) {
      b.gap_left = pos[k - 1] + 1;
      break;
    }
  }
  for (std::size_t k = pos.size(); k-- > 1;) {
    if (pos[k] != pos[k - 1] + 1) {
      b.gap_right = pos[k] - 1;
      break;
    }
  }
  return b;
}

bool compatible(const IndexSet& s, const IndexSet& g) {
  return s.is_subset_of(g) || s.is_disjoint_from(g);
}

bool precedes(const IndexSet& a, const IndexSet& b) {
  if (a.max() != b.max()) return a.max() < b.max();
  return a.is_subset_of(b);
}

int fan_out(const IndexSet& s) {
  if (s.empty()) return 0;
  int blocks = 1;
  auto pos = s.positions();
  for (std::size_t k = 1; k < pos.size(); ++k)
    if (pos[k] != pos[k - 1] + 1) ++blocks;
  return blocks;
}

}  // namespace dsetp
