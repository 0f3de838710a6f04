#pragma once

#include <cstddef>
#include <map>
#include <ostream>
#include <span>

#include "dsetp/tree.hpp"

namespace dsetp {

// Statistics over the canonical derivations of a treebank.
struct DerivationStats {
  // |S| -> number of configurations, counted before every action.
  std::map<std::size_t, std::size_t> memory_sizes;
  std::map<std::size_t, std::size_t> derivation_lengths;
  // fan-out -> number of constituents
  std::map<int, std::size_t> gap_degrees;
  std::size_t trees = 0;

  std::size_t configurations() const;
  std::size_t max_memory() const;
};

DerivationStats derivation_stats(std::span<const DiscTree> trees);

// Tab-separated report: memory histogram with cumulative percentages, then
// derivation lengths and gap degrees.
void print_stats(std::ostream& out, const DerivationStats& stats);

}  // namespace dsetp
