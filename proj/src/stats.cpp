#include "dsetp/stats.hpp"

#include <cstdio>

#include "dsetp/oracle.hpp"

namespace dsetp {

std::size_t DerivationStats::configurations() const {
  std::size_t total = 0;
  for (const auto& [size, count] : memory_sizes) total += count;
  return total;
}

std::size_t DerivationStats::max_memory() const {
  return memory_sizes.empty() ? 0 : memory_sizes.rbegin()->first;
}

DerivationStats derivation_stats(std::span<const DiscTree> trees) {
  DerivationStats stats;
  for (const auto& tree : trees) {
    const auto actions = static_oracle(tree);
    Configuration c = Configuration::initial(tree.size());
    for (const auto& a : actions) {
      ++stats.memory_sizes[c.memory().size()];
      c = apply(c, a);
    }
    ++stats.derivation_lengths[actions.size()];
    for (const auto& con : tree.constituents) ++stats.gap_degrees[fan_out(con.yield)];
    ++stats.trees;
  }
  return stats;
}

void print_stats(std::ostream& out, const DerivationStats& stats) {
  const double total = static_cast<double>(stats.configurations());
  char buf[64];
  out << "# memory size\tconfigurations\tcumulative %\n";
  std::size_t running = 0;
  for (const auto& [size, count] : stats.memory_sizes) {
    running += count;
    std::snprintf(buf, sizeof buf, "%.2f", total > 0 ? 100.0 * double(running) / total : 100.0);
    out << size << '\t' << count << '\t' << buf << '\n';
  }
  out << "# derivation length\ttrees\n";
  for (const auto& [len, count] : stats.derivation_lengths) out << len << '\t' << count << '\n';
  out << "# fan-out\tconstituents\n";
  for (const auto& [deg, count] : stats.gap_degrees) out << deg << '\t' << count << '\n';
}

}  // namespace dsetp
