#include "dsetp/tree.hpp"

#include <algorithm>
#include <stdexcept>

namespace dsetp {

void DiscTree::sort_constituents() {
  std::stable_sort(constituents.begin(), constituents.end(),
                   [](const Constituent& a, const Constituent& b) { return a.yield < b.yield; });
}

std::vector<Violation> validate_tree(const DiscTree& tree, ValidateOptions options) {
  std::vector<Violation> out;
  const Position n = tree.size();
  if (n == 0) out.push_back({ViolationKind::kEmptySentence, "empty sentence", {}});
  if (tree.pos_tags.size() != tree.tokens.size())
    out.push_back({ViolationKind::kLengthMismatch,
                   "token/POS length mismatch: " + std::to_string(tree.tokens.size()) + " vs " +
                       std::to_string(tree.pos_tags.size()),
                   {}});

  std::vector<const Constituent*> usable;
  for (const auto& c : tree.constituents) {
    if (c.yield.empty()) {
      out.push_back({ViolationKind::kEmptyYield, "empty yield for " + c.label, {c}});
    } else if (c.yield.max() >= n) {
      out.push_back({ViolationKind::kOutOfRange,
                     "yield " + c.yield.to_string() + " out of range for n=" + std::to_string(n),
                     {c}});
    } else {
      usable.push_back(&c);
    }
  }

  for (std::size_t a = 0; a < usable.size(); ++a) {
    for (std::size_t b = a + 1; b < usable.size(); ++b) {
      const auto& x = *usable[a];
      const auto& y = *usable[b];
      if (x.yield == y.yield) {
        if (!options.allow_unary_chains)
          out.push_back({ViolationKind::kDuplicateYield,
                         "duplicate yield " + x.yield.to_string(), {x, y}});
      } else if (!compatible(x.yield, y.yield) && !compatible(y.yield, x.yield)) {
        out.push_back({ViolationKind::kCrossing,
                       "crossing membership between " + x.label + x.yield.to_string() + " and " +
                           y.label + y.yield.to_string(),
                       {x, y}});
      }
    }
  }

  if (n > 0) {
    const IndexSet full = IndexSet::range(0, n - 1);
    bool has_root = std::any_of(usable.begin(), usable.end(),
                                [&](const Constituent* c) { return c->yield == full; });
    if (!has_root) out.push_back({ViolationKind::kMissingRoot, "missing root", {}});
  }
  return out;
}

std::vector<std::string> split_label(std::string_view label, std::string_view sep) {
  std::vector<std::string> parts;
  if (sep.empty()) return {std::string(label)};
  std::size_t start = 0;
  for (;;) {
    auto hit = label.find(sep, start);
    if (hit == std::string_view::npos) {
      parts.emplace_back(label.substr(start));
      return parts;
    }
    parts.emplace_back(label.substr(start, hit - start));
    start = hit + sep.size();
  }
}

DiscTree collapse_unaries(const DiscTree& tree, std::string_view sep) {
  if (sep.empty()) throw std::invalid_argument("unary separator must not be empty");
  DiscTree out = tree;
  out.constituents.clear();
  DiscTree sorted = tree;
  sorted.sort_constituents();
  for (const auto& c : sorted.constituents) {
    if (c.label.find(sep) != std::string::npos)
      throw std::invalid_argument("label '" + c.label + "' contains the unary separator '" +
                                  std::string(sep) + "'; choose another separator");
    if (!out.constituents.empty() && out.constituents.back().yield == c.yield) {
      out.constituents.back().label += sep;
      out.constituents.back().label += c.label;
    } else {
      out.constituents.push_back(c);
    }
  }
  return out;
}

DiscTree expand_unaries(const DiscTree& tree, std::string_view sep) {
  DiscTree out = tree;
  out.constituents.clear();
  for (const auto& c : tree.constituents)
    for (auto& part : split_label(c.label, sep)) out.constituents.push_back({part, c.yield});
  out.sort_constituents();
  return out;
}

}  // namespace dsetp
