#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>

#include "dsetp/tree.hpp"

namespace dsetp {

// Knobs approximating the usual "ignore punctuation and root" evaluation.
struct EvalFilter {
  // Labels ignored everywhere.
  std::set<std::string> root_labels;
  // Token positions whose gold POS tag is listed here are deleted from all
  // yields before comparison; constituents emptied this way are dropped.
  std::set<std::string> punct_tags;
  // Collapsed unary labels are expanded with this separator first.
  std::string unary_sep = std::string(kDefaultUnarySeparator);
};

struct BracketCounts {
  std::size_t matched = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;

  // Empty predicted (resp. gold) side counts as 1.0 when the other side is
  // empty too, 0.0 otherwise.
  double precision() const;
  double recall() const;
  double f1() const;

  BracketCounts& operator+=(const BracketCounts& o);
};

struct EvalReport {
  BracketCounts all;
  BracketCounts disc;
  std::size_t pos_correct = 0;
  std::size_t pos_total = 0;

  double precision() const { return all.precision(); }
  double recall() const { return all.recall(); }
  double f1() const { return all.f1(); }
  double disc_precision() const { return disc.precision(); }
  double disc_recall() const { return disc.recall(); }
  double disc_f1() const { return disc.f1(); }
  double pos_accuracy() const;

  EvalReport& operator+=(const EvalReport& o);
};

// 2pr/(p+r), 0 when p+r = 0.
double harmonic_f1(double precision, double recall);

// Throws std::invalid_argument when the token counts differ.
EvalReport labelled_fscore(const DiscTree& pred, const DiscTree& gold, const EvalFilter& filter = {});

// Micro-averaged over aligned corpora.
EvalReport labelled_fscore(std::span<const DiscTree> pred, std::span<const DiscTree> gold,
                           const EvalFilter& filter = {});

}  // namespace dsetp
