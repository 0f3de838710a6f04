#include "dsetp/eval.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace dsetp {

double harmonic_f1(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double BracketCounts::precision() const {
  if (predicted == 0) return gold == 0 ? 1.0 : 0.0;
  return static_cast<double>(matched) / static_cast<double>(predicted);
}

double BracketCounts::recall() const {
  if (gold == 0) return predicted == 0 ? 1.0 : 0.0;
  return static_cast<double>(matched) / static_cast<double>(gold);
}

double BracketCounts::f1() const { return harmonic_f1(precision(), recall()); }

BracketCounts& BracketCounts::operator+=(const BracketCounts& o) {
  matched += o.matched;
  predicted += o.predicted;
  gold += o.gold;
  return *this;
}

double EvalReport::pos_accuracy() const {
  if (pos_total == 0) return 1.0;
  return static_cast<double>(pos_correct) / static_cast<double>(pos_total);
}

EvalReport& EvalReport::operator+=(const EvalReport& o) {
  all += o.all;
  disc += o.disc;
  pos_correct += o.pos_correct;
  pos_total += o.pos_total;
  return *this;
}

namespace {

// Multiset of (label, yield) after filtering; yields are renumbered over the
// kept positions so punctuation never creates or hides a gap.
std::map<Constituent, std::size_t> filtered_brackets(const DiscTree& tree,
                                                     const std::vector<Position>& remap,
                                                     const EvalFilter& filter) {
  std::map<Constituent, std::size_t> out;
  for (const auto& c : expand_unaries(tree, filter.unary_sep).constituents) {
    if (filter.root_labels.count(c.label)) continue;
    std::vector<Position> kept;
    for (Position p : c.yield)
      if (remap[p] >= 0) kept.push_back(remap[p]);
    if (kept.empty()) continue;
    ++out[Constituent{c.label, IndexSet(std::move(kept))}];
  }
  return out;
}

BracketCounts count(const std::map<Constituent, std::size_t>& pred,
                    const std::map<Constituent, std::size_t>& gold, bool disc_only) {
  auto keep = [&](const Constituent& c) { return !disc_only || fan_out(c.yield) > 1; };
  BracketCounts bc;
  for (const auto& [c, k] : pred)
    if (keep(c)) bc.predicted += k;
  for (const auto& [c, k] : gold) {
    if (!keep(c)) continue;
    bc.gold += k;
    if (auto it = pred.find(c); it != pred.end()) bc.matched += std::min(k, it->second);
  }
  return bc;
}

}  // namespace

EvalReport labelled_fscore(const DiscTree& pred, const DiscTree& gold, const EvalFilter& filter) {
  if (pred.size() != gold.size())
    throw std::invalid_argument("evaluation: sentence length mismatch (" +
                                std::to_string(pred.size()) + " vs " +
                                std::to_string(gold.size()) + ")");
  std::vector<Position> remap(gold.size(), -1);
  Position next = 0;
  for (Position p = 0; p < gold.size(); ++p) {
    const bool punct = p < static_cast<Position>(gold.pos_tags.size()) &&
                       filter.punct_tags.count(gold.pos_tags[p]);
    if (!punct) remap[p] = next++;
  }

  auto pb = filtered_brackets(pred, remap, filter);
  auto gb = filtered_brackets(gold, remap, filter);
  EvalReport report;
  report.all = count(pb, gb, false);
  report.disc = count(pb, gb, true);
  for (Position p = 0; p < gold.size(); ++p) {
    if (remap[p] < 0) continue;
    ++report.pos_total;
    if (p < static_cast<Position>(pred.pos_tags.size()) &&
        p < static_cast<Position>(gold.pos_tags.size()) && pred.pos_tags[p] == gold.pos_tags[p])
      ++report.pos_correct;
  }
  return report;
}

EvalReport labelled_fscore(std::span<const DiscTree> pred, std::span<const DiscTree> gold,
                           const EvalFilter& filter) {
  if (pred.size() != gold.size())
    throw std::invalid_argument("evaluation: " + std::to_string(pred.size()) +
                                " predicted trees vs " + std::to_string(gold.size()) + " gold");
  EvalReport total;
  for (std::size_t k = 0; k < pred.size(); ++k) total += labelled_fscore(pred[k], gold[k], filter);
  return total;
}

}  // namespace dsetp
