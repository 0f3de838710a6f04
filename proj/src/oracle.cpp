#include "dsetp/oracle.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "dsetp/eval.hpp"

namespace dsetp {

namespace {

const Constituent* gold_at(const DiscTree& gold, const IndexSet& yield) {
  for (const auto& g : gold.constituents)
    if (g.yield == yield) return &g;
  return nullptr;
}

bool in_constituents(const std::vector<Constituent>& set, const Constituent& c) {
  return std::find(set.begin(), set.end(), c) != set.end();
}

}  // namespace

bool constituent_reachable(const Configuration& c, const IndexSet& g) {
  if (const auto& f = c.focus()) {
    if (f->max() > g.max()) return false;
    if (!compatible(*f, g)) return false;
    if (c.structural_step() && *f == g) return false;
  }
  for (const auto& [key, s] : c.memory())
    if (!compatible(s, g)) return false;
  return true;
}

std::vector<Constituent> reach(const Configuration& c, const DiscTree& gold) {
  std::vector<Constituent> out;
  for (const auto& g : gold.constituents)
    if (!in_constituents(c.constituents(), g) && constituent_reachable(c, g.yield)) out.push_back(g);
  return out;
}

std::optional<Constituent> next_constituent(const Configuration& c, const DiscTree& gold) {
  std::optional<Constituent> best;
  for (auto& g : reach(c, gold))
    if (!best || precedes(g.yield, best->yield)) best = std::move(g);
  return best;
}

Action tie_break(std::span<const Action> actions, const Configuration& c) {
  if (actions.empty()) throw std::invalid_argument("tie_break: empty action set");
  if (!actions.front().structural()) return actions.front();
  const Action* best = nullptr;
  Position best_right = -1;
  for (const auto& a : actions) {
    if (a.kind != ActionKind::kCombine) continue;
    const Position right = c.memory().at(a.key).max();
    if (right > best_right) {
      best_right = right;
      best = &a;
    }
  }
  return best ? *best : Action::shift();
}

OracleAnswer dynamic_oracle(const Configuration& c, const DiscTree& gold) {
  if (is_goal(c)) throw TransitionError("dynamic_oracle: goal configuration");
  OracleAnswer answer;
  if (!c.structural_step()) {
    if (const auto* g = gold_at(gold, *c.focus())) {
      answer.actions = {Action::labelled(g->label)};
    } else if (!c.label_forced()) {
      answer.actions = {Action::no_label()};
    } else {
      throw std::invalid_argument("dynamic_oracle: gold tree has no constituent spanning the sentence");
    }
  } else if (!c.focus()) {
    answer.actions = {Action::shift()};
  } else if (auto next = next_constituent(c, gold)) {
    const IndexSet& target = next->yield;
    for (const auto& [key, s] : c.memory())
      if (c.focus()->union_with(s).is_subset_of(target)) answer.actions.push_back(Action::combine(key));
    if (target.max() > c.focus()->max()) answer.actions.push_back(Action::shift());
  } else {
    answer.actions = legal_structural_actions(c);
  }
  answer.canonical = tie_break(answer.actions, c);
  return answer;
}

std::vector<Action> static_oracle(const DiscTree& gold) {
  if (auto v = validate_tree(gold); !v.empty())
    throw std::invalid_argument("static_oracle: invalid tree: " + v.front().message);

  std::vector<Action> actions;
  Configuration c = Configuration::initial(gold.size());
  auto keeps_tree = [&](const Configuration& cand) {
    for (const auto& g : gold.constituents)
      if (!in_constituents(cand.constituents(), g) && !constituent_reachable(cand, g.yield))
        return false;
    return true;
  };

  while (!is_goal(c)) {
    Action a;
    if (!c.structural_step()) {
      const auto* g = gold_at(gold, *c.focus());
      a = g ? Action::labelled(g->label) : Action::no_label();
    } else {
      // most recent item first: insertion order matches right-index order
      std::vector<std::pair<Position, Position>> by_right;
      if (c.focus())
        for (const auto& [key, s] : c.memory()) by_right.push_back({s.max(), key});
      std::sort(by_right.rbegin(), by_right.rend());
      a = Action::shift();
      bool found = false;
      for (const auto& [right, key] : by_right) {
        if (keeps_tree(apply(c, Action::combine(key)))) {
          a = Action::combine(key);
          found = true;
          break;
        }
      }
      if (!found && c.buffer_index() >= c.sentence_length())
        throw std::logic_error("static_oracle: no tree-consistent action at step " +
                               std::to_string(c.step()));
    }
    c = apply(c, a);
    actions.push_back(std::move(a));
  }
  return actions;
}

// ------------------------------------------------------- exhaustive search

namespace {

using Mask = std::uint64_t;

Mask to_mask(const IndexSet& s) {
  Mask m = 0;
  for (Position p : s) m |= Mask{1} << p;
  return m;
}

// Partition state; labelling choices never change it.
struct MaskState {
  Mask focus = 0;
  std::vector<Mask> memory;  // sorted
  Position next = 0;
  bool odd = false;

  std::vector<Mask> key() const {
    std::vector<Mask> k{focus, static_cast<Mask>(next) << 1 | (odd ? 1u : 0u)};
    k.insert(k.end(), memory.begin(), memory.end());
    return k;
  }
};

MaskState to_state(const Configuration& c) {
  MaskState st;
  if (c.focus()) st.focus = to_mask(*c.focus());
  for (const auto& [key, s] : c.memory()) st.memory.push_back(to_mask(s));
  std::sort(st.memory.begin(), st.memory.end());
  st.next = c.buffer_index();
  st.odd = !c.structural_step();
  return st;
}

// Successors of an even-step state.
std::vector<MaskState> structural_successors(const MaskState& st, Position n) {
  std::vector<MaskState> out;
  if (st.next < n) {
    MaskState s = st;
    if (s.focus) {
      s.memory.push_back(s.focus);
      std::sort(s.memory.begin(), s.memory.end());
    }
    s.focus = Mask{1} << s.next;
    ++s.next;
    s.odd = true;
    out.push_back(std::move(s));
  }
  if (st.focus) {
    for (std::size_t k = 0; k < st.memory.size(); ++k) {
      MaskState s = st;
      s.focus |= s.memory[k];
      s.memory.erase(s.memory.begin() + static_cast<std::ptrdiff_t>(k));
      s.odd = true;
      out.push_back(std::move(s));
    }
  }
  return out;
}

MaskState after_label(MaskState st) {
  st.odd = false;
  return st;
}

void check_bound(const Configuration& c, Position max_n) {
  if (c.sentence_length() > max_n || c.sentence_length() > 63)
    throw std::invalid_argument("exhaustive search limited to n <= " + std::to_string(max_n) +
                                ", got n=" + std::to_string(c.sentence_length()));
}

class BestMatches {
 public:
  BestMatches(const std::set<Mask>& gold, Position n) : gold_(gold), n_(n) {}

  // Most gold constituents still obtainable by labelling.
  int solve(const MaskState& st) {
    auto k = st.key();
    if (auto it = memo_.find(k); it != memo_.end()) return it->second;
    int best = 0;
    if (st.odd) {
      best = (gold_.count(st.focus) ? 1 : 0) + solve(after_label(st));
    } else {
      for (const auto& s : structural_successors(st, n_)) best = std::max(best, solve(s));
    }
    memo_.emplace(std::move(k), best);
    return best;
  }

 private:
  const std::set<Mask>& gold_;
  Position n_;
  std::map<std::vector<Mask>, int> memo_;
};

class FocusSearch {
 public:
  FocusSearch(Mask target, Position n) : target_(target), n_(n) {}

  bool solve(const MaskState& st) {
    auto k = st.key();
    if (auto it = memo_.find(k); it != memo_.end()) return it->second;
    bool found = false;
    if (st.odd) {
      found = st.focus == target_ || solve(after_label(st));
    } else {
      for (const auto& s : structural_successors(st, n_)) {
        if (found) break;
        found = solve(s);
      }
    }
    memo_.emplace(std::move(k), found);
    return found;
  }

 private:
  Mask target_;
  Position n_;
  std::map<std::vector<Mask>, bool> memo_;
};

}  // namespace

double exhaustive_best_f(const Configuration& c, const DiscTree& gold, Position max_n) {
  check_bound(c, max_n);
  const Position n = c.sentence_length();
  std::set<Mask> gold_yields;
  for (const auto& g : gold.constituents) gold_yields.insert(to_mask(g.yield));

  BracketCounts counts;
  counts.gold = gold.constituents.size();
  counts.predicted = c.constituents().size();
  for (const auto& built : c.constituents())
    if (in_constituents(gold.constituents, built)) ++counts.matched;

  if (!is_goal(c)) {
    const int extra = BestMatches(gold_yields, n).solve(to_state(c));
    counts.matched += extra;
    counts.predicted += extra;
    // the final labelling step cannot be skipped
    const Mask full = n >= 64 ? ~Mask{0} : (Mask{1} << n) - 1;
    if (!gold_yields.count(full)) ++counts.predicted;
  }
  return counts.f1();
}

bool brute_force_reachable(const Configuration& c, const IndexSet& g, Position max_n) {
  check_bound(c, max_n);
  return FocusSearch(to_mask(g), c.sentence_length()).solve(to_state(c));
}

}  // namespace dsetp
