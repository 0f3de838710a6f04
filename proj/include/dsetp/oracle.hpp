#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dsetp/transition.hpp"
#include "dsetp/tree.hpp"

namespace dsetp {

struct OracleAnswer {
  // Every optimal action.
  std::vector<Action> actions;
  // The one picked by tie_break.
  Action canonical;
};

// Whether some completion of c can still label g. Requires
// max(s_f) <= max(g) and every item of S and the focus to be a subset of g or
// disjoint from it. At a structural step the focus has already had its
// labelling decision, so g equal to the focus is no longer buildable.
bool constituent_reachable(const Configuration& c, const IndexSet& g);

// Gold constituents not in C that are still reachable.
std::vector<Constituent> reach(const Configuration& c, const DiscTree& gold);

// Smallest reachable gold constituent under the construction order.
std::optional<Constituent> next_constituent(const Configuration& c, const DiscTree& gold);

// Set of F-optimal next actions. Throws TransitionError on a goal configuration.
OracleAnswer dynamic_oracle(const Configuration& c, const DiscTree& gold);

// Labelling answers pass through; among structural ones any COMBINE beats
// SHIFT and the COMBINE with the greatest right-index wins.
// Throws std::invalid_argument on an empty set.
Action tie_break(std::span<const Action> actions, const Configuration& c);

// Canonical derivation: combine as soon as the result keeps the whole gold
// tree reachable, preferring the most recent memory item. Throws
// std::invalid_argument on an invalid tree.
std::vector<Action> static_oracle(const DiscTree& gold);

// ---- reference oracles (exhaustive search, small sentences only) ----

inline constexpr Position kDefaultExhaustiveMax = 7;

// Best labelled F1 over all legal completions of c. Throws
// std::invalid_argument when n exceeds max_n.
double exhaustive_best_f(const Configuration& c, const DiscTree& gold,
                         Position max_n = kDefaultExhaustiveMax);

// Whether some completion of c puts g in focus at a labelling step.
bool brute_force_reachable(const Configuration& c, const IndexSet& g,
                           Position max_n = kDefaultExhaustiveMax);

}  // namespace dsetp
