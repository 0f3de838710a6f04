#pragma once

#include <string>
#include <vector>

#include "dsetp/transition.hpp"
#include "dsetp/tree.hpp"

namespace dsetp::testing {

// "So what 's a parent to do ?" with the wh-extraction VP pair.
inline DiscTree parent_tree() {
  DiscTree t;
  t.tokens = {"So", "what", "'s", "a", "parent", "to", "do", "?"};
  t.pos_tags = {"RB", "WP", "VBZ", "DT", "NN", "TO", "VB", "."};
  t.constituents = {{"SBARQ", IndexSet::range(0, 7)}, {"SQ", IndexSet::range(1, 6)},
                    {"WHNP", {1}},                    {"NP", {3, 4}},
                    {"VP", {1, 5, 6}},                {"VP", {1, 6}}};
  t.sort_constituents();
  return t;
}

inline const char* parent_line() {
  return "(SBARQ (SQ (VP (VP (WHNP (WP 1=what)) (VB 6=do)) (TO 5=to)) (VBZ 2='s) "
         "(NP (DT 3=a) (NN 4=parent))) (RB 0=So) (. 7=?))";
}

inline const char* parent_derivation() {
  return "SHIFT NOLABEL SHIFT LABEL-WHNP SHIFT NOLABEL SHIFT NOLABEL SHIFT NOLABEL "
         "COMB-3 LABEL-NP COMB-2 NOLABEL SHIFT NOLABEL SHIFT NOLABEL COMB-1 LABEL-VP "
         "COMB-5 LABEL-VP COMB-2 LABEL-SQ COMB-0 NOLABEL SHIFT NOLABEL COMB-0 LABEL-SBARQ";
}

// Configuration reached after the first `steps` canonical actions.
inline Configuration parent_prefix(std::size_t steps) {
  auto actions = parse_derivation(parent_derivation());
  actions.resize(steps);
  return replay(8, actions);
}

}  // namespace dsetp::testing
