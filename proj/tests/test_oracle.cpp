#include <algorithm>
#include <random>

#include "doctest.h"
#include "dsetp/generator.hpp"
#include "dsetp/oracle.hpp"
#include "dsetp/verification.hpp"
#include "fixtures.hpp"

using namespace dsetp;

namespace {

Configuration run(Position n, const char* actions) { return replay(n, parse_derivation(actions)); }

DiscTree tree_of(Position n, std::vector<Constituent> cs) {
  DiscTree t;
  for (Position p = 0; p < n; ++p) {
    t.tokens.push_back("w");
    t.pos_tags.push_back("T");
  }
  t.constituents = std::move(cs);
  t.sort_constituents();
  return t;
}

}  // namespace

TEST_CASE("constituent reachability conditions") {
  // S = {0}, {1,2}; focus {3}; i = 4
  auto c = run(6, "SHIFT NOLABEL SHIFT NOLABEL SHIFT NOLABEL COMB-1 NOLABEL SHIFT NOLABEL");
  REQUIRE(c.focus() == IndexSet{3});
  REQUIRE(c.memory().size() == 2);
  CHECK(constituent_reachable(c, {1, 2, 3, 5}));
  CHECK(brute_force_reachable(c, {1, 2, 3, 5}));
  CHECK_FALSE(constituent_reachable(c, {2, 3}));
  CHECK_FALSE(brute_force_reachable(c, {2, 3}));

  auto np = testing::parent_prefix(12);
  REQUIRE(np.focus() == IndexSet{3, 4});
  CHECK(constituent_reachable(np, {1, 6}));
  CHECK(brute_force_reachable(np, {1, 6}, 8));

  // a focus whose labelling step has passed cannot be labelled any more
  CHECK_FALSE(constituent_reachable(np, {3, 4}));
  CHECK_FALSE(brute_force_reachable(np, {3, 4}, 8));
  CHECK(constituent_reachable(testing::parent_prefix(11), {3, 4}));
}

TEST_CASE("reach and next along the wh-question derivation") {
  const auto gold = testing::parent_tree();
  CHECK(reach(initial(8), gold).size() == gold.constituents.size());

  auto c = testing::parent_prefix(12);
  auto r = reach(c, gold);
  std::sort(r.begin(), r.end());
  std::vector<Constituent> expected = {{"VP", {1, 6}},
                                       {"VP", {1, 5, 6}},
                                       {"SQ", IndexSet::range(1, 6)},
                                       {"SBARQ", IndexSet::range(0, 7)}};
  std::sort(expected.begin(), expected.end());
  CHECK(r == expected);
  CHECK(next_constituent(c, gold) == Constituent{"VP", {1, 6}});

  CHECK(next_constituent(testing::parent_prefix(20), gold) == Constituent{"VP", {1, 5, 6}});

  auto goal = testing::parent_prefix(30);
  CHECK(reach(goal, gold).empty());
  CHECK_FALSE(next_constituent(goal, gold).has_value());
}

TEST_CASE("dynamic oracle along the wh-question derivation") {
  const auto gold = testing::parent_tree();
  auto whnp = dynamic_oracle(testing::parent_prefix(3), gold);
  CHECK(whnp.actions == std::vector<Action>{Action::labelled("WHNP")});

  auto comb = dynamic_oracle(testing::parent_prefix(18), gold);
  CHECK(comb.actions == std::vector<Action>{Action::combine(1)});
  CHECK(comb.canonical == Action::combine(1));

  // the canonical derivation combines with {'s} here, outside this answer set
  auto after_np = dynamic_oracle(testing::parent_prefix(12), gold);
  CHECK(after_np.actions == std::vector<Action>{Action::shift()});
  auto keep = exhaustive_best_f(testing::parent_prefix(12), gold, 8);
  CHECK(keep == 1.0);
  CHECK(exhaustive_best_f(apply(testing::parent_prefix(12), Action::combine(2)), gold, 8) == 1.0);

  CHECK(dynamic_oracle(initial(8), gold).actions == std::vector<Action>{Action::shift()});
  CHECK_THROWS_AS(dynamic_oracle(testing::parent_prefix(30), gold), TransitionError);
}

TEST_CASE("dynamic oracle falls back to every structural action once nothing is reachable") {
  // a valid gold root is always reachable, so use a rootless gold set
  auto gold = tree_of(3, {{"A", {1}}});
  auto c = run(3, "SHIFT NOLABEL SHIFT NOLABEL");
  REQUIRE(reach(c, gold).empty());
  auto answer = dynamic_oracle(c, gold);
  CHECK(answer.actions == legal_structural_actions(c));
  CHECK(answer.actions.size() == 2);
  CHECK(answer.canonical == Action::combine(0));
}

TEST_CASE("tie break") {
  // S = {0}, {1}, {2,3}; focus {4}
  auto c = run(6, "SHIFT NOLABEL SHIFT NOLABEL SHIFT NOLABEL SHIFT NOLABEL COMB-2 NOLABEL SHIFT NOLABEL");
  REQUIRE(c.memory().size() == 3);
  std::vector<Action> a = {Action::shift(), Action::combine(0)};
  CHECK(tie_break(a, c) == Action::combine(0));
  std::vector<Action> b = {Action::combine(0), Action::combine(2)};
  CHECK(tie_break(b, c) == Action::combine(2));
  std::vector<Action> s = {Action::shift()};
  CHECK(tie_break(s, c) == Action::shift());
  std::vector<Action> l = {Action::labelled("X")};
  CHECK(tie_break(l, c) == Action::labelled("X"));
  CHECK_THROWS_AS(tie_break({}, c), std::invalid_argument);
}

TEST_CASE("static oracle") {
  CHECK(format_derivation(static_oracle(testing::parent_tree())) == testing::parent_derivation());

  auto single = tree_of(1, {{"X", {0}}});
  CHECK(format_derivation(static_oracle(single)) == "SHIFT LABEL-X");

  auto ternary = tree_of(3, {{"X", {0, 1, 2}}});
  CHECK(format_derivation(static_oracle(ternary)) ==
        "SHIFT NOLABEL SHIFT NOLABEL COMB-0 NOLABEL SHIFT NOLABEL COMB-0 LABEL-X");

  auto invalid = tree_of(3, {{"X", {0, 1}}});
  CHECK_THROWS_AS(static_oracle(invalid), std::invalid_argument);
}

TEST_CASE("static oracle agrees with the odd-step dynamic answer on the gold path") {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 200; ++k) {
    auto t = random_tree(rng, {.max_n = 10, .gap_rate = 0.5});
    auto actions = static_oracle(t);
    auto c = initial(t.size());
    for (const auto& a : actions) {
      if (!c.structural_step()) CHECK(dynamic_oracle(c, t).actions == std::vector<Action>{a});
      c = apply(c, a);
    }
  }
}

TEST_CASE("exhaustive best F") {
  auto gold = tree_of(3, {{"S", IndexSet::range(0, 2)}, {"A", {0, 1}}});
  CHECK(exhaustive_best_f(initial(3), gold) == 1.0);

  auto lost = run(3, "SHIFT NOLABEL SHIFT NOLABEL SHIFT NOLABEL COMB-1 NOLABEL");
  CHECK(exhaustive_best_f(lost, gold) == doctest::Approx(2.0 / 3.0));

  auto wrong = run(3, "SHIFT LABEL-B");
  CHECK(exhaustive_best_f(wrong, gold) == doctest::Approx(0.8));

  auto full = run(3, "SHIFT NOLABEL SHIFT NOLABEL COMB-0 LABEL-A SHIFT NOLABEL COMB-0 LABEL-S");
  REQUIRE(is_goal(full));
  CHECK(exhaustive_best_f(full, gold) == 1.0);

  auto big = tree_of(8, {{"S", IndexSet::range(0, 7)}});
  CHECK_THROWS_AS(exhaustive_best_f(initial(8), big), std::invalid_argument);
  CHECK_NOTHROW(exhaustive_best_f(initial(8), big, 8));
}

TEST_CASE("oracle checks pass on random trees") {
  std::mt19937_64 rng(29);
  std::mt19937_64 walk_rng(31);
  for (int k = 0; k < 60; ++k) {
    auto t = random_tree(rng, {.max_n = 6, .gap_rate = 0.5, .unary_rate = 0.2});
    auto check = check_tree(t, {}, walk_rng);
    const std::string first = check.failures.empty() ? std::string() : check.failures.front();
    INFO(first);
    CHECK(check.ok());
  }
}

TEST_CASE("a corrupted oracle is caught") {
  OracleSuite broken;
  broken.dynamic_oracle = [](const Configuration& c, const DiscTree& gold) {
    auto answer = dynamic_oracle(c, gold);
    if (!c.structural_step() && answer.actions.front().kind == ActionKind::kLabel) {
      answer.actions = {Action::no_label()};
      answer.canonical = Action::no_label();
    }
    if (c.label_forced()) answer = dynamic_oracle(c, gold);
    return answer;
  };
  std::mt19937_64 rng(37);
  auto check = check_tree(testing::parent_tree(), {}, rng, broken);
  CHECK_FALSE(check.ok());
}
