#include "dsetp/verification.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dsetp/eval.hpp"

namespace dsetp {

namespace {

constexpr double kFTolerance = 1e-12;
constexpr std::string_view kWrongLabel = "__WRONG__";

std::vector<std::string> labels_with_wrong(const DiscTree& gold) {
  std::set<std::string> labels;
  for (const auto& c : gold.constituents) labels.insert(c.label);
  std::vector<std::string> out(labels.begin(), labels.end());
  out.emplace_back(kWrongLabel);
  return out;
}

std::string where(const Configuration& c) {
  std::string s = "step " + std::to_string(c.step()) + " S={";
  bool first = true;
  for (const auto& [key, set] : c.memory()) {
    if (!first) s += ',';
    first = false;
    s += set.to_string();
  }
  s += "} focus=" + (c.focus() ? c.focus()->to_string() : std::string("null"));
  return s;
}

double tree_f(const std::vector<Constituent>& built, const DiscTree& gold) {
  DiscTree pred = gold;
  pred.constituents = built;
  EvalFilter raw;
  raw.unary_sep.clear();
  return labelled_fscore(pred, gold, raw).f1();
}

}  // namespace

std::vector<Configuration> perturbed_configurations(const DiscTree& gold, int walks,
                                                    double error_rate, std::mt19937_64& rng) {
  const auto labels = labels_with_wrong(gold);
  std::vector<Configuration> out;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int w = 0; w < walks; ++w) {
    Configuration c = Configuration::initial(gold.size());
    while (!is_goal(c)) {
      out.push_back(c);
      Action a;
      if (unit(rng) < error_rate) {
        auto legal = legal_actions(c, labels);
        a = legal[std::uniform_int_distribution<std::size_t>(0, legal.size() - 1)(rng)];
      } else {
        a = dynamic_oracle(c, gold).canonical;
      }
      c = apply(c, a);
    }
    out.push_back(c);
  }
  return out;
}

void check_reachability(const Configuration& c, const DiscTree& gold, Position max_n,
                        std::vector<std::string>& failures) {
  for (const auto& g : gold.constituents) {
    const auto& built = c.constituents();
    if (std::find(built.begin(), built.end(), g) != built.end()) continue;
    const bool fast = constituent_reachable(c, g.yield);
    const bool slow = brute_force_reachable(c, g.yield, max_n);
    if (fast != slow)
      failures.push_back("reachability of " + g.yield.to_string() + " at " + where(c) +
                         ": conditions say " + (fast ? "yes" : "no") + ", search says " +
                         (slow ? "yes" : "no"));
  }
}

void check_soundness(const Configuration& c, const DiscTree& gold, const OracleSuite& oracles,
                     Position max_n, std::vector<std::string>& failures) {
  if (is_goal(c)) return;
  const double best = exhaustive_best_f(c, gold, max_n);
  const auto answer = oracles.dynamic_oracle(c, gold);
  for (const auto& a : answer.actions) {
    if (illegal_reason(c, a)) {
      failures.push_back("oracle proposed illegal " + a.to_string() + " at " + where(c));
      continue;
    }
    const double after = exhaustive_best_f(apply(c, a), gold, max_n);
    if (std::abs(after - best) > kFTolerance)
      failures.push_back("oracle action " + a.to_string() + " at " + where(c) + " loses F: " +
                         std::to_string(best) + " -> " + std::to_string(after));
  }
  if (std::find(answer.actions.begin(), answer.actions.end(), answer.canonical) ==
      answer.actions.end())
    failures.push_back("canonical action not in the oracle set at " + where(c));
  if (!c.structural_step()) {
    for (const auto& a : legal_actions(c, labels_with_wrong(gold))) {
      if (std::find(answer.actions.begin(), answer.actions.end(), a) != answer.actions.end())
        continue;
      const double after = exhaustive_best_f(apply(c, a), gold, max_n);
      if (after > best + kFTolerance)
        failures.push_back("excluded " + a.to_string() + " at " + where(c) + " beats the oracle");
    }
  }
}

TreeCheck check_tree(const DiscTree& gold, const OracleCheckOptions& options,
                     std::mt19937_64& rng, const OracleSuite& oracles) {
  TreeCheck result;
  const Position n = gold.size();
  try {
    result.derivation = oracles.static_oracle(gold);
  } catch (const std::exception& e) {
    result.failures.push_back(std::string("static oracle failed: ") + e.what());
    return result;
  }
  if (result.derivation.size() != std::size_t(4 * n - 2))
    result.failures.push_back("derivation length " + std::to_string(result.derivation.size()) +
                              " != 4n-2 = " + std::to_string(4 * n - 2));
  try {
    auto end = replay(n, result.derivation);
    auto built = end.constituents();
    auto expected = gold.constituents;
    std::sort(built.begin(), built.end());
    std::sort(expected.begin(), expected.end());
    if (!is_goal(end)) result.failures.push_back("static derivation does not reach the goal");
    if (built != expected) result.failures.push_back("static derivation does not rebuild the tree");
  } catch (const ReplayError& e) {
    result.failures.push_back(std::string("static derivation illegal: ") + e.what());
  }

  Configuration c = Configuration::initial(n);
  std::vector<Configuration> gold_path;
  try {
    while (!is_goal(c) && gold_path.size() <= std::size_t(4 * n)) {
      gold_path.push_back(c);
      c = apply(c, oracles.dynamic_oracle(c, gold).canonical);
    }
    if (!is_goal(c) || tree_f(c.constituents(), gold) != 1.0)
      result.failures.push_back("dynamic oracle gold path does not reach F = 1");
  } catch (const std::exception& e) {
    result.failures.push_back(std::string("dynamic oracle gold path failed: ") + e.what());
  }

  if (n <= options.exhaustive_max) {
    auto configs = gold_path;
    auto walks = perturbed_configurations(gold, options.perturb, options.error_rate, rng);
    configs.insert(configs.end(), walks.begin(), walks.end());
    for (const auto& conf : configs) {
      check_reachability(conf, gold, options.exhaustive_max, result.failures);
      try {
        check_soundness(conf, gold, oracles, options.exhaustive_max, result.failures);
      } catch (const std::exception& e) {
        result.failures.push_back(std::string("soundness check failed: ") + e.what());
      }
    }
    result.configurations = configs.size();
  }
  return result;
}

}  // namespace dsetp
