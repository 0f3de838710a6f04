// Acceptance checks. One line per criterion: "[id] PASS|FAIL name: detail".
// Exit status is non-zero when a blocking criterion fails; the
// exploration comparison is stochastic and only reported.

#include <algorithm>
#include <chrono>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "dsetp/commands.hpp"
#include "dsetp/eval.hpp"
#include "dsetp/generator.hpp"
#include "dsetp/model_io.hpp"
#include "dsetp/oracle.hpp"
#include "dsetp/trainer.hpp"
#include "dsetp/treebank.hpp"
#include "dsetp/verification.hpp"
#include "fixtures.hpp"
#include "gradient_check.hpp"

using namespace dsetp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  bool blocking;
  std::function<Outcome()> run;
};

std::string fmt(double v, int digits = 2) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

// 1,000 trees, n <= 12, cycling through four gap rates.
const std::vector<DiscTree>& generated_corpus() {
  static const std::vector<DiscTree> trees = [] {
    std::vector<DiscTree> out;
    const double rates[] = {0.0, 0.3, 0.6, 1.0};
    std::mt19937_64 rng(2024);
    for (int k = 0; k < 1000; ++k) {
      GeneratorOptions o;
      o.max_n = 12;
      o.gap_rate = rates[k % 4];
      out.push_back(random_tree(rng, o));
    }
    return out;
  }();
  return trees;
}

std::vector<Constituent> sorted(std::vector<Constituent> cs) {
  std::sort(cs.begin(), cs.end());
  return cs;
}

// Gold-path configurations plus one perturbed walk for 200 trees, n <= 6.
struct SmallConfigs {
  std::vector<std::pair<std::size_t, Configuration>> configs;
  std::vector<DiscTree> trees;
};

const SmallConfigs& small_configs() {
  static const SmallConfigs s = [] {
    SmallConfigs out;
    GeneratorOptions o;
    o.max_n = 6;
    o.gap_rate = 0.5;
    out.trees = random_trees(200, 77, o);
    std::mt19937_64 rng(78);
    for (std::size_t k = 0; k < out.trees.size(); ++k) {
      const auto& gold = out.trees[k];
      auto c = initial(gold.size());
      while (!is_goal(c)) {
        out.configs.emplace_back(k, c);
        c = apply(c, dynamic_oracle(c, gold).canonical);
      }
      for (auto& p : perturbed_configurations(gold, 1, 0.3, rng)) out.configs.emplace_back(k, std::move(p));
    }
    return out;
  }();
  return s;
}

Outcome golden_derivation() {
  const auto gold = testing::parent_tree();
  const auto derivation = static_oracle(gold);
  const auto expected = parse_derivation(testing::parent_derivation());
  const auto end = replay(gold.size(), derivation);
  const bool same = derivation == expected;
  const bool rebuilt = is_goal(end) && sorted(end.constituents()) == sorted(gold.constituents);
  return {same && rebuilt, std::to_string(derivation.size()) + " actions, " + (same ? "exact match" : "MISMATCH") +
                               ", replay " + (rebuilt ? "rebuilds the tree" : "DIFFERS")};
}

Outcome derivation_length() {
  std::size_t bad = 0;
  for (const auto& t : generated_corpus()) {
    const auto d = static_oracle(t);
    const auto n = static_cast<std::size_t>(t.size());
    const auto shifts = std::count_if(d.begin(), d.end(), [](const Action& a) { return a.kind == ActionKind::kShift; });
    const auto combines =
        std::count_if(d.begin(), d.end(), [](const Action& a) { return a.kind == ActionKind::kCombine; });
    if (d.size() != 4 * n - 2 || static_cast<std::size_t>(shifts) != n || static_cast<std::size_t>(combines) != n - 1)
      ++bad;
  }
  return {bad == 0, std::to_string(generated_corpus().size()) + " trees, " + std::to_string(bad) + " violations"};
}

Outcome static_round_trip() {
  std::size_t bad = 0;
  for (const auto& t : generated_corpus()) {
    const auto end = replay(t.size(), static_oracle(t));
    if (!is_goal(end) || sorted(end.constituents()) != sorted(t.constituents)) ++bad;
  }
  return {bad == 0, std::to_string(generated_corpus().size()) + " trees, " + std::to_string(bad) + " mismatches"};
}

Outcome reachability() {
  const auto& s = small_configs();
  std::vector<std::string> failures;
  for (const auto& [k, c] : s.configs) check_reachability(c, s.trees[k], 6, failures);
  std::string detail = std::to_string(s.configs.size()) + " configurations, " + std::to_string(failures.size()) +
                       " disagreements";
  if (!failures.empty()) detail += " (first: " + failures.front() + ")";
  return {failures.empty(), detail};
}

Outcome soundness() {
  const auto& s = small_configs();
  std::vector<std::string> failures;
  const OracleSuite oracles;
  for (const auto& [k, c] : s.configs) check_soundness(c, s.trees[k], oracles, 6, failures);
  std::string detail = std::to_string(s.configs.size()) + " configurations, " + std::to_string(failures.size()) +
                       " unsound answers";
  if (!failures.empty()) detail += " (first: " + failures.front() + ")";
  return {failures.empty(), detail};
}

Outcome gold_path() {
  std::size_t bad = 0;
  for (const auto& gold : generated_corpus()) {
    auto c = initial(gold.size());
    while (!is_goal(c)) c = apply(c, tie_break(dynamic_oracle(c, gold).actions, c));
    DiscTree pred = gold;
    pred.constituents = c.constituents();
    pred.sort_constituents();
    if (labelled_fscore(pred, gold).f1() != 1.0) ++bad;
  }
  return {bad == 0, std::to_string(generated_corpus().size()) + " trees, " + std::to_string(bad) + " below F = 1"};
}

template <class T>
bool same_bits(const nn::Matrix<T>& a, const nn::Matrix<T>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(T) * static_cast<std::size_t>(a.size())) == 0;
}

Outcome set_representations() {
  const auto corpus = build_vocabularies({testing::parent_tree()});
  Model<float> m(ModelConfig::desk(), corpus.inventories);
  const auto enc = encode(m, testing::parent_tree().tokens);
  const nn::Vector<float> nil = m.averaged().value(m.layout().h_nil);
  const auto d = enc.h2[0].size();
  auto expect = [&](std::array<int, 4> idx) {
    nn::Vector<float> v(4 * d);
    for (int k = 0; k < 4; ++k) v.segment(k * d, d) = idx[k] < 0 ? nil : enc.h2[static_cast<std::size_t>(idx[k])];
    return v;
  };
  const bool a = same_bits<float>(set_representation(IndexSet{1, 6}, enc, m), expect({1, 6, 2, 5}));
  const bool b = same_bits<float>(set_representation(IndexSet{1, 5, 6}, enc, m), expect({1, 6, 2, 4}));
  const bool c = same_bits<float>(set_representation(IndexSet{4}, enc, m), expect({4, 4, -1, -1}));
  auto mark = [](bool ok) { return ok ? "ok" : "WRONG"; };
  return {a && b && c, std::string("{1,6} -> (1,6,2,5) ") + mark(a) + ", {1,5,6} -> (1,6,2,4) " + mark(b) +
                           ", {4} -> (4,4,nil,nil) " + mark(c)};
}

Outcome gradient_check() {
  const auto r = testing::check_gradients();
  const bool ok = r.failures.empty() && r.untouched.empty() && r.checked >= 200;
  std::string detail = std::to_string(r.checked) + " entries, worst relative error " + std::to_string(r.worst);
  if (!r.failures.empty()) detail += ", " + std::to_string(r.failures.size()) + " above 1e-4";
  if (!r.untouched.empty()) detail += ", no gradient for " + r.untouched.front();
  return {ok, detail};
}

Outcome overfit() {
  auto corpus = build_vocabularies(toy_trees(20, 7));
  std::size_t disc = 0, cont = 0;
  for (const auto& t : corpus.trees) {
    bool has_gap = false;
    for (const auto& c : t.constituents) has_gap |= c.yield.max() - c.yield.min() + 1 != Position(c.yield.size());
    (has_gap ? disc : cont)++;
  }
  auto cfg = ModelConfig::desk();
  cfg.seed = 1;
  cfg.epochs = 200;
  const auto model = train_static(corpus, cfg);
  std::vector<DiscTree> pred;
  for (const auto& t : corpus.trees) pred.push_back(greedy_parse(t.tokens, model));
  const auto r = labelled_fscore(pred, corpus.trees);
  const bool ok = disc > 0 && cont > 0 && r.f1() >= 0.99 && r.pos_accuracy() >= 0.99;
  return {ok, std::to_string(disc) + " discontinuous + " + std::to_string(cont) +
                  " continuous sentences, 200 epochs, averaged weights: F " + fmt(100 * r.f1()) + " POS " +
                  fmt(100 * r.pos_accuracy())};
}

// Best development F over checkpoints every 4 epochs, as in model selection.
double best_dev_f(const Corpus& train, const std::vector<DiscTree>& dev, std::uint64_t seed, double p, int epochs) {
  auto cfg = ModelConfig::desk();
  cfg.seed = seed;
  Model<float> model(cfg, train.inventories);
  Trainer trainer(model, train.trees, p);
  std::vector<std::vector<std::string>> sentences;
  for (const auto& t : dev) sentences.push_back(t.tokens);
  const int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  double best = 0.0;
  for (int e = 1; e <= epochs; ++e) {
    trainer.run_epoch();
    if (e % 4 == 0) best = std::max(best, labelled_fscore(parse_all(model, sentences, jobs), dev).f1());
  }
  return best;
}

Outcome exploration() {
  auto all = toy_trees(250, 2025);
  const std::vector<DiscTree> dev(all.begin() + 200, all.end());
  all.resize(200);
  const auto train = build_vocabularies(std::move(all));
  const int epochs = 20;
  double with = 0.0, without = 0.0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double s = best_dev_f(train, dev, seed, 0.0, epochs);
    const double d = best_dev_f(train, dev, seed, 0.15, epochs);
    without += s / 5;
    with += d / 5;
    per_seed += (seed > 1 ? ", " : "") + fmt(100 * d) + "/" + fmt(100 * s);
  }
  return {with >= without, "mean dev F dynamic " + fmt(100 * with) + " vs static " + fmt(100 * without) + " over 5 seeds, " +
                               std::to_string(epochs) + " epochs (per seed " + per_seed + ")"};
}

Outcome locality() {
  const auto corpus = build_vocabularies({testing::parent_tree()});
  Model<float> m(ModelConfig::desk(), corpus.inventories);
  const auto enc = encode(m, testing::parent_tree().tokens);
  std::mt19937_64 rng(41);
  const std::vector<std::string> nts = {"X"};
  // same (focus, item) pair seen with different rest-of-memory contents
  std::map<std::pair<IndexSet, IndexSet>, double> seen;
  std::size_t compared = 0, differing = 0;
  for (int walk = 0; walk < 300; ++walk) {
    auto c = initial(8);
    while (!is_goal(c)) {
      if (c.structural_step() && c.focus() && !c.memory().empty()) {
        const auto d = structural_distribution(c, enc, m);
        for (std::size_t k = 0; k < d.actions.size(); ++k) {
          if (d.actions[k].kind != ActionKind::kCombine) continue;
          auto [it, fresh] = seen.emplace(std::pair{*c.focus(), c.memory().at(d.actions[k].key)}, d.logits[k]);
          if (!fresh) {
            ++compared;
            if (std::memcmp(&it->second, &d.logits[k], sizeof(double)) != 0) ++differing;
          }
        }
      }
      const auto legal = legal_actions(c, nts);
      c = apply(c, legal[std::uniform_int_distribution<std::size_t>(0, legal.size() - 1)(rng)]);
    }
  }
  return {compared > 100 && differing == 0,
          std::to_string(compared) + " repeated combine scores under other memory contents, " +
              std::to_string(differing) + " differ"};
}

Outcome round_trips() {
  std::size_t bad_trees = 0;
  for (const auto& t : generated_corpus()) {
    const auto line = write_discbracket(t);
    const auto back = parse_discbracket(line);
    if (!(back == t) || write_discbracket(back) != line) ++bad_trees;
  }
  std::size_t bad_models = 0;
  const auto corpus = build_vocabularies(toy_trees(30, 5));
  auto small = ModelConfig::desk();
  small.sent_rnn_layers = 1;
  small.dim_hidden = 8;
  for (auto cfg : {ModelConfig{}, ModelConfig::desk(), small}) {
    cfg.epochs = 1;
    Model<float> m(cfg, corpus.inventories);
    Trainer(m, {corpus.trees.begin(), corpus.trees.begin() + 3}, 0.0).run_epoch();
    std::ostringstream first, second;
    save_model(m, first);
    std::istringstream in(first.str());
    save_model(load_model(in), second);
    if (first.str() != second.str()) ++bad_models;
  }
  return {bad_trees == 0 && bad_models == 0, std::to_string(generated_corpus().size()) + " trees (" +
                                                 std::to_string(bad_trees) + " differ), 3 model presets (" +
                                                 std::to_string(bad_models) + " differ)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> only;
  app.add_option("criteria", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "golden static derivation of the wh-question tree", true, golden_derivation},
      {2, "derivation length 4n-2 with n shifts and n-1 combines", true, derivation_length},
      {3, "static oracle round trip", true, static_round_trip},
      {4, "reachability agrees with brute-force search", true, reachability},
      {5, "dynamic oracle soundness against exhaustive search", true, soundness},
      {6, "dynamic oracle gold path reaches F = 1", true, gold_path},
      {7, "set representation boundary selection", true, set_representations},
      {8, "gradient check", true, gradient_check},
      {9, "overfit a 20-sentence toy corpus", true, overfit},
      {10, "exploration does not hurt (non-blocking)", false, exploration},
      {11, "combine scores are local to the combined items", true, locality},
      {12, "treebank and model file round trips", true, round_trips},
  };

  bool blocking_failure = false;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "[" << (c.id < 10 ? " " : "") << c.id << "] " << (o.pass ? "PASS" : "FAIL") << " " << c.name << ": "
              << o.detail << " (" << fmt(secs, 1) << " s)" << std::endl;
    if (!o.pass && c.blocking) blocking_failure = true;
  }
  return blocking_failure ? 1 : 0;
}
