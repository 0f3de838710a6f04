#include <cmath>
#include <cstring>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "dsetp/generator.hpp"
#include "dsetp/model.hpp"
#include "dsetp/model_io.hpp"
#include "dsetp/trainer.hpp"
#include "fixtures.hpp"
#include "gradient_check.hpp"

using namespace dsetp;

namespace {

Corpus parent_corpus() { return build_vocabularies({testing::parent_tree()}); }

template <class T = float>
Model<T> desk_model(const Corpus& corpus, std::uint64_t seed = 3) {
  auto cfg = ModelConfig::desk();
  cfg.seed = seed;
  return Model<T>(cfg, corpus.inventories);
}

template <class T>
bool same_bits(const nn::Matrix<T>& a, const nn::Matrix<T>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(T) * static_cast<std::size_t>(a.size())) == 0;
}

double total(const std::vector<double>& p) { return std::accumulate(p.begin(), p.end(), 0.0); }

Configuration run(Position n, const char* actions) { return replay(n, parse_derivation(actions)); }

}  // namespace

TEST_CASE("model config") {
  auto d = ModelConfig::desk();
  CHECK(d.dim_word_emb == 16);
  CHECK(d.dim_char_emb == 32);
  CHECK(d.dim_char_rnn == 16);
  CHECK(d.dim_sent_rnn == 32);
  CHECK(d.dim_hidden == 32);
  CHECK(d.learning_rate == 0.03);
  CHECK(d.warmup_steps == 200);
  CHECK(ModelConfig{}.learning_rate == 0.01);
  CHECK(ModelConfig{}.warmup_steps == 1000);
  CHECK_NOTHROW(d.validate());

  ModelConfig c;
  c.set("dim_hidden", "7");
  c.set("explore_prob", "0.25");
  c.set("grad_noise", "false");
  CHECK(c.dim_hidden == 7);
  CHECK(c.explore_prob == 0.25);
  CHECK_FALSE(c.grad_noise);
  CHECK_THROWS_AS(c.set("dim_hiden", "7"), std::invalid_argument);
  CHECK_THROWS_AS(c.set("dim_hidden", "seven"), std::invalid_argument);

  ModelConfig back;
  for (const auto& [k, v] : c.fields()) back.set(k, v);
  CHECK(back == c);

  c.unk_prob = 1.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.dim_word_emb = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("encoder") {
  const auto corpus = parent_corpus();
  const auto& tokens = testing::parent_tree().tokens;

  SUBCASE("default dimensions") {
    Model<float> big(ModelConfig{}, corpus.inventories);
    auto enc = encode(big, tokens);
    CHECK(enc.h2.size() == 8);
    CHECK(enc.h1.size() == 8);
    CHECK(enc.h2[0].size() == 400);
  }

  auto m = desk_model(corpus);
  auto a = encode(m, tokens);
  auto b = encode(m, tokens);
  CHECK(a.h2.size() == 8);
  CHECK(a.h2[3].size() == 64);
  for (std::size_t i = 0; i < a.h2.size(); ++i) {
    CHECK(same_bits<float>(a.h1[i], b.h1[i]));
    CHECK(same_bits<float>(a.h2[i], b.h2[i]));
  }

  auto swapped = tokens;
  std::swap(swapped[1], swapped[4]);
  auto c = encode(m, swapped);
  CHECK_FALSE(same_bits<float>(a.h2[0], c.h2[0]));

  // unseen words fall back to the unknown entries
  std::vector<std::string> unseen = {"zebra", "ünïcode"};
  CHECK(encode(m, unseen).h2.size() == 2);
  CHECK_THROWS_AS(encode(m, std::vector<std::string>{}), std::invalid_argument);
}

TEST_CASE("set representation picks the four boundary encodings") {
  const auto corpus = parent_corpus();
  auto m = desk_model(corpus);
  auto enc = encode(m, testing::parent_tree().tokens);
  const auto& nil = m.averaged().value(m.layout().h_nil);
  auto expect = [&](std::array<int, 4> idx) {
    nn::Vector<float> v(4 * enc.h2[0].size());
    const auto d = enc.h2[0].size();
    for (int k = 0; k < 4; ++k) v.segment(k * d, d) = idx[k] < 0 ? nn::Vector<float>(nil) : enc.h2[idx[k]];
    return v;
  };
  CHECK(same_bits<float>(set_representation(IndexSet{1, 6}, enc, m), expect({1, 6, 2, 5})));
  CHECK(same_bits<float>(set_representation(IndexSet{1, 5, 6}, enc, m), expect({1, 6, 2, 4})));
  CHECK(same_bits<float>(set_representation(IndexSet{3}, enc, m), expect({3, 3, -1, -1})));
  CHECK(same_bits<float>(set_representation(IndexSet{3, 4}, enc, m), expect({3, 4, -1, -1})));
  CHECK_FALSE(same_bits<float>(set_representation(IndexSet{1, 6}, enc, m),
                               set_representation(IndexSet{1, 5, 6}, enc, m)));
  CHECK_THROWS_AS(set_representation(IndexSet{9}, enc, m), std::out_of_range);
}

TEST_CASE("set representations of single-gap sets are distinct") {
  const auto corpus = parent_corpus();
  auto m = desk_model(corpus);
  auto enc = encode(m, testing::parent_tree().tokens);
  std::vector<IndexSet> sets;
  for (int mask = 1; mask < 256; ++mask) {
    std::vector<Position> ps;
    for (Position p = 0; p < 8; ++p)
      if (mask & (1 << p)) ps.push_back(p);
    IndexSet s(ps);
    if (fan_out(s) <= 2) sets.push_back(s);
  }
  std::vector<nn::Vector<float>> reps;
  for (const auto& s : sets) reps.push_back(set_representation(s, enc, m));
  for (std::size_t a = 0; a < sets.size(); ++a)
    for (std::size_t b = a + 1; b < sets.size(); ++b) CHECK_FALSE(same_bits<float>(reps[a], reps[b]));
}

TEST_CASE("structural distribution") {
  const auto corpus = parent_corpus();
  auto m = desk_model(corpus);
  auto enc = encode(m, testing::parent_tree().tokens);

  // S = {So}, {what}, {'s a parent}; focus {to}
  auto c = testing::parent_prefix(16);
  REQUIRE(c.memory().size() == 3);
  auto d = structural_distribution(c, enc, m);
  REQUIRE(d.probs.size() == 4);
  CHECK(total(d.probs) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(d.actions == std::vector<Action>{Action::combine(0), Action::combine(1), Action::combine(2),
                                         Action::shift()});
  for (double p : d.probs) CHECK(p >= 0.0);

  auto start = structural_distribution(initial(8), enc, m);
  CHECK(start.actions == std::vector<Action>{Action::shift()});
  CHECK(start.probs == std::vector<double>{1.0});

  // nothing left to shift: combine only
  auto last = testing::parent_prefix(28);
  auto e = structural_distribution(last, enc, m);
  CHECK(e.actions == std::vector<Action>{Action::combine(0)});

  CHECK_THROWS_AS(structural_distribution(testing::parent_prefix(3), enc, m), TransitionError);
  CHECK_THROWS_AS(structural_distribution(testing::parent_prefix(30), enc, m), TransitionError);
}

TEST_CASE("combine scores only depend on the two combined items") {
  const auto corpus = parent_corpus();
  auto m = desk_model(corpus);
  auto enc = encode(m, testing::parent_tree().tokens);
  std::mt19937_64 rng(41);
  const std::vector<std::string> nts = {"X"};

  // random structural configurations grouped by focus
  std::map<IndexSet, std::vector<Configuration>> by_focus;
  for (int walk = 0; walk < 200; ++walk) {
    auto c = initial(8);
    while (!is_goal(c)) {
      if (c.structural_step() && c.focus()) by_focus[*c.focus()].push_back(c);
      auto legal = legal_actions(c, nts);
      c = apply(c, legal[std::uniform_int_distribution<std::size_t>(0, legal.size() - 1)(rng)]);
    }
  }
  int compared = 0;
  for (const auto& [focus, group] : by_focus) {
    std::map<IndexSet, double> seen;
    for (const auto& c : group) {
      auto d = structural_distribution(c, enc, m);
      for (std::size_t k = 0; k < d.actions.size(); ++k) {
        if (d.actions[k].kind != ActionKind::kCombine) continue;
        const auto& item = c.memory().at(d.actions[k].key);
        auto [it, fresh] = seen.emplace(item, d.logits[k]);
        if (!fresh) {
          ++compared;
          CHECK(std::memcmp(&it->second, &d.logits[k], sizeof(double)) == 0);
        }
      }
    }
  }
  CHECK(compared > 100);
}

TEST_CASE("label distribution") {
  const auto corpus = parent_corpus();
  auto m = desk_model(corpus);
  auto enc = encode(m, testing::parent_tree().tokens);
  const auto n_labels = corpus.inventories.nonterminals.size();
  REQUIRE(n_labels == 5);

  auto c = testing::parent_prefix(3);
  auto d = label_distribution(c, enc, m);
  CHECK(d.probs.size() == 6);
  CHECK(d.actions.back() == Action::no_label());
  CHECK(total(d.probs) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(d.probs.back() > 0.0);
  auto again = label_distribution(c, enc, m);
  CHECK(again.probs == d.probs);

  auto forced = label_distribution(testing::parent_prefix(29), enc, m);
  CHECK(forced.probs.back() == 0.0);
  CHECK(total(forced.probs) == doctest::Approx(1.0).epsilon(1e-6));

  CHECK_THROWS_AS(label_distribution(testing::parent_prefix(2), enc, m), TransitionError);
}

TEST_CASE("tagger reads the first recurrent layer") {
  const auto corpus = parent_corpus();
  auto m = desk_model(corpus);
  const auto& tokens = testing::parent_tree().tokens;
  auto enc = encode(m, tokens);
  auto before = tag_distribution(enc, m, 2);
  CHECK(before.size() == corpus.inventories.pos.size());
  CHECK(total(before) == doctest::Approx(1.0).epsilon(1e-6));

  auto& ps = m.averaged();
  for (nn::ParamId id = 0; id < ps.size(); ++id)
    if (ps.name(id).rfind("sent_lstm.1.", 0) == 0) ps.value(id).array() += 0.5f;
  auto enc2 = encode(m, tokens);
  CHECK(tag_distribution(enc2, m, 2) == before);
  CHECK_FALSE(same_bits<float>(enc.h2[2], enc2.h2[2]));
}

TEST_CASE("greedy parsing with random weights") {
  auto trees = random_trees(30, 13, {.max_n = 10, .gap_rate = 0.4, .unary_rate = 0.2});
  auto corpus = build_vocabularies(trees);
  auto m = desk_model(corpus);
  for (const auto& t : corpus.trees) {
    auto p = greedy_parse(t.tokens, m);
    CHECK(p.tokens == t.tokens);
    CHECK(p.pos_tags.size() == t.tokens.size());
    CHECK(validate_tree(p, {.allow_unary_chains = true}).empty());
  }
  auto single = greedy_parse(std::vector<std::string>{"hello"}, m);
  REQUIRE(single.constituents.size() == 1);
  CHECK(single.constituents[0].yield == IndexSet{0});
  CHECK_THROWS_AS(greedy_parse(std::vector<std::string>{}, m), std::invalid_argument);
}

TEST_CASE("analytic gradients match finite differences") {
  const auto r = testing::check_gradients();
  for (const auto& f : r.failures) FAIL_CHECK(f);
  for (const auto& name : r.untouched) FAIL_CHECK("no gradient reaches " << name);
  CHECK(r.checked >= 200);
  MESSAGE("gradient check: ", r.checked, " entries, worst relative error ", r.worst);
}

TEST_CASE("learning rate schedule") {
  auto corpus = parent_corpus();
  auto m = desk_model(corpus);
  Trainer tr(m, corpus.trees, 0.0);
  CHECK(tr.learning_rate(0) == doctest::Approx(0.03 / 200));
  CHECK(tr.learning_rate(99) == doctest::Approx(0.03 * 0.5 / (1 + 99e-7)));
  CHECK(tr.learning_rate(5000) == doctest::Approx(0.03 / (1 + 5000e-7)));
}

TEST_CASE("averaged weights are the running mean of the updates") {
  auto corpus = parent_corpus();
  auto m = desk_model(corpus);
  Trainer tr(m, corpus.trees, 0.0);
  const auto id = m.layout().tag_w;
  std::vector<nn::Matrix<float>> grads(m.weights().size());
  std::mt19937_64 rng(5);
  nn::Matrix<double> sum = nn::Matrix<double>::Zero(m.weights().value(id).rows(), m.weights().value(id).cols());
  const int steps = 50;
  for (int s = 0; s < steps; ++s) {
    grads[id] = nn::Matrix<float>::Random(sum.rows(), sum.cols());
    tr.update(grads);
    sum += m.weights().value(id).cast<double>();
  }
  CHECK(tr.updates() == steps);
  const nn::Matrix<double> mean = sum / steps;
  CHECK((mean - m.averaged().value(id).cast<double>()).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("training") {
  auto corpus = build_vocabularies(toy_trees(12, 21));
  auto cfg = ModelConfig::desk();
  cfg.seed = 8;
  cfg.warmup_steps = 0;

  SUBCASE("loss goes down") {
    Model<float> m(cfg, corpus.inventories);
    Trainer tr(m, corpus.trees, 0.0);
    auto first = tr.run_epoch();
    EpochStats last;
    for (int e = 0; e < 5; ++e) last = tr.run_epoch();
    CHECK(last.epoch == 6);
    CHECK(last.parse_loss < first.parse_loss);
    CHECK(last.tag_loss < first.tag_loss);
    CHECK(tr.updates() == 6 * 2 * corpus.trees.size());
  }

  SUBCASE("no exploration is static training") {
    cfg.epochs = 2;
    cfg.explore_prob = 0.0;
    auto a = train_static(corpus, cfg);
    auto b = train_dynamic(corpus, cfg);
    CHECK(a == b);
    std::ostringstream sa, sb;
    save_model(a, sa);
    save_model(b, sb);
    CHECK(sa.str() == sb.str());
  }

  SUBCASE("full exploration") {
    Model<float> m(cfg, corpus.inventories);
    Trainer tr(m, corpus.trees, 1.0);
    auto s = tr.run_epoch();
    CHECK(s.explored == corpus.trees.size());
    CHECK(std::isfinite(s.parse_loss));
  }

  SUBCASE("fixed seed reproduces training") {
    cfg.epochs = 2;
    cfg.explore_prob = 0.5;
    CHECK(train_dynamic(corpus, cfg) == train_dynamic(corpus, cfg));
  }

  SUBCASE("bad input") {
    Corpus empty;
    empty.inventories = corpus.inventories;
    CHECK_THROWS_AS(train_static(empty, cfg), std::invalid_argument);
    Model<float> m(cfg, corpus.inventories);
    auto stray = testing::parent_tree();
    CHECK_THROWS_AS(Trainer(m, {stray}, 0.0), std::invalid_argument);
  }
}

TEST_CASE("a single sentence is learnt exactly") {
  auto corpus = parent_corpus();
  auto cfg = ModelConfig::desk();
  // regularisers off so the fit is quick; 200 epochs already suffice
  cfg.epochs = 300;
  cfg.warmup_steps = 0;
  cfg.grad_noise = false;
  cfg.dropout_tagger = 0.0;
  cfg.dropout_parser = 0.0;
  auto m = train_static(corpus, cfg);
  auto p = greedy_parse(corpus.trees[0].tokens, m, Weights::kCurrent);
  CHECK(p == corpus.trees[0]);
}

TEST_CASE("model files") {
  auto corpus = build_vocabularies(toy_trees(8, 4));
  auto cfg = ModelConfig::desk();
  cfg.epochs = 1;
  auto m = train_static(corpus, cfg);
  std::ostringstream first;
  save_model(m, first);
  std::istringstream in(first.str());
  auto back = load_model(in);
  CHECK(back == m);
  std::ostringstream second;
  save_model(back, second);
  CHECK(second.str() == first.str());
  CHECK(first.str().rfind("DSETP1\n", 0) == 0);
  for (const auto& t : corpus.trees) CHECK(greedy_parse(t.tokens, back) == greedy_parse(t.tokens, m));

  const auto bytes = first.str();
  auto load = [](const std::string& s) {
    std::istringstream is(s);
    return load_model(is);
  };
  CHECK_THROWS_AS(load(bytes.substr(0, bytes.size() - 3)), ModelFormatError);
  CHECK_THROWS_AS(load(bytes.substr(0, 20)), ModelFormatError);
  CHECK_THROWS_AS(load(bytes + "x"), ModelFormatError);
  CHECK_THROWS_AS(load("DSETP0\n" + bytes.substr(7)), ModelFormatError);
  std::string old = bytes;
  old.replace(old.find("\"version\":1"), 11, "\"version\":9");
  CHECK_THROWS_WITH_AS(load(old), doctest::Contains("version 9"), ModelFormatError);
  std::string reshaped = bytes;
  const auto at = reshaped.find("\"rows\":16");
  REQUIRE(at != std::string::npos);
  reshaped.replace(at, 9, "\"rows\":15");
  CHECK_THROWS_AS(load(reshaped), ModelFormatError);
}
