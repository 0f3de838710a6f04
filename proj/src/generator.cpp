#include "dsetp/generator.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace dsetp {

namespace {

constexpr std::array kLabels = {"S", "NP", "VP", "PP", "SBAR", "ADJP", "ADVP", "WHNP", "SQ", "X"};
constexpr std::array kTags = {"NN", "VB", "DT", "JJ", "IN", "RB", "PRP", "PUNCT"};

template <class Range>
std::string pick(std::mt19937_64& rng, const Range& r) {
  std::uniform_int_distribution<std::size_t> d(0, r.size() - 1);
  return r[d(rng)];
}

bool coin(std::mt19937_64& rng, double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }

std::string random_word(std::mt19937_64& rng) {
  static constexpr std::string_view kAlphabet = "abcdeghiklmnoprstu";
  std::uniform_int_distribution<int> len(1, 5);
  std::uniform_int_distribution<std::size_t> ch(0, kAlphabet.size() - 1);
  std::string w;
  for (int k = len(rng); k > 0; --k) w += kAlphabet[ch(rng)];
  return w;
}

std::string chain_label(std::mt19937_64& rng, double unary_rate) {
  std::string label = pick(rng, kLabels);
  while (coin(rng, unary_rate)) label += std::string(kDefaultUnarySeparator) + pick(rng, kLabels);
  return label;
}

}  // namespace

DiscTree random_tree(std::mt19937_64& rng, const GeneratorOptions& options) {
  if (options.min_n < 1 || options.max_n < options.min_n)
    throw std::invalid_argument("random_tree: need 1 <= min_n <= max_n");
  const Position n = std::uniform_int_distribution<Position>(options.min_n, options.max_n)(rng);

  DiscTree tree;
  std::vector<IndexSet> items;
  for (Position p = 0; p < n; ++p) {
    tree.tokens.push_back(random_word(rng));
    tree.pos_tags.push_back(pick(rng, kTags));
    items.push_back(IndexSet::singleton(p));
    if (coin(rng, options.unary_rate * 0.5))
      tree.constituents.push_back({chain_label(rng, options.unary_rate), items.back()});
  }

  while (items.size() > 1) {
    const std::size_t k =
        std::min<std::size_t>(items.size(), std::uniform_int_distribution<std::size_t>(2, 3)(rng));
    std::vector<std::size_t> chosen;
    if (coin(rng, options.gap_rate)) {
      std::vector<std::size_t> all(items.size());
      for (std::size_t a = 0; a < all.size(); ++a) all[a] = a;
      std::shuffle(all.begin(), all.end(), rng);
      chosen.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
    } else {
      // items are kept sorted by left-index
      const std::size_t start =
          std::uniform_int_distribution<std::size_t>(0, items.size() - k)(rng);
      for (std::size_t a = 0; a < k; ++a) chosen.push_back(start + a);
    }
    std::sort(chosen.begin(), chosen.end());
    IndexSet merged = items[chosen.front()];
    for (std::size_t a = 1; a < chosen.size(); ++a) merged = merged.union_with(items[chosen[a]]);
    for (std::size_t a = chosen.size(); a-- > 0;)
      items.erase(items.begin() + static_cast<std::ptrdiff_t>(chosen[a]));
    tree.constituents.push_back({chain_label(rng, options.unary_rate), merged});
    items.insert(std::upper_bound(items.begin(), items.end(), merged,
                                  [](const IndexSet& a, const IndexSet& b) { return a.min() < b.min(); }),
                 merged);
  }

  const IndexSet full = IndexSet::range(0, n - 1);
  if (std::none_of(tree.constituents.begin(), tree.constituents.end(),
                   [&](const Constituent& c) { return c.yield == full; }))
    tree.constituents.push_back({chain_label(rng, options.unary_rate), full});
  tree.sort_constituents();
  return tree;
}

std::vector<DiscTree> random_trees(std::size_t count, std::uint64_t seed,
                                   const GeneratorOptions& options) {
  std::mt19937_64 rng(seed);
  std::vector<DiscTree> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(random_tree(rng, options));
  return out;
}

// ---------------------------------------------------------------- toy grammar

namespace {

constexpr std::array kDets = {"the", "a", "this", "every"};
constexpr std::array kAdjs = {"big", "old", "red", "small"};
constexpr std::array kNouns = {"dog", "cat", "man", "woman", "park", "ball", "hat", "book"};
constexpr std::array kTools = {"telescope", "stick", "fork", "spoon"};
constexpr std::array kPronouns = {"he", "she", "it"};
constexpr std::array kVerbs = {"sees", "likes", "hits", "takes", "finds"};
constexpr std::array kParticleVerbs = {"picks", "throws", "looks"};
constexpr std::array kParticles = {"up", "out"};
constexpr std::array kPreps = {"with", "near"};
constexpr std::array kAdverbs = {"often", "quickly"};
constexpr std::array kWh = {"what", "whom"};
constexpr std::array kAux = {"does", "did"};
constexpr std::array kBareVerbs = {"see", "like", "hit", "take", "find"};

class ToyBuilder {
 public:
  explicit ToyBuilder(std::mt19937_64& rng) : rng_(rng) {}

  IndexSet word(const std::string& w, const char* tag) {
    tree_.tokens.push_back(w);
    tree_.pos_tags.push_back(tag);
    return IndexSet::singleton(static_cast<Position>(tree_.tokens.size() - 1));
  }

  IndexSet node(const char* label, const IndexSet& yield) {
    tree_.constituents.push_back({label, yield});
    return yield;
  }

  // Noun phrase; `tool` tells whether its noun prefers VP attachment.
  IndexSet noun_phrase(bool allow_tool, bool* tool = nullptr) {
    if (coin(rng_, 0.15)) {
      if (tool) *tool = false;
      return node("NP", word(pick(rng_, kPronouns), "PRP"));
    }
    IndexSet y = word(pick(rng_, kDets), "DT");
    if (coin(rng_, 0.3)) y = y.union_with(word(pick(rng_, kAdjs), "JJ"));
    const bool is_tool = allow_tool && coin(rng_, 0.5);
    if (tool) *tool = is_tool;
    y = y.union_with(word(is_tool ? pick(rng_, kTools) : pick(rng_, kNouns), "NN"));
    return node("NP", y);
  }

  IndexSet adverb() { return node("ADVP", word(pick(rng_, kAdverbs), "RB")); }

  DiscTree take() {
    tree_.sort_constituents();
    return collapse_unaries(tree_);
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64& rng_;
  DiscTree tree_;
};

void declarative(ToyBuilder& b, const ToyOptions& options) {
  auto& rng = b.rng();
  IndexSet s = b.noun_phrase(false);
  IndexSet vp = b.word(pick(rng, kVerbs), "VB");
  IndexSet object = b.noun_phrase(false);
  if (coin(rng, 0.5)) {
    IndexSet pp = b.word(pick(rng, kPreps), "IN");
    bool tool = false;
    pp = b.node("PP", pp.union_with(b.noun_phrase(true, &tool)));
    const bool to_verb = coin(rng, options.attachment_noise) ? !tool : tool;
    if (to_verb)
      vp = vp.union_with(object).union_with(pp);
    else
      vp = vp.union_with(b.node("NP", object.union_with(pp)));
  } else {
    vp = vp.union_with(object);
  }
  if (coin(rng, 0.3)) vp = vp.union_with(b.adverb());
  s = s.union_with(b.node("VP", vp));
  b.node("S", s.union_with(b.word(".", "PUNCT")));
}

void particle(ToyBuilder& b) {
  auto& rng = b.rng();
  IndexSet s = b.noun_phrase(false);
  IndexSet verb = b.word(pick(rng, kParticleVerbs), "VB");
  IndexSet object = b.noun_phrase(false);
  IndexSet prt = b.word(pick(rng, kParticles), "RP");
  IndexSet inner = b.node("VP", verb.union_with(prt));
  s = s.union_with(b.node("VP", inner.union_with(object)));
  b.node("S", s.union_with(b.word(".", "PUNCT")));
}

void question(ToyBuilder& b) {
  auto& rng = b.rng();
  IndexSet wh = b.node("WHNP", b.word(pick(rng, kWh), "WP"));
  IndexSet sq = wh.union_with(b.word(pick(rng, kAux), "VBZ"));
  sq = sq.union_with(b.noun_phrase(false));
  IndexSet vp = wh.union_with(b.word(pick(rng, kBareVerbs), "VB"));
  if (coin(rng, 0.3)) vp = vp.union_with(b.adverb());
  sq = sq.union_with(b.node("VP", vp));
  b.node("SBARQ", b.node("SQ", sq).union_with(b.word("?", "PUNCT")));
}

}  // namespace

DiscTree toy_tree(std::mt19937_64& rng, const ToyOptions& options) {
  if (!(options.attachment_noise >= 0.0 && options.attachment_noise <= 1.0))
    throw std::invalid_argument("attachment noise must be in [0,1]");
  ToyBuilder b(rng);
  const double r = std::uniform_real_distribution<double>(0, 1)(rng);
  if (r < 0.5)
    declarative(b, options);
  else if (r < 0.75)
    particle(b);
  else
    question(b);
  return b.take();
}

std::vector<DiscTree> toy_trees(std::size_t count, std::uint64_t seed, const ToyOptions& options) {
  std::mt19937_64 rng(seed);
  std::vector<DiscTree> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(toy_tree(rng, options));
  return out;
}

}  // namespace dsetp
