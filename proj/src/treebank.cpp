#include "dsetp/treebank.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>

namespace dsetp {

// ---------------------------------------------------------------- vocabulary

Vocabulary Vocabulary::from_counts(const std::map<std::string, std::size_t>& counts,
                                   bool with_unknown) {
  std::vector<std::pair<std::string, std::size_t>> entries(counts.begin(), counts.end());
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return from_entries(std::move(entries), with_unknown);
}

Vocabulary Vocabulary::from_entries(std::vector<std::pair<std::string, std::size_t>> entries,
                                    bool with_unknown) {
  Vocabulary v;
  v.with_unknown_ = with_unknown;
  if (with_unknown) {
    v.symbols_.emplace_back(kUnknown);
    v.counts_.push_back(0);
  }
  for (auto& [sym, k] : entries) {
    if (with_unknown && sym == kUnknown) continue;
    v.symbols_.push_back(std::move(sym));
    v.counts_.push_back(k);
  }
  for (std::size_t id = 0; id < v.symbols_.size(); ++id) v.index_.emplace(v.symbols_[id], id);
  return v;
}

std::optional<std::size_t> Vocabulary::find(std::string_view symbol) const {
  auto it = index_.find(symbol);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::lookup(std::string_view symbol) const {
  if (auto id = find(symbol)) return *id;
  if (with_unknown_) return 0;
  throw std::out_of_range("unknown symbol '" + std::string(symbol) + "'");
}

std::vector<std::string> utf8_chars(std::string_view token) {
  std::vector<std::string> out;
  std::size_t k = 0;
  while (k < token.size()) {
    const auto lead = static_cast<unsigned char>(token[k]);
    std::size_t len = 1;
    if (lead >= 0xF0)
      len = 4;
    else if (lead >= 0xE0)
      len = 3;
    else if (lead >= 0xC0)
      len = 2;
    len = std::min(len, token.size() - k);
    out.emplace_back(token.substr(k, len));
    k += len;
  }
  return out;
}

Corpus build_vocabularies(std::vector<DiscTree> trees) {
  if (trees.empty()) throw std::invalid_argument("cannot build vocabularies from an empty corpus");
  std::map<std::string, std::size_t> words, chars, pos, nts;
  for (const auto& t : trees) {
    for (const auto& w : t.tokens) {
      ++words[w];
      for (auto& ch : utf8_chars(w)) ++chars[ch];
    }
    for (const auto& p : t.pos_tags) ++pos[p];
    for (const auto& c : t.constituents) ++nts[c.label];
  }
  Corpus corpus;
  corpus.trees = std::move(trees);
  auto& inv = corpus.inventories;
  inv.words = Vocabulary::from_counts(words, true);
  inv.chars = Vocabulary::from_counts(chars, true);
  inv.pos = Vocabulary::from_counts(pos, false);
  inv.nonterminals = Vocabulary::from_counts(nts, false);

  mark_rare_words(inv, kDefaultUnkFraction);
  return corpus;
}

void mark_rare_words(Inventories& inv, double fraction) {
  if (fraction < 0.0 || fraction > 1.0) throw std::invalid_argument("rare-word fraction must be in [0,1]");
  const std::size_t types = inv.words.size() - (inv.words.has_unknown() ? 1 : 0);
  const auto rare = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(types)));
  inv.unk_replaceable.assign(inv.words.size(), false);
  for (std::size_t id = inv.words.size() - rare; id < inv.words.size(); ++id)
    inv.unk_replaceable[id] = true;
}

// -------------------------------------------------------------------- reader

namespace {

struct Node {
  std::string label;
  std::vector<std::unique_ptr<Node>> children;
  bool terminal = false;
  Position index = -1;
  std::string word;
};

class BracketReader {
 public:
  BracketReader(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  std::vector<std::unique_ptr<Node>> forest() {
    std::vector<std::unique_ptr<Node>> roots;
    skip_space();
    while (pos_ < text_.size()) {
      if (text_[pos_] != '(') fail("expected '(' at column " + std::to_string(pos_ + 1));
      roots.push_back(node());
      skip_space();
    }
    if (roots.empty()) fail("empty line");
    return roots;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_, what); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string_view atom() {
    const auto start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != '(' && text_[pos_] != ')')
      ++pos_;
    if (pos_ == start) fail("expected a symbol at column " + std::to_string(start + 1));
    return text_.substr(start, pos_ - start);
  }

  std::unique_ptr<Node> node() {
    ++pos_;  // '('
    skip_space();
    auto n = std::make_unique<Node>();
    n->label = std::string(atom());
    for (;;) {
      skip_space();
      if (pos_ >= text_.size()) fail("unbalanced brackets: missing ')'");
      if (text_[pos_] == ')') {
        ++pos_;
        break;
      }
      if (text_[pos_] == '(') {
        n->children.push_back(node());
      } else {
        n->children.push_back(terminal(atom()));
      }
    }
    if (n->children.empty()) fail("node '" + n->label + "' has no children");
    const bool has_terminal = std::any_of(n->children.begin(), n->children.end(),
                                          [](const auto& c) { return c->terminal; });
    if (has_terminal && n->children.size() != 1)
      fail("terminal under '" + n->label + "' must be its only child");
    return n;
  }

  std::unique_ptr<Node> terminal(std::string_view a) {
    const auto eq = a.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == a.size())
      fail("malformed terminal '" + std::string(a) + "', expected INDEX=TOKEN");
    Position idx = 0;
    auto [ptr, ec] = std::from_chars(a.data(), a.data() + eq, idx);
    if (ec != std::errc() || ptr != a.data() + eq || idx < 0)
      fail("malformed terminal index in '" + std::string(a) + "'");
    auto n = std::make_unique<Node>();
    n->terminal = true;
    n->index = idx;
    n->word = std::string(a.substr(eq + 1));
    return n;
  }

  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

struct Collected {
  std::map<Position, std::pair<std::string, std::string>> leaves;  // index -> (word, pos)
  std::vector<Constituent> constituents;
};

class Collector {
 public:
  explicit Collector(std::size_t line) : line_(line) {}

  // Returns the yield of the node; appends constituents in pre-order.
  std::vector<Position> visit(const Node& n, Collected& out) {
    if (n.children.size() == 1 && n.children.front()->terminal) {
      const auto& t = *n.children.front();
      if (!out.leaves.emplace(t.index, std::make_pair(t.word, n.label)).second)
        throw ParseError(line_, "duplicate index " + std::to_string(t.index));
      return {t.index};
    }
    const auto slot = out.constituents.size();
    out.constituents.push_back({n.label, {}});
    std::vector<Position> yield;
    for (const auto& c : n.children) {
      auto sub = visit(*c, out);
      yield.insert(yield.end(), sub.begin(), sub.end());
    }
    out.constituents[slot].yield = IndexSet(yield);
    return yield;
  }

 private:
  std::size_t line_;
};

}  // namespace

DiscTree parse_discbracket(std::string_view line, std::size_t line_number,
                           const ReadOptions& options) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);
  BracketReader reader(line, line_number);
  auto roots = reader.forest();

  Collected col;
  Collector collector(line_number);
  for (const auto& r : roots) collector.visit(*r, col);

  const auto n = static_cast<Position>(col.leaves.size());
  Position expect = 0;
  for (const auto& [idx, leaf] : col.leaves) {
    if (idx != expect)
      throw ParseError(line_number, "missing index " + std::to_string(expect) +
                                        " (indices must be exactly 0.." + std::to_string(n - 1) +
                                        ")");
    ++expect;
  }

  DiscTree tree;
  for (auto& [idx, leaf] : col.leaves) {
    tree.tokens.push_back(leaf.first);
    tree.pos_tags.push_back(leaf.second);
  }
  tree.constituents = std::move(col.constituents);
  tree.sort_constituents();

  auto violations = validate_tree(tree, {.allow_unary_chains = true});
  if (!violations.empty()) {
    tree.constituents.insert(tree.constituents.begin(),
                             Constituent{std::string(kSyntheticRoot), IndexSet::range(0, n - 1)});
    tree.synthetic_root = true;
    tree.sort_constituents();
    violations = validate_tree(tree, {.allow_unary_chains = true});
    if (!violations.empty()) throw ParseError(line_number, violations.front().message);
  }
  try {
    return collapse_unaries(tree, options.unary_sep);
  } catch (const std::invalid_argument& e) {
    throw ParseError(line_number, e.what());
  }
}

std::vector<DiscTree> read_trees(std::istream& in, const ReadOptions& options) {
  std::vector<DiscTree> trees;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    trees.push_back(parse_discbracket(line, number, options));
  }
  return trees;
}

Corpus read_discbracket(std::istream& in, const ReadOptions& options) {
  return build_vocabularies(read_trees(in, options));
}

// -------------------------------------------------------------------- writer

namespace {

struct Group {
  IndexSet yield;
  std::vector<std::string> labels;  // top-down
  int parent = -1;
};

}  // namespace

std::string write_discbracket(const DiscTree& tree, std::string_view sep) {
  DiscTree sorted = tree;
  sorted.sort_constituents();

  std::vector<Group> groups;
  for (const auto& c : sorted.constituents) {
    if (groups.empty() || groups.back().yield != c.yield) groups.push_back({c.yield, {}, -1});
    for (auto& part : split_label(c.label, sep)) groups.back().labels.push_back(std::move(part));
  }

  const Position n = tree.size();
  if (tree.synthetic_root) {
    const IndexSet full = n > 0 ? IndexSet::range(0, n - 1) : IndexSet();
    for (auto& g : groups) {
      if (g.yield == full && !g.labels.empty() && g.labels.front() == kSyntheticRoot) {
        g.labels.erase(g.labels.begin());
        break;
      }
    }
    std::erase_if(groups, [](const Group& g) { return g.labels.empty(); });
  }

  // Parent of a group: the smallest strict superset.
  for (std::size_t a = 0; a < groups.size(); ++a) {
    for (std::size_t b = 0; b < groups.size(); ++b) {
      if (a == b || groups[b].yield.size() <= groups[a].yield.size()) continue;
      if (!groups[a].yield.is_subset_of(groups[b].yield)) continue;
      const int cur = groups[a].parent;
      if (cur < 0 || groups[b].yield.size() < groups[cur].yield.size())
        groups[a].parent = static_cast<int>(b);
    }
  }
  std::vector<int> leaf_parent(n, -1);
  for (Position p = 0; p < n; ++p) {
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (!groups[g].yield.contains(p)) continue;
      const int cur = leaf_parent[p];
      if (cur < 0 || groups[g].yield.size() < groups[cur].yield.size())
        leaf_parent[p] = static_cast<int>(g);
    }
  }

  // Children keyed by left-index; a group id >= 0, a leaf -(p+1).
  std::vector<std::vector<std::pair<Position, int>>> kids(groups.size() + 1);
  auto slot = [&](int parent) { return parent < 0 ? groups.size() : std::size_t(parent); };
  for (std::size_t g = 0; g < groups.size(); ++g)
    kids[slot(groups[g].parent)].push_back({groups[g].yield.min(), static_cast<int>(g)});
  for (Position p = 0; p < n; ++p) kids[slot(leaf_parent[p])].push_back({p, -(p + 1)});
  for (auto& k : kids) std::sort(k.begin(), k.end());

  std::string out;
  auto emit = [&](auto&& self, int item) -> void {
    if (item < 0) {
      const Position p = -item - 1;
      out += '(' + tree.pos_tags[p] + ' ' + std::to_string(p) + '=' + tree.tokens[p] + ')';
      return;
    }
    const auto& g = groups[item];
    for (const auto& l : g.labels) out += '(' + l + ' ';
    bool first = true;
    for (const auto& [left, child] : kids[item]) {
      if (!first) out += ' ';
      first = false;
      self(self, child);
    }
    out.append(g.labels.size(), ')');
  };
  bool first = true;
  for (const auto& [left, item] : kids[groups.size()]) {
    if (!first) out += ' ';
    first = false;
    emit(emit, item);
  }
  return out;
}

}  // namespace dsetp
