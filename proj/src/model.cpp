#include "dsetp/model.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "dsetp/index_set.hpp"

namespace dsetp {

// ------------------------------------------------------------------- config

ModelConfig ModelConfig::desk() {
  ModelConfig c;
  c.dim_word_emb = 16;
  c.dim_char_emb = 32;
  c.dim_char_rnn = 16;
  c.dim_sent_rnn = 32;
  c.dim_hidden = 32;
  // small networks need fewer warm-up steps and a larger step size to
  // converge in a few hundred epochs
  c.learning_rate = 0.03;
  c.warmup_steps = 200;
  return c;
}

void ModelConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw std::invalid_argument(std::string(name) + " must be positive");
  };
  positive(dim_word_emb, "dim_word_emb");
  positive(dim_char_emb, "dim_char_emb");
  positive(dim_char_rnn, "dim_char_rnn");
  positive(dim_sent_rnn, "dim_sent_rnn");
  positive(dim_hidden, "dim_hidden");
  positive(sent_rnn_layers, "sent_rnn_layers");
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(name) + " must be in [0,1]");
  };
  unit(explore_prob, "explore_prob");
  unit(unk_prob, "unk_prob");
  unit(unk_fraction, "unk_fraction");
  // rate 1 would make the inverted scaling divide by zero
  if (!(dropout_tagger >= 0.0 && dropout_tagger < 1.0)) throw std::invalid_argument("dropout_tagger must be in [0,1)");
  if (!(dropout_parser >= 0.0 && dropout_parser < 1.0)) throw std::invalid_argument("dropout_parser must be in [0,1)");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (!(decay >= 0.0)) throw std::invalid_argument("decay must be non-negative");
  if (!(grad_clip_norm > 0.0)) throw std::invalid_argument("grad_clip_norm must be positive");
  if (epochs < 0) throw std::invalid_argument("epochs must be non-negative");
  if (warmup_steps < 0) throw std::invalid_argument("warmup_steps must be non-negative");
}

namespace {

template <class V>
V parse_number(const std::string& key, const std::string& text) {
  V v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw std::invalid_argument("bad value '" + text + "' for " + key);
  return v;
}

template <class V>
std::string format_number(V v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct FieldRef {
  std::function<std::string(const ModelConfig&)> get;
  std::function<void(ModelConfig&, const std::string&, const std::string&)> set;
};

template <class V>
FieldRef field(V ModelConfig::*member) {
  return {[member](const ModelConfig& c) { return format_number(c.*member); },
          [member](ModelConfig& c, const std::string& k, const std::string& v) {
            c.*member = parse_number<V>(k, v);
          }};
}

const std::map<std::string, FieldRef>& field_table() {
  static const std::map<std::string, FieldRef> table = [] {
    std::map<std::string, FieldRef> t;
    t["dim_word_emb"] = field(&ModelConfig::dim_word_emb);
    t["dim_char_emb"] = field(&ModelConfig::dim_char_emb);
    t["dim_char_rnn"] = field(&ModelConfig::dim_char_rnn);
    t["dim_sent_rnn"] = field(&ModelConfig::dim_sent_rnn);
    t["dim_hidden"] = field(&ModelConfig::dim_hidden);
    t["sent_rnn_layers"] = field(&ModelConfig::sent_rnn_layers);
    t["learning_rate"] = field(&ModelConfig::learning_rate);
    t["decay"] = field(&ModelConfig::decay);
    t["dropout_tagger"] = field(&ModelConfig::dropout_tagger);
    t["dropout_parser"] = field(&ModelConfig::dropout_parser);
    t["epochs"] = field(&ModelConfig::epochs);
    t["grad_clip_norm"] = field(&ModelConfig::grad_clip_norm);
    t["explore_prob"] = field(&ModelConfig::explore_prob);
    t["unk_prob"] = field(&ModelConfig::unk_prob);
    t["unk_fraction"] = field(&ModelConfig::unk_fraction);
    t["warmup_steps"] = field(&ModelConfig::warmup_steps);
    t["seed"] = field(&ModelConfig::seed);
    t["grad_noise"] = {[](const ModelConfig& c) { return std::string(c.grad_noise ? "true" : "false"); },
                       [](ModelConfig& c, const std::string& k, const std::string& v) {
                         if (v == "true" || v == "1")
                           c.grad_noise = true;
                         else if (v == "false" || v == "0")
                           c.grad_noise = false;
                         else
                           throw std::invalid_argument("bad value '" + v + "' for " + k);
                       }};
    return t;
  }();
  return table;
}

}  // namespace

void ModelConfig::set(const std::string& key, const std::string& value) {
  const auto& table = field_table();
  auto it = table.find(key);
  if (it == table.end()) throw std::invalid_argument("unknown model setting '" + key + "'");
  it->second.set(*this, key, value);
}

std::map<std::string, std::string> ModelConfig::fields() const {
  std::map<std::string, std::string> out;
  for (const auto& [k, f] : field_table()) out[k] = f.get(*this);
  return out;
}

// ------------------------------------------------------------------- layout

template <class T>
ModelLayout build_layout(const ModelConfig& cfg, const Inventories& inv, nn::ParamSet<T>& ps) {
  ModelLayout L;
  auto lstm = [&](const std::string& prefix, Eigen::Index in, Eigen::Index hidden) {
    LstmIds ids;
    ids.wx = ps.add(prefix + ".wx", 4 * hidden, in);
    ids.wh = ps.add(prefix + ".wh", 4 * hidden, hidden);
    ids.b = ps.add(prefix + ".b", 4 * hidden, 1);
    return ids;
  };
  auto ff = [&](const std::string& prefix, Eigen::Index in, Eigen::Index out) {
    FeedForwardIds ids;
    const Eigen::Index h = cfg.dim_hidden;
    ids.w1 = ps.add(prefix + ".w1", h, in);
    ids.b1 = ps.add(prefix + ".b1", h, 1);
    ids.w2 = ps.add(prefix + ".w2", h, h);
    ids.b2 = ps.add(prefix + ".b2", h, 1);
    ids.w3 = ps.add(prefix + ".w3", out, h);
    ids.b3 = ps.add(prefix + ".b3", out, 1);
    return ids;
  };
  L.word_emb = ps.add("word_emb", cfg.dim_word_emb, static_cast<Eigen::Index>(inv.words.size()));
  L.char_emb = ps.add("char_emb", cfg.dim_char_emb, static_cast<Eigen::Index>(inv.chars.size()));
  L.char_fwd = lstm("char_lstm.fwd", cfg.dim_char_emb, cfg.dim_char_rnn);
  L.char_bwd = lstm("char_lstm.bwd", cfg.dim_char_emb, cfg.dim_char_rnn);
  Eigen::Index in = 2 * cfg.dim_char_rnn + cfg.dim_word_emb;
  for (int l = 0; l < cfg.sent_rnn_layers; ++l) {
    const auto prefix = "sent_lstm." + std::to_string(l);
    L.sent_fwd.push_back(lstm(prefix + ".fwd", in, cfg.dim_sent_rnn));
    L.sent_bwd.push_back(lstm(prefix + ".bwd", in, cfg.dim_sent_rnn));
    in = 2 * cfg.dim_sent_rnn;
  }
  const Eigen::Index enc = 2 * cfg.dim_sent_rnn;
  const Eigen::Index rep = 4 * enc;
  L.h_nil = ps.add("h_nil", enc, 1);
  L.ff_s = ff("struct", rep, 1);
  L.struct_w1_focus = ps.add("struct.w1_focus", cfg.dim_hidden, rep);
  L.ff_l = ff("label", rep, static_cast<Eigen::Index>(inv.nonterminals.size() + 1));
  L.tag_w = ps.add("tag.w", static_cast<Eigen::Index>(inv.pos.size()), enc);
  L.tag_b = ps.add("tag.b", static_cast<Eigen::Index>(inv.pos.size()), 1);
  return L;
}

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

template <class T>
void initialize(nn::ParamSet<T>& ps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (nn::ParamId id = 0; id < ps.size(); ++id) {
    const auto& name = ps.name(id);
    auto& m = ps.value(id);
    const auto last = name.substr(name.rfind('.') + 1);
    if (ends_with(name, "_emb")) {
      std::uniform_real_distribution<double> u(-0.1, 0.1);
      for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = static_cast<T>(u(rng));
    } else if (last.front() == 'b' && name != "h_nil") {
      m.setZero();
      if (name.find("lstm") != std::string::npos) {
        // forget gate
        const auto h = m.rows() / 4;
        m.middleRows(h, h).setOnes();
      }
    } else {
      // the split first layer of the structural scorer is one layer of twice the width
      double fan_in = static_cast<double>(m.cols());
      if (name == "struct.w1" || name == "struct.w1_focus") fan_in *= 2;
      const double a = std::sqrt(6.0 / (fan_in + static_cast<double>(m.rows())));
      std::uniform_real_distribution<double> u(-a, a);
      for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = static_cast<T>(u(rng));
    }
  }
}

template <class T>
void check_shapes(const nn::ParamSet<T>& expected, const nn::ParamSet<T>& got, const char* what) {
  if (expected.size() != got.size())
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(expected.size()) +
                                " parameters, got " + std::to_string(got.size()));
  for (nn::ParamId id = 0; id < expected.size(); ++id) {
    const auto& e = expected.value(id);
    const auto& g = got.value(id);
    if (expected.name(id) != got.name(id) || e.rows() != g.rows() || e.cols() != g.cols())
      throw std::invalid_argument(std::string(what) + ": parameter " + std::to_string(id) + " is " +
                                  got.name(id) + " " + std::to_string(g.rows()) + "x" +
                                  std::to_string(g.cols()) + ", expected " + expected.name(id) + " " +
                                  std::to_string(e.rows()) + "x" + std::to_string(e.cols()));
  }
}

void check_inventories(const Inventories& inv) {
  if (!inv.words.has_unknown() || !inv.chars.has_unknown())
    throw std::invalid_argument("word and character vocabularies need an unknown entry");
  if (inv.pos.size() == 0) throw std::invalid_argument("empty POS inventory");
  if (inv.nonterminals.size() == 0) throw std::invalid_argument("empty nonterminal inventory");
  if (inv.unk_replaceable.size() != inv.words.size())
    throw std::invalid_argument("rare-word flags do not match the word vocabulary");
}

}  // namespace

template <class T>
Model<T>::Model(ModelConfig config, Inventories inventories)
    : config_(std::move(config)), inventories_(std::move(inventories)) {
  config_.validate();
  mark_rare_words(inventories_, config_.unk_fraction);
  check_inventories(inventories_);
  layout_ = build_layout(config_, inventories_, weights_);
  initialize(weights_, config_.seed);
  averaged_ = weights_;
}

template <class T>
Model<T>::Model(ModelConfig config, Inventories inventories, nn::ParamSet<T> weights,
                nn::ParamSet<T> averaged)
    : config_(std::move(config)), inventories_(std::move(inventories)) {
  config_.validate();
  check_inventories(inventories_);
  nn::ParamSet<T> fresh;
  layout_ = build_layout(config_, inventories_, fresh);
  check_shapes(fresh, weights, "weights");
  check_shapes(fresh, averaged, "averaged weights");
  weights_ = std::move(weights);
  averaged_ = std::move(averaged);
}

// ------------------------------------------------------------------ network

template <class T>
Network<T>::Network(const Model<T>& model, nn::Graph<T>& graph, std::mt19937_64* train_rng)
    : model_(model), g_(graph), rng_(train_rng) {}

template <class T>
nn::Expr Network<T>::p(nn::ParamId id) {
  auto it = param_cache_.find(id);
  if (it != param_cache_.end()) return it->second;
  auto e = g_.param(id);
  param_cache_.emplace(id, e);
  return e;
}

template <class T>
nn::Matrix<T> Network<T>::dropout_mask(Eigen::Index rows, double rate) {
  nn::Matrix<T> m(rows, 1);
  std::bernoulli_distribution keep(1.0 - rate);
  const T scale = static_cast<T>(1.0 / (1.0 - rate));
  for (Eigen::Index k = 0; k < rows; ++k) m(k, 0) = keep(*rng_) ? scale : T(0);
  return m;
}

template <class T>
nn::Expr Network<T>::dropout(nn::Expr x, double rate) {
  if (!rng_ || rate <= 0.0) return x;
  return g_.scale(x, dropout_mask(g_.value(x).rows(), rate));
}

template <class T>
nn::Expr Network<T>::dropout(nn::Expr x, const nn::Matrix<T>& mask) {
  if (mask.size() == 0) return x;
  return g_.scale(x, mask);
}

template <class T>
std::vector<nn::Expr> Network<T>::lstm(const LstmIds& ids, std::span<const nn::Expr> inputs,
                                       bool reverse) {
  const auto n = inputs.size();
  const Eigen::Index h = g_.params().value(ids.wh).cols();
  std::vector<nn::Expr> out(n);
  nn::Expr state, cell;
  for (std::size_t k = 0; k < n; ++k) {
    const auto at = reverse ? n - 1 - k : k;
    auto gates = g_.add(g_.matmul(p(ids.wx), inputs[at]), p(ids.b));
    if (k > 0) gates = g_.add(gates, g_.matmul(p(ids.wh), state));
    auto in = g_.sigmoid(g_.rows(gates, 0, h));
    auto update = g_.tanh(g_.rows(gates, 3 * h, h));
    if (k == 0) {
      cell = g_.cmul(in, update);
    } else {
      auto forget = g_.sigmoid(g_.rows(gates, h, h));
      cell = g_.add(g_.cmul(forget, cell), g_.cmul(in, update));
    }
    auto outg = g_.sigmoid(g_.rows(gates, 2 * h, h));
    state = g_.cmul(outg, g_.tanh(cell));
    out[at] = state;
  }
  return out;
}

template <class T>
void Network<T>::encode(std::span<const std::string> tokens) {
  if (tokens.empty()) throw std::invalid_argument("cannot encode an empty sentence");
  const auto& L = model_.layout();
  const auto& inv = model_.inventories();
  const auto& cfg = model_.config();
  std::vector<nn::Expr> inputs;
  inputs.reserve(tokens.size());
  for (const auto& tok : tokens) {
    if (tok.empty()) throw std::invalid_argument("empty token");
    auto w = inv.words.lookup(tok);
    if (rng_ && inv.unk_replaceable[w] && std::bernoulli_distribution(cfg.unk_prob)(*rng_)) w = 0;
    std::vector<nn::Expr> chars;
    for (const auto& ch : utf8_chars(tok))
      chars.push_back(g_.lookup(L.char_emb, static_cast<Eigen::Index>(inv.chars.lookup(ch))));
    auto fwd = lstm(L.char_fwd, chars, false);
    auto bwd = lstm(L.char_bwd, chars, true);
    const std::array<nn::Expr, 3> parts{fwd.back(), bwd.front(),
                                        g_.lookup(L.word_emb, static_cast<Eigen::Index>(w))};
    inputs.push_back(g_.concat(parts));
  }
  for (std::size_t l = 0; l < L.sent_fwd.size(); ++l) {
    auto fwd = lstm(L.sent_fwd[l], inputs, false);
    auto bwd = lstm(L.sent_bwd[l], inputs, true);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const std::array<nn::Expr, 2> both{fwd[i], bwd[i]};
      inputs[i] = g_.concat(both);
    }
    if (l == 0) h1_ = inputs;
  }
  h2_ = std::move(inputs);
  rep_cache_.clear();
}

template <class T>
void Network<T>::set_encoding(const std::vector<nn::Vector<T>>& h1, const std::vector<nn::Vector<T>>& h2) {
  if (h1.empty() || h1.size() != h2.size()) throw std::invalid_argument("encoding layers differ in length");
  h1_.clear();
  h2_.clear();
  for (const auto& v : h1) h1_.push_back(g_.constant(v));
  for (const auto& v : h2) h2_.push_back(g_.constant(v));
  rep_cache_.clear();
}

template <class T>
nn::Expr Network<T>::set_representation(const IndexSet& s) {
  if (s.empty()) throw std::invalid_argument("representation of an empty set");
  if (s.max() >= size()) throw std::out_of_range("set " + s.to_string() + " exceeds the sentence");
  const auto b = boundary_tuple(s);
  const std::array<Position, 4> key{b.left, b.right, b.gap_left.value_or(-1), b.gap_right.value_or(-1)};
  if (auto it = rep_cache_.find(key); it != rep_cache_.end()) return it->second;
  const auto nil = p(model_.layout().h_nil);
  const std::array<nn::Expr, 4> parts{h2_[b.left], h2_[b.right], b.gap_left ? h2_[*b.gap_left] : nil,
                                      b.gap_right ? h2_[*b.gap_right] : nil};
  auto r = g_.concat(parts);
  rep_cache_.emplace(key, r);
  return r;
}

template <class T>
nn::Expr Network<T>::feed_forward(const FeedForwardIds& ids, nn::Expr first_layer) {
  auto h = g_.tanh(g_.add(first_layer, p(ids.b1)));
  h = g_.tanh(g_.add(g_.matmul(p(ids.w2), h), p(ids.b2)));
  return g_.add(g_.matmul(p(ids.w3), h), p(ids.b3));
}

template <class T>
nn::Expr Network<T>::structural_logits(const Configuration& c, std::vector<Action>& actions) {
  if (is_goal(c)) throw TransitionError("no action at a goal configuration");
  if (!c.structural_step()) throw TransitionError("structural scores requested at a labelling step");
  actions.clear();
  if (!c.focus()) {
    actions.push_back(Action::shift());
    return g_.constant(nn::Matrix<T>::Zero(1, 1));
  }
  const auto& L = model_.layout();
  const auto rep = static_cast<Eigen::Index>(4 * model_.encoding_dim());
  // one mask per prediction, shared by all columns
  nn::Matrix<T> item_mask, focus_mask;
  if (rng_ && model_.config().dropout_parser > 0.0) {
    auto m = dropout_mask(2 * rep, model_.config().dropout_parser);
    item_mask = m.topRows(rep);
    focus_mask = m.bottomRows(rep);
  }
  auto focus = g_.matmul(p(L.struct_w1_focus), dropout(set_representation(*c.focus()), focus_mask));
  std::vector<nn::Expr> scores;
  auto column = [&](const IndexSet& s) {
    auto item = g_.matmul(p(L.ff_s.w1), dropout(set_representation(s), item_mask));
    scores.push_back(feed_forward(L.ff_s, g_.add(item, focus)));
  };
  for (const auto& [key, s] : c.memory()) {
    column(s);
    actions.push_back(Action::combine(key));
  }
  if (c.buffer_index() < c.sentence_length()) {
    column(IndexSet::singleton(c.buffer_index()));
    actions.push_back(Action::shift());
  }
  return g_.concat(scores);
}

template <class T>
nn::Expr Network<T>::label_logits(const IndexSet& focus) {
  const auto& L = model_.layout();
  auto r = dropout(set_representation(focus), model_.config().dropout_parser);
  return feed_forward(L.ff_l, g_.matmul(p(L.ff_l.w1), r));
}

template <class T>
nn::Expr Network<T>::tag_logits(Position i) {
  const auto& L = model_.layout();
  auto x = dropout(h1(i), model_.config().dropout_tagger);
  return g_.add(g_.matmul(p(L.tag_w), x), p(L.tag_b));
}

// ---------------------------------------------------------------- inference

namespace {

template <class T>
std::vector<double> to_doubles(const nn::Matrix<T>& m) {
  std::vector<double> out(static_cast<std::size_t>(m.size()));
  for (Eigen::Index k = 0; k < m.size(); ++k) out[k] = static_cast<double>(m.data()[k]);
  return out;
}

std::size_t argmax(const std::vector<double>& v, const std::vector<bool>& allowed = {}) {
  std::size_t best = v.size();
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!allowed.empty() && !allowed[k]) continue;
    if (best == v.size() || v[k] > v[best]) best = k;
  }
  if (best == v.size()) throw std::logic_error("argmax over no entries");
  return best;
}

std::vector<bool> label_mask(const Configuration& c, std::size_t outputs) {
  std::vector<bool> allowed(outputs, true);
  if (c.label_forced()) allowed.back() = false;
  return allowed;
}

}  // namespace

template <class T>
SentenceEncoding<T> encode(const Model<T>& model, std::span<const std::string> tokens, Weights which) {
  nn::Graph<T> g(model.params(which));
  Network<T> net(model, g);
  net.encode(tokens);
  SentenceEncoding<T> enc;
  for (Position i = 0; i < net.size(); ++i) {
    enc.h1.push_back(g.value(net.h1(i)));
    enc.h2.push_back(g.value(net.h2(i)));
  }
  return enc;
}

template <class T>
nn::Vector<T> set_representation(const IndexSet& s, const SentenceEncoding<T>& enc, const Model<T>& model,
                                 Weights which) {
  nn::Graph<T> g(model.params(which));
  Network<T> net(model, g);
  net.set_encoding(enc.h1, enc.h2);
  return g.value(net.set_representation(s));
}

template <class T>
ActionDistribution structural_distribution(const Configuration& c, const SentenceEncoding<T>& enc,
                                           const Model<T>& model, Weights which) {
  nn::Graph<T> g(model.params(which));
  Network<T> net(model, g);
  net.set_encoding(enc.h1, enc.h2);
  ActionDistribution d;
  auto logits = net.structural_logits(c, d.actions);
  d.logits = to_doubles(g.value(logits));
  d.probs = nn::softmax<T>(g.value(logits));
  return d;
}

template <class T>
ActionDistribution label_distribution(const Configuration& c, const SentenceEncoding<T>& enc,
                                      const Model<T>& model, Weights which) {
  if (c.structural_step()) throw TransitionError("label scores requested at a structural step");
  nn::Graph<T> g(model.params(which));
  Network<T> net(model, g);
  net.set_encoding(enc.h1, enc.h2);
  auto logits = net.label_logits(*c.focus());
  ActionDistribution d;
  for (const auto& nt : model.inventories().nonterminals.symbols()) d.actions.push_back(Action::labelled(nt));
  d.actions.push_back(Action::no_label());
  d.logits = to_doubles(g.value(logits));
  d.probs = nn::softmax<T>(g.value(logits), label_mask(c, model.label_outputs()));
  return d;
}

template <class T>
std::vector<double> tag_distribution(const SentenceEncoding<T>& enc, const Model<T>& model, Position position,
                                     Weights which) {
  nn::Graph<T> g(model.params(which));
  Network<T> net(model, g);
  net.set_encoding(enc.h1, enc.h2);
  return nn::softmax<T>(g.value(net.tag_logits(position)));
}

template <class T>
DiscTree greedy_parse(std::span<const std::string> tokens, const Model<T>& model, Weights which) {
  if (tokens.empty()) throw std::invalid_argument("cannot parse an empty sentence");
  nn::Graph<T> g(model.params(which));
  Network<T> net(model, g);
  net.encode(tokens);
  const auto& nts = model.inventories().nonterminals;
  auto c = initial(static_cast<Position>(tokens.size()));
  std::vector<Action> actions;
  while (!is_goal(c)) {
    if (c.structural_step()) {
      auto logits = to_doubles(g.value(net.structural_logits(c, actions)));
      c = apply(c, actions[argmax(logits)]);
    } else {
      auto logits = to_doubles(g.value(net.label_logits(*c.focus())));
      const auto k = argmax(logits, label_mask(c, model.label_outputs()));
      c = apply(c, k == nts.size() ? Action::no_label() : Action::labelled(nts.symbol(k)));
    }
  }
  DiscTree t;
  t.tokens.assign(tokens.begin(), tokens.end());
  const auto& pos = model.inventories().pos;
  for (Position i = 0; i < net.size(); ++i)
    t.pos_tags.push_back(pos.symbol(argmax(to_doubles(g.value(net.tag_logits(i))))));
  t.constituents = c.constituents();
  t.sort_constituents();
  const auto whole = IndexSet::range(0, net.size() - 1);
  for (const auto& con : t.constituents)
    if (con.yield == whole && con.label == kSyntheticRoot) t.synthetic_root = true;
  return t;
}

// ------------------------------------------------------------ instantiation

template ModelLayout build_layout<float>(const ModelConfig&, const Inventories&, nn::ParamSet<float>&);
template ModelLayout build_layout<double>(const ModelConfig&, const Inventories&, nn::ParamSet<double>&);
template class Model<float>;
template class Model<double>;
template class Network<float>;
template class Network<double>;

#define DSETP_INSTANTIATE(T)                                                                             \
  template SentenceEncoding<T> encode<T>(const Model<T>&, std::span<const std::string>, Weights);        \
  template nn::Vector<T> set_representation<T>(const IndexSet&, const SentenceEncoding<T>&,             \
                                               const Model<T>&, Weights);                               \
  template ActionDistribution structural_distribution<T>(const Configuration&, const SentenceEncoding<T>&, \
                                                         const Model<T>&, Weights);                     \
  template ActionDistribution label_distribution<T>(const Configuration&, const SentenceEncoding<T>&,    \
                                                    const Model<T>&, Weights);                          \
  template std::vector<double> tag_distribution<T>(const SentenceEncoding<T>&, const Model<T>&, Position, \
                                                   Weights);                                            \
  template DiscTree greedy_parse<T>(std::span<const std::string>, const Model<T>&, Weights);

DSETP_INSTANTIATE(float)
DSETP_INSTANTIATE(double)

#undef DSETP_INSTANTIATE

}  // namespace dsetp
