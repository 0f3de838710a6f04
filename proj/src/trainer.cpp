#include "dsetp/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/random/normal_distribution.hpp>

#include "dsetp/oracle.hpp"

namespace dsetp {

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return std::mt19937_64(seq);
}

template <class T>
Eigen::Index label_index(const Model<T>& model, const Action& a) {
  const auto& nts = model.inventories().nonterminals;
  if (a.kind == ActionKind::kNoLabel) return static_cast<Eigen::Index>(nts.size());
  auto id = nts.find(a.label);
  if (!id) throw std::invalid_argument("label " + a.label + " is not in the model inventory");
  return static_cast<Eigen::Index>(*id);
}

std::vector<bool> label_mask(const Configuration& c, std::size_t outputs) {
  std::vector<bool> allowed(outputs, true);
  if (c.label_forced()) allowed.back() = false;
  return allowed;
}

Eigen::Index position_of(const std::vector<Action>& actions, const Action& a) {
  auto it = std::find(actions.begin(), actions.end(), a);
  if (it == actions.end()) throw std::logic_error("target action " + a.to_string() + " has no score");
  return it - actions.begin();
}

template <class T>
nn::Expr tag_loss(Network<T>& net, const Model<T>& model, const DiscTree& tree) {
  std::vector<nn::Expr> losses;
  const auto& pos = model.inventories().pos;
  for (Position i = 0; i < tree.size(); ++i)
    losses.push_back(net.graph().nll(net.tag_logits(i), static_cast<Eigen::Index>(pos.lookup(tree.pos_tags[i]))));
  return net.graph().sum(losses);
}

template <class T>
nn::Expr static_parse_loss(Network<T>& net, const Model<T>& model, const std::vector<Action>& derivation,
                           Position n) {
  auto& g = net.graph();
  std::vector<nn::Expr> losses;
  std::vector<Action> actions;
  auto c = initial(n);
  for (const auto& a : derivation) {
    if (c.structural_step()) {
      auto logits = net.structural_logits(c, actions);
      losses.push_back(g.nll(logits, position_of(actions, a)));
    } else {
      auto logits = net.label_logits(*c.focus());
      losses.push_back(g.nll(logits, label_index(model, a), label_mask(c, model.label_outputs())));
    }
    c = apply(c, a);
  }
  return g.sum(losses);
}

}  // namespace

template <class T>
T sentence_loss(const Model<T>& model, const DiscTree& tree, std::vector<nn::Matrix<T>>* gradients) {
  nn::Graph<T> g(model.weights());
  Network<T> net(model, g);
  net.encode(tree.tokens);
  const std::array<nn::Expr, 2> parts{tag_loss(net, model, tree),
                                      static_parse_loss(net, model, static_oracle(tree), tree.size())};
  auto loss = g.sum(parts);
  if (gradients) {
    g.backward(loss);
    *gradients = g.param_gradients();
  }
  return g.value(loss)(0, 0);
}

template float sentence_loss<float>(const Model<float>&, const DiscTree&, std::vector<nn::Matrix<float>>*);
template double sentence_loss<double>(const Model<double>&, const DiscTree&, std::vector<nn::Matrix<double>>*);

// ------------------------------------------------------------------ trainer

Trainer::Trainer(Model<float>& model, std::vector<DiscTree> trees, double explore_prob)
    : model_(model),
      trees_(std::move(trees)),
      explore_prob_(explore_prob),
      order_rng_(stream(model.config().seed, 1)),
      dropout_rng_(stream(model.config().seed, 2)),
      noise_rng_(stream(model.config().seed, 3)),
      explore_rng_(stream(model.config().seed, 4)) {
  if (trees_.empty()) throw std::invalid_argument("cannot train on an empty corpus");
  if (!(explore_prob >= 0.0 && explore_prob <= 1.0))
    throw std::invalid_argument("exploration probability must be in [0,1]");
  const auto& inv = model.inventories();
  for (std::size_t k = 0; k < trees_.size(); ++k) {
    const auto& t = trees_[k];
    try {
      derivations_.push_back(static_oracle(t));
      for (const auto& c : t.constituents) label_index(model, Action::labelled(c.label));
      for (const auto& tag : t.pos_tags)
        if (!inv.pos.find(tag)) throw std::invalid_argument("tag " + tag + " is not in the model inventory");
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("training tree " + std::to_string(k + 1) + ": " + e.what());
    }
  }
}

double Trainer::learning_rate(std::uint64_t step) const {
  const auto& cfg = model_.config();
  double lr = cfg.learning_rate / (1.0 + static_cast<double>(step) * cfg.decay);
  if (step < static_cast<std::uint64_t>(cfg.warmup_steps))
    lr *= static_cast<double>(step + 1) / static_cast<double>(cfg.warmup_steps);
  return lr;
}

void Trainer::update(const std::vector<nn::Matrix<float>>& gradients) {
  auto& weights = model_.weights();
  auto& average = model_.averaged();
  if (gradients.size() != weights.size()) throw std::invalid_argument("gradient count mismatch");
  const auto& cfg = model_.config();
  const std::uint64_t t = updates_;

  double norm2 = 0.0;
  for (const auto& g : gradients)
    if (g.size() > 0) norm2 += g.cast<double>().squaredNorm();
  const double norm = std::sqrt(norm2);
  const double clip = norm > cfg.grad_clip_norm ? cfg.grad_clip_norm / norm : 1.0;
  const double sigma = cfg.grad_noise ? std::sqrt(0.01 / std::pow(1.0 + static_cast<double>(t), 0.55)) : 0.0;
  const double lr = learning_rate(t);

  // ziggurat sampler; noise touches every scalar on every update
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  const float inv_k = 1.0f / static_cast<float>(t + 1);
  for (nn::ParamId id = 0; id < weights.size(); ++id) {
    auto& w = weights.value(id);
    const auto& g = gradients[id];
    if (g.size() > 0) {
      if (g.rows() != w.rows() || g.cols() != w.cols()) throw std::invalid_argument("gradient shape mismatch");
      w -= static_cast<float>(lr * clip) * g;
    }
    if (sigma > 0.0)
      for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] -= static_cast<float>(lr * sigma * normal(noise_rng_));
    auto& a = average.value(id);
    a += (w - a) * inv_k;
  }
  ++updates_;
}

double Trainer::tag_step(const DiscTree& tree) {
  nn::Graph<float> g(model_.weights());
  Network<float> net(model_, g, &dropout_rng_);
  net.encode(tree.tokens);
  auto loss = tag_loss(net, model_, tree);
  g.backward(loss);
  const double value = g.value(loss)(0, 0);
  update(g.param_gradients());
  return value;
}

double Trainer::parse_step(std::size_t index, bool explore) {
  const auto& tree = trees_[index];
  nn::Graph<float> g(model_.weights());
  Network<float> net(model_, g, &dropout_rng_);
  net.encode(tree.tokens);
  nn::Expr loss;
  if (!explore) {
    loss = static_parse_loss(net, model_, derivations_[index], tree.size());
  } else {
    // follow the model's own samples, supervised by the dynamic oracle
    std::vector<nn::Expr> losses;
    std::vector<Action> actions;
    const auto& nts = model_.inventories().nonterminals;
    auto c = initial(tree.size());
    while (!is_goal(c)) {
      const auto target = dynamic_oracle(c, tree).canonical;
      Action sampled;
      if (c.structural_step()) {
        auto logits = net.structural_logits(c, actions);
        auto probs = nn::softmax<float>(g.value(logits));
        sampled = actions[std::discrete_distribution<std::size_t>(probs.begin(), probs.end())(explore_rng_)];
        losses.push_back(g.nll(logits, position_of(actions, target)));
      } else {
        auto logits = net.label_logits(*c.focus());
        auto mask = label_mask(c, model_.label_outputs());
        auto probs = nn::softmax<float>(g.value(logits), mask);
        const auto k = std::discrete_distribution<std::size_t>(probs.begin(), probs.end())(explore_rng_);
        sampled = k == nts.size() ? Action::no_label() : Action::labelled(nts.symbol(k));
        losses.push_back(g.nll(logits, label_index(model_, target), mask));
      }
      c = apply(c, sampled);
    }
    loss = g.sum(losses);
  }
  g.backward(loss);
  const double value = g.value(loss)(0, 0);
  update(g.param_gradients());
  return value;
}

EpochStats Trainer::run_epoch() {
  std::vector<std::size_t> order(trees_.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), order_rng_);
  std::vector<bool> explore(trees_.size());
  std::bernoulli_distribution pick(explore_prob_);
  for (auto k : order) explore[k] = pick(explore_rng_);

  EpochStats stats;
  stats.epoch = ++epochs_;
  for (auto k : order) {
    stats.tag_loss += tag_step(trees_[k]);
    stats.parse_loss += parse_step(k, explore[k]);
    if (explore[k]) ++stats.explored;
  }
  stats.tag_loss /= static_cast<double>(trees_.size());
  stats.parse_loss /= static_cast<double>(trees_.size());
  return stats;
}

namespace {

Model<float> train(const Corpus& corpus, const ModelConfig& config, double p, const EpochCallback& on_epoch) {
  if (corpus.trees.empty()) throw std::invalid_argument("cannot train on an empty corpus");
  Model<float> model(config, corpus.inventories);
  Trainer trainer(model, corpus.trees, p);
  for (int e = 0; e < config.epochs; ++e) {
    auto stats = trainer.run_epoch();
    if (on_epoch) on_epoch(stats);
  }
  return model;
}

}  // namespace

Model<float> train_static(const Corpus& corpus, const ModelConfig& config, const EpochCallback& on_epoch) {
  return train(corpus, config, 0.0, on_epoch);
}

Model<float> train_dynamic(const Corpus& corpus, const ModelConfig& config, const EpochCallback& on_epoch) {
  return train(corpus, config, config.explore_prob, on_epoch);
}

}  // namespace dsetp
