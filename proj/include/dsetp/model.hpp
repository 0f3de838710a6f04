#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dsetp/graph.hpp"
#include "dsetp/transition.hpp"
#include "dsetp/treebank.hpp"

namespace dsetp {

// Defaults are the full-size settings; desk() shrinks the dimensions for
// quick experiments and tests.
struct ModelConfig {
  int dim_word_emb = 32;
  int dim_char_emb = 100;
  int dim_char_rnn = 50;   // per direction
  int dim_sent_rnn = 200;  // per direction
  int dim_hidden = 200;
  int sent_rnn_layers = 2;

  double learning_rate = 0.01;
  double decay = 1e-7;
  double dropout_tagger = 0.5;
  double dropout_parser = 0.2;
  int epochs = 100;
  double grad_clip_norm = 100.0;
  double explore_prob = 0.15;
  double unk_prob = 0.3;
  double unk_fraction = 2.0 / 3.0;
  int warmup_steps = 1000;
  bool grad_noise = true;
  std::uint64_t seed = 1;

  static ModelConfig desk();

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  // Sets a field from its name and textual value; throws
  // std::invalid_argument on an unknown key or a malformed value.
  void set(const std::string& key, const std::string& value);
  std::map<std::string, std::string> fields() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

enum class Weights { kCurrent, kAveraged };

struct LstmIds {
  nn::ParamId wx = 0, wh = 0, b = 0;
  friend bool operator==(const LstmIds&, const LstmIds&) = default;
};

struct FeedForwardIds {
  nn::ParamId w1 = 0, b1 = 0, w2 = 0, b2 = 0, w3 = 0, b3 = 0;
  friend bool operator==(const FeedForwardIds&, const FeedForwardIds&) = default;
};

// Parameter ids, fixed by the config and inventories.
struct ModelLayout {
  nn::ParamId word_emb = 0;
  nn::ParamId char_emb = 0;
  LstmIds char_fwd, char_bwd;
  std::vector<LstmIds> sent_fwd, sent_bwd;
  nn::ParamId h_nil = 0;
  // Structural scorer; its first layer is split into the memory-item half
  // (ff_s.w1) and the focus half (struct_w1_focus).
  FeedForwardIds ff_s;
  nn::ParamId struct_w1_focus = 0;
  FeedForwardIds ff_l;
  nn::ParamId tag_w = 0, tag_b = 0;
  friend bool operator==(const ModelLayout&, const ModelLayout&) = default;
};

// Scorer parameters plus their running average. Scalar type float for
// training and parsing; double serves gradient checks.
template <class T>
class Model {
 public:
  // Random initialization from config.seed. Recomputes which words may be
  // replaced by the unknown word from config.unk_fraction.
  Model(ModelConfig config, Inventories inventories);
  // Takes existing weights; throws std::invalid_argument when names or shapes
  // do not match the layout.
  Model(ModelConfig config, Inventories inventories, nn::ParamSet<T> weights,
        nn::ParamSet<T> averaged);

  const ModelConfig& config() const noexcept { return config_; }
  const Inventories& inventories() const noexcept { return inventories_; }
  const ModelLayout& layout() const noexcept { return layout_; }

  nn::ParamSet<T>& weights() noexcept { return weights_; }
  const nn::ParamSet<T>& weights() const noexcept { return weights_; }
  nn::ParamSet<T>& averaged() noexcept { return averaged_; }
  const nn::ParamSet<T>& averaged() const noexcept { return averaged_; }
  const nn::ParamSet<T>& params(Weights w) const noexcept {
    return w == Weights::kAveraged ? averaged_ : weights_;
  }

  std::size_t label_outputs() const noexcept { return inventories_.nonterminals.size() + 1; }
  std::size_t encoding_dim() const noexcept { return 2 * static_cast<std::size_t>(config_.dim_sent_rnn); }

  friend bool operator==(const Model&, const Model&) = default;

 private:
  ModelConfig config_;
  Inventories inventories_;
  ModelLayout layout_;
  nn::ParamSet<T> weights_;
  nn::ParamSet<T> averaged_;
};

// Builds the parameter layout (zero-filled) for a config and inventories.
template <class T>
ModelLayout build_layout(const ModelConfig& config, const Inventories& inv, nn::ParamSet<T>& params);

// Forward computation for one sentence on a graph. Given an engine the pass
// is in training mode: rare words may be swapped for the unknown word and
// every prediction draws its own dropout mask.
template <class T>
class Network {
 public:
  Network(const Model<T>& model, nn::Graph<T>& graph, std::mt19937_64* train_rng = nullptr);

  void encode(std::span<const std::string> tokens);
  // Uses precomputed token vectors instead of running the encoder.
  void set_encoding(const std::vector<nn::Vector<T>>& h1, const std::vector<nn::Vector<T>>& h2);

  Position size() const noexcept { return static_cast<Position>(h2_.size()); }
  nn::Expr h1(Position i) const { return h1_.at(i); }
  nn::Expr h2(Position i) const { return h2_.at(i); }

  nn::Expr set_representation(const IndexSet& s);
  // One logit per legal structural action, in the order written to
  // `actions`: memory items by ascending left-index, then SHIFT if i < n.
  // Throws TransitionError at a goal or labelling step.
  nn::Expr structural_logits(const Configuration& c, std::vector<Action>& actions);
  // |N| + 1 logits; the last one is NO-LABEL.
  nn::Expr label_logits(const IndexSet& focus);
  nn::Expr tag_logits(Position i);

  nn::Graph<T>& graph() noexcept { return g_; }

 private:
  nn::Expr p(nn::ParamId id);
  nn::Expr dropout(nn::Expr x, double rate);
  nn::Expr dropout(nn::Expr x, const nn::Matrix<T>& mask);
  nn::Matrix<T> dropout_mask(Eigen::Index rows, double rate);
  std::vector<nn::Expr> lstm(const LstmIds& ids, std::span<const nn::Expr> inputs, bool reverse);
  nn::Expr feed_forward(const FeedForwardIds& ids, nn::Expr first_layer);

  const Model<T>& model_;
  nn::Graph<T>& g_;
  std::mt19937_64* rng_;
  std::vector<nn::Expr> h1_, h2_;
  std::map<nn::ParamId, nn::Expr> param_cache_;
  std::map<std::array<Position, 4>, nn::Expr> rep_cache_;
};

template <class T>
struct SentenceEncoding {
  std::vector<nn::Vector<T>> h1;
  std::vector<nn::Vector<T>> h2;
};

// Probabilities over a fixed action list; masked entries have probability 0.
struct ActionDistribution {
  std::vector<Action> actions;
  std::vector<double> logits;
  std::vector<double> probs;
};

// Inference-mode computations.
template <class T>
SentenceEncoding<T> encode(const Model<T>& model, std::span<const std::string> tokens,
                           Weights which = Weights::kAveraged);

template <class T>
nn::Vector<T> set_representation(const IndexSet& s, const SentenceEncoding<T>& enc,
                                 const Model<T>& model, Weights which = Weights::kAveraged);

template <class T>
ActionDistribution structural_distribution(const Configuration& c, const SentenceEncoding<T>& enc,
                                           const Model<T>& model, Weights which = Weights::kAveraged);

// Labels follow the nonterminal inventory, then NO-LABEL, which is masked at
// the forced final step. Throws TransitionError at a structural step.
template <class T>
ActionDistribution label_distribution(const Configuration& c, const SentenceEncoding<T>& enc,
                                      const Model<T>& model, Weights which = Weights::kAveraged);

// One probability per POS tag in inventory order.
template <class T>
std::vector<double> tag_distribution(const SentenceEncoding<T>& enc, const Model<T>& model,
                                     Position position, Weights which = Weights::kAveraged);

// Greedy decoding; returns a collapsed tree with predicted tags. Throws
// std::invalid_argument on an empty sentence.
template <class T>
DiscTree greedy_parse(std::span<const std::string> tokens, const Model<T>& model,
                      Weights which = Weights::kAveraged);

extern template class Model<float>;
extern template class Model<double>;
extern template class Network<float>;
extern template class Network<double>;

}  // namespace dsetp
