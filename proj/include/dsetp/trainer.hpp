#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "dsetp/model.hpp"
#include "dsetp/treebank.hpp"

namespace dsetp {

struct EpochStats {
  int epoch = 0;
  // Mean per sentence.
  double tag_loss = 0.0;
  double parse_loss = 0.0;
  std::size_t explored = 0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

// Averaged SGD, one sentence per step: for every sentence a tagging update
// and then a parsing update. With explore_prob > 0 each sentence is, per
// epoch, parsed by sampling from the model and supervised by the dynamic
// oracle instead of following its static derivation.
//
// Randomness comes from separate streams seeded from the model config
// (order, dropout and unknown words, gradient noise, exploration), so
// explore_prob = 0 reproduces static training exactly.
class Trainer {
 public:
  // Throws std::invalid_argument on an empty corpus, an invalid tree or a
  // label or tag missing from the model inventories.
  Trainer(Model<float>& model, std::vector<DiscTree> trees, double explore_prob);

  EpochStats run_epoch();

  // One optimizer step from per-parameter gradients (empty = zero): decay
  // and warm-up, clipping, gradient noise, then the running average.
  void update(const std::vector<nn::Matrix<float>>& gradients);
  double learning_rate(std::uint64_t step) const;

  std::uint64_t updates() const noexcept { return updates_; }
  int epochs_done() const noexcept { return epochs_; }

 private:
  double tag_step(const DiscTree& tree);
  double parse_step(std::size_t index, bool explore);

  Model<float>& model_;
  std::vector<DiscTree> trees_;
  std::vector<std::vector<Action>> derivations_;
  double explore_prob_;
  std::mt19937_64 order_rng_;
  std::mt19937_64 dropout_rng_;
  std::mt19937_64 noise_rng_;
  std::mt19937_64 explore_rng_;
  std::uint64_t updates_ = 0;
  int epochs_ = 0;
};

Model<float> train_static(const Corpus& corpus, const ModelConfig& config,
                          const EpochCallback& on_epoch = {});
// Uses config.explore_prob.
Model<float> train_dynamic(const Corpus& corpus, const ModelConfig& config,
                           const EpochCallback& on_epoch = {});

// L_t + L_p of one sentence along its static derivation, with current
// weights, no dropout and no unknown-word replacement. Fills per-parameter
// gradients when asked (empty = not reached).
template <class T>
T sentence_loss(const Model<T>& model, const DiscTree& tree,
                std::vector<nn::Matrix<T>>* gradients = nullptr);

}  // namespace dsetp
