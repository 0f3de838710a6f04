#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "dsetp/trainer.hpp"

namespace dsetp::testing {

struct GradientCheck {
  int checked = 0;
  double worst = 0.0;
  // "name[k] analytic a numeric b" for entries above the tolerance
  std::vector<std::string> failures;
  // parameters that got no gradient at all
  std::vector<std::string> untouched;
};

// Three tokens, one discontinuous constituent, a repeated word.
inline DiscTree gradient_tree() {
  DiscTree t;
  t.tokens = {"ab", "c", "ab"};
  t.pos_tags = {"X", "Y", "X"};
  t.constituents = {{"S", {0, 1, 2}}, {"D", {0, 2}}, {"A", {1}}};
  t.sort_constituents();
  return t;
}

// Central differences on up to `per_param` random non-zero gradient entries
// of every parameter of a small double-precision model. The relative error
// uses a floor of 1e-4 on the denominator.
inline GradientCheck check_gradients(int per_param = 8, double tolerance = 1e-4) {
  const auto t = gradient_tree();
  auto corpus = build_vocabularies({t});
  auto cfg = ModelConfig::desk();
  cfg.seed = 17;
  Model<double> m(cfg, corpus.inventories);
  // non-zero biases so every path is exercised
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (nn::ParamId id = 0; id < m.weights().size(); ++id)
    for (Eigen::Index k = 0; k < m.weights().value(id).size(); ++k) m.weights().value(id).data()[k] += u(rng) * 0.1;

  std::vector<nn::Matrix<double>> grads;
  sentence_loss(m, t, &grads);

  GradientCheck r;
  for (nn::ParamId id = 0; id < m.weights().size(); ++id) {
    auto& w = m.weights().value(id);
    std::vector<Eigen::Index> candidates;
    for (Eigen::Index k = 0; k < w.size(); ++k)
      if (grads[id].size() > 0 && grads[id].data()[k] != 0.0) candidates.push_back(k);
    if (candidates.empty()) {
      r.untouched.push_back(m.weights().name(id));
      continue;
    }
    std::shuffle(candidates.begin(), candidates.end(), rng);
    candidates.resize(std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(per_param)));
    for (auto k : candidates) {
      const double keep = w.data()[k];
      const double h = 1e-6;
      w.data()[k] = keep + h;
      const double up = sentence_loss(m, t);
      w.data()[k] = keep - h;
      const double down = sentence_loss(m, t);
      w.data()[k] = keep;
      const double numeric = (up - down) / (2 * h);
      const double analytic = grads[id].data()[k];
      const double rel = std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-4});
      r.worst = std::max(r.worst, rel);
      if (!(rel <= tolerance))
        r.failures.push_back(m.weights().name(id) + "[" + std::to_string(k) + "] analytic " +
                             std::to_string(analytic) + " numeric " + std::to_string(numeric));
      ++r.checked;
    }
  }
  return r;
}

}  // namespace dsetp::testing
