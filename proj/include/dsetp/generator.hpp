#pragma once

#include <random>
#include <string>
#include <vector>

#include "dsetp/tree.hpp"

namespace dsetp {

struct GeneratorOptions {
  Position min_n = 1;
  Position max_n = 12;
  // Probability that a merge picks arbitrary (possibly non-adjacent) items.
  double gap_rate = 0.3;
  // Probability of stacking an extra label on a node (unary chain).
  double unary_rate = 0.1;
};

// Random valid tree in collapsed form. Deterministic for a given engine state.
DiscTree random_tree(std::mt19937_64& rng, const GeneratorOptions& options = {});

std::vector<DiscTree> random_trees(std::size_t count, std::uint64_t seed,
                                   const GeneratorOptions& options = {});

struct ToyOptions {
  // Probability that a PP attaches against the preference of its noun.
  double attachment_noise = 0.1;
};

// Sentence from a small grammar whose tags and labels are learnable:
// transitive clauses with optional PP and adverb, particle verbs
// ("picks the ball up", a VP with a gap) and wh-questions ("what did the man
// see ?", a VP spanning the fronted object). PP attachment follows the noun
// inside the PP except with probability attachment_noise. Collapsed form.
DiscTree toy_tree(std::mt19937_64& rng, const ToyOptions& options = {});

std::vector<DiscTree> toy_trees(std::size_t count, std::uint64_t seed, const ToyOptions& options = {});

}  // namespace dsetp
