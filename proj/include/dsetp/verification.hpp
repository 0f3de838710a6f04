#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dsetp/oracle.hpp"

namespace dsetp {

// Oracle implementations under test; defaults are the library ones.
struct OracleSuite {
  std::function<std::vector<Action>(const DiscTree&)> static_oracle = dsetp::static_oracle;
  std::function<OracleAnswer(const Configuration&, const DiscTree&)> dynamic_oracle =
      dsetp::dynamic_oracle;
};

struct OracleCheckOptions {
  // Exhaustive checks only run for n up to this bound.
  Position exhaustive_max = 6;
  // Random wrong-prefix walks per tree.
  int perturb = 2;
  // Per-step probability of a random action during a perturbed walk.
  double error_rate = 0.3;
};

struct TreeCheck {
  std::vector<Action> derivation;
  std::size_t configurations = 0;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

// Every configuration visited by `walks` random walks from the initial state:
// each step follows the dynamic oracle or, with probability error_rate, a
// random legal action (labels drawn from the gold labels plus one wrong one).
std::vector<Configuration> perturbed_configurations(const DiscTree& gold, int walks,
                                                    double error_rate, std::mt19937_64& rng);

// Static round trip, 4n-2 length, dynamic-oracle gold path; for small n also
// reachability vs brute force and dynamic-oracle soundness vs exhaustive F.
TreeCheck check_tree(const DiscTree& gold, const OracleCheckOptions& options,
                     std::mt19937_64& rng, const OracleSuite& oracles = {});

// Soundness of the dynamic oracle at one configuration; appends failures.
void check_soundness(const Configuration& c, const DiscTree& gold, const OracleSuite& oracles,
                     Position max_n, std::vector<std::string>& failures);

// Reachability agreement at one configuration for every gold constituent not in C.
void check_reachability(const Configuration& c, const DiscTree& gold, Position max_n,
                        std::vector<std::string>& failures);

}  // namespace dsetp
