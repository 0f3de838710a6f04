#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dsetp/index_set.hpp"
#include "dsetp/tree.hpp"

namespace dsetp {

class TransitionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by replay; step() is the 0-based index of the offending action.
class ReplayError : public TransitionError {
 public:
  ReplayError(std::size_t step, const std::string& what)
      : TransitionError("step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

enum class ActionKind : std::uint8_t { kShift, kCombine, kLabel, kNoLabel };

struct Action {
  ActionKind kind = ActionKind::kShift;
  // COMBINE: left-index of the memory item to merge with the focus.
  Position key = -1;
  // LABEL: nonterminal.
  std::string label;

  static Action shift() { return {ActionKind::kShift, -1, {}}; }
  static Action combine(Position key) { return {ActionKind::kCombine, key, {}}; }
  static Action labelled(std::string label) { return {ActionKind::kLabel, -1, std::move(label)}; }
  static Action no_label() { return {ActionKind::kNoLabel, -1, {}}; }

  bool structural() const noexcept {
    return kind == ActionKind::kShift || kind == ActionKind::kCombine;
  }

  // SHIFT, COMB-<k>, LABEL-<X>, NOLABEL
  std::string to_string() const;
  // Throws TransitionError on an unknown token.
  static Action parse(std::string_view token);

  friend bool operator==(const Action&, const Action&) = default;
  friend auto operator<=>(const Action&, const Action&) = default;
};

std::string format_derivation(std::span<const Action> actions);
std::vector<Action> parse_derivation(std::string_view text);

// Parser state (S, s_f, i, C) with step counter j. Immutable once built;
// apply() returns a new value.
class Configuration {
 public:
  // Initial configuration for a sentence of n >= 1 tokens.
  static Configuration initial(Position n);

  Position sentence_length() const noexcept { return n_; }
  // Memory S keyed by left-index.
  const std::map<Position, IndexSet>& memory() const noexcept { return memory_; }
  const std::optional<IndexSet>& focus() const noexcept { return focus_; }
  Position buffer_index() const noexcept { return next_; }
  const std::vector<Constituent>& constituents() const noexcept { return built_; }
  int step() const noexcept { return step_; }

  bool structural_step() const noexcept { return step_ % 2 == 0; }
  // Final labelling step: NO-LABEL is not allowed.
  bool label_forced() const noexcept {
    return !structural_step() && next_ == n_ && memory_.empty();
  }

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  friend Configuration apply(const Configuration& c, const Action& a);

  Position n_ = 0;
  std::map<Position, IndexSet> memory_;
  std::optional<IndexSet> focus_;
  Position next_ = 0;
  std::vector<Constituent> built_;
  int step_ = 0;
};

inline Configuration initial(Position n) { return Configuration::initial(n); }

bool is_goal(const Configuration& c);

// Reason the action is illegal, or nullopt when legal. LABEL is checked
// against the parity and forced-step rules only, not an inventory.
std::optional<std::string> illegal_reason(const Configuration& c, const Action& a);

// LABEL-X is enumerated over the given nonterminals.
std::vector<Action> legal_actions(const Configuration& c, std::span<const std::string> nonterminals);
// Structural step: SHIFT and COMBINE only. Empty at odd steps.
std::vector<Action> legal_structural_actions(const Configuration& c);

// Throws TransitionError naming the violated precondition.
Configuration apply(const Configuration& c, const Action& a);

// Fold apply from initial(n); throws ReplayError on the first illegal step.
Configuration replay(Position n, std::span<const Action> actions);

}  // namespace dsetp
