#include "dsetp/transition.hpp"

#include <charconv>
#include <sstream>

namespace dsetp {

std::string Action::to_string() const {
  switch (kind) {
    case ActionKind::kShift:
      return "SHIFT";
    case ActionKind::kCombine:
      return "COMB-" + std::to_string(key);
    case ActionKind::kLabel:
      return "LABEL-" + label;
    case ActionKind::kNoLabel:
      return "NOLABEL";
  }
  return {};
}

Action Action::parse(std::string_view token) {
  if (token == "SHIFT") return shift();
  if (token == "NOLABEL") return no_label();
  if (token.starts_with("LABEL-") && token.size() > 6)
    return labelled(std::string(token.substr(6)));
  if (token.starts_with("COMB-")) {
    Position key = -1;
    auto body = token.substr(5);
    auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), key);
    if (ec == std::errc() && ptr == body.data() + body.size() && key >= 0) return combine(key);
  }
  throw TransitionError("unknown action '" + std::string(token) + "'");
}

std::string format_derivation(std::span<const Action> actions) {
  std::string out;
  for (const auto& a : actions) {
    if (!out.empty()) out += ' ';
    out += a.to_string();
  }
  return out;
}

std::vector<Action> parse_derivation(std::string_view text) {
  std::vector<Action> out;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) out.push_back(Action::parse(tok));
  return out;
}

Configuration Configuration::initial(Position n) {
  if (n < 1) throw TransitionError("initial configuration needs n >= 1, got " + std::to_string(n));
  Configuration c;
  c.n_ = n;
  return c;
}

bool is_goal(const Configuration& c) {
  const Position n = c.sentence_length();
  return c.memory().empty() && c.focus() && c.focus()->size() == std::size_t(n) &&
         c.focus()->min() == 0 && c.buffer_index() == n && c.step() == 4 * n - 2;
}

std::optional<std::string> illegal_reason(const Configuration& c, const Action& a) {
  const bool even = c.structural_step();
  switch (a.kind) {
    case ActionKind::kShift:
      if (!even) return "SHIFT requires an even step";
      if (c.buffer_index() >= c.sentence_length()) return "SHIFT requires i < n";
      return std::nullopt;
    case ActionKind::kCombine:
      if (!even) return "COMBINE requires an even step";
      if (!c.focus()) return "COMBINE requires a focus item";
      if (!c.memory().count(a.key))
        return "COMBINE-" + std::to_string(a.key) + " requires a memory item with left-index " +
               std::to_string(a.key);
      return std::nullopt;
    case ActionKind::kLabel:
      if (even) return "LABEL requires an odd step";
      if (a.label.empty()) return "LABEL requires a nonterminal";
      return std::nullopt;
    case ActionKind::kNoLabel:
      if (even) return "NO-LABEL requires an odd step";
      if (c.label_forced()) return "NO-LABEL requires i != n or S non-empty";
      return std::nullopt;
  }
  return "unknown action";
}

std::vector<Action> legal_structural_actions(const Configuration& c) {
  std::vector<Action> out;
  if (!c.structural_step()) return out;
  if (c.buffer_index() < c.sentence_length()) out.push_back(Action::shift());
  if (c.focus())
    for (const auto& [key, set] : c.memory()) out.push_back(Action::combine(key));
  return out;
}

std::vector<Action> legal_actions(const Configuration& c, std::span<const std::string> nonterminals) {
  if (c.structural_step()) return legal_structural_actions(c);
  std::vector<Action> out;
  for (const auto& x : nonterminals) out.push_back(Action::labelled(x));
  if (!c.label_forced()) out.push_back(Action::no_label());
  return out;
}

Configuration apply(const Configuration& c, const Action& a) {
  if (auto why = illegal_reason(c, a)) throw TransitionError(*why);
  Configuration next = c;
  switch (a.kind) {
    case ActionKind::kShift:
      if (next.focus_) {
        const Position key = next.focus_->min();
        next.memory_.emplace(key, std::move(*next.focus_));
      }
      next.focus_ = IndexSet::singleton(next.next_);
      ++next.next_;
      break;
    case ActionKind::kCombine: {
      auto it = next.memory_.find(a.key);
      next.focus_ = next.focus_->union_with(it->second);
      next.memory_.erase(it);
      break;
    }
    case ActionKind::kLabel:
      next.built_.push_back({a.label, *next.focus_});
      break;
    case ActionKind::kNoLabel:
      break;
  }
  ++next.step_;
  return next;
}

Configuration replay(Position n, std::span<const Action> actions) {
  Configuration c = Configuration::initial(n);
  for (std::size_t k = 0; k < actions.size(); ++k) {
    try {
      c = apply(c, actions[k]);
    } catch (const TransitionError& e) {
      throw ReplayError(k, actions[k].to_string() + ": " + e.what());
    }
  }
  return c;
}

}  // namespace dsetp
