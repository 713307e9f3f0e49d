#pragma once

// Execution of a typestate over its internal state. A step applies the
// branch's pre-assignments, then evaluates its predicates: when they fail the
// configuration keeps its state (non-triggering); when they hold it moves to
// the destination selected by the returned value and applies the
// post-assignments (triggering).

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tsmon/model.hpp"
#include "tsmon/wellformed.hpp"

namespace tsmon {

/// Arithmetic overflow, unknown keys or unknown names.
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No transition (state, action, value, _) exists.
class IllegalActionError : public std::runtime_error {
 public:
  IllegalActionError(std::string state, std::string action, Value value, const std::string& message)
      : std::runtime_error(message), state_(std::move(state)), action_(std::move(action)), value_(std::move(value)) {}

  const std::string& state() const { return state_; }
  const std::string& action() const { return action_; }
  const Value& value() const { return value_; }

 private:
  std::string state_;
  std::string action_;
  Value value_;
};

struct VarStore {
  std::map<std::string, std::int64_t, std::less<>> vars;
  std::map<std::string, std::int64_t, std::less<>> consts;

  /// Variable first, then constant.
  std::int64_t lookup(std::string_view name) const;

  bool operator==(const VarStore&) const = default;
};

struct TInfo {
  std::string state;
  VarStore store;
  bool operator==(const TInfo&) const = default;
};

struct StepOutcome {
  TInfo next;
  bool triggered = false;
};

std::int64_t evaluate(const Expr& e, const VarStore& store);
bool evaluate(const Predicate& p, const VarStore& store);

/// Applies the assignments named by `keys` left to right.
VarStore update(const InternalStateDecl& decl, const std::vector<std::string>& keys, VarStore store);

/// Conjunction of the named predicates over variables and constants.
bool eval(const InternalStateDecl& decl, const std::vector<std::string>& keys, const VarStore& store);

TInfo initial_config(const ProtocolSpec& spec);

/// `value` must be none for unit actions and the returned value otherwise.
StepOutcome step(const ProtocolSpec& spec, const TInfo& cfg, std::string_view action, const Value& value);

/// Whether (state, action, value, _) is a transition of the typestate.
bool has_transition(const Typestate& t, std::string_view state, std::string_view action, const Value& value);

}  // namespace tsmon
