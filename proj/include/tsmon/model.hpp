#pragma once

// Domain types for typestates with internal state, mixed sessions and
// ratios, plus the pure accessors used by every other module.

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace tsmon {

/// 1-based position of a token in a `.tsp` source. Positions are not part of
/// a node's identity, so types holding a span compare without it.
struct SourceSpan {
  int line = 0;
  int column = 0;
  int length = 0;
};

//------------------------------------------------------------------------------
// Integer expressions and predicates over the internal state.

struct Expr;

struct IntLiteral {
  std::int64_t value = 0;
  bool operator==(const IntLiteral&) const = default;
};

struct NameRef {
  std::string name;
  bool operator==(const NameRef&) const = default;
};

enum class BinaryOp { Add, Sub, Mul };

struct BinaryExpr {
  BinaryOp op = BinaryOp::Add;
  std::shared_ptr<const Expr> lhs;
  std::shared_ptr<const Expr> rhs;
  bool operator==(const BinaryExpr& other) const;
};

struct Expr {
  std::variant<IntLiteral, NameRef, BinaryExpr> node;

  static Expr literal(std::int64_t v) { return Expr{IntLiteral{v}}; }
  static Expr name(std::string n) { return Expr{NameRef{std::move(n)}}; }
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);

  bool operator==(const Expr&) const = default;
};

/// Every name the expression mentions, in first-occurrence order.
std::vector<std::string> referenced_names(const Expr& e);

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

struct Comparison {
  Expr lhs;
  CmpOp op = CmpOp::Eq;
  Expr rhs;
  bool operator==(const Comparison&) const = default;
};

/// Conjunction of comparisons.
struct Predicate {
  std::vector<Comparison> conjuncts;
  bool operator==(const Predicate&) const = default;
};

struct Assignment {
  std::string target;
  Expr expr;
  bool operator==(const Assignment&) const = default;
};

//------------------------------------------------------------------------------
// Typestate structure.

struct TypeRef {
  enum class Kind { Unit, Boolean, Enum };
  Kind kind = Kind::Unit;
  std::string enum_name;

  static TypeRef unit() { return {}; }
  static TypeRef boolean() { return {Kind::Boolean, {}}; }
  static TypeRef enumeration(std::string name) { return {Kind::Enum, std::move(name)}; }

  bool operator==(const TypeRef&) const = default;
};

struct ActionSignature {
  std::string name;
  std::vector<std::string> param_types;
  TypeRef return_type;
  bool operator==(const ActionSignature&) const = default;
};

/// Expected share of a state's monitored executions; empty means ε
/// (not monitored).
class Ratio {
 public:
  Ratio() = default;
  explicit Ratio(double v);

  static Ratio epsilon() { return Ratio(); }

  bool is_epsilon() const { return !value_.has_value(); }
  double value() const { return value_.value(); }

  bool operator==(const Ratio&) const = default;

 private:
  std::optional<double> value_;
};

struct DecisionArm {
  std::string outcome;
  std::string state;
  SourceSpan span;
  bool operator==(const DecisionArm& o) const { return outcome == o.outcome && state == o.state; }
};

struct Destination {
  /// Plain destination: a state name. Decision: ordered outcome arms.
  std::variant<std::string, std::vector<DecisionArm>> target;

  static Destination plain(std::string state) { return Destination{std::move(state)}; }
  static Destination decision(std::vector<DecisionArm> arms) { return Destination{std::move(arms)}; }

  bool is_plain() const { return std::holds_alternative<std::string>(target); }
  const std::string& state() const { return std::get<std::string>(target); }
  const std::vector<DecisionArm>& arms() const { return std::get<std::vector<DecisionArm>>(target); }

  bool operator==(const Destination&) const = default;
};

enum class Side { In, Out };

struct Branch {
  ActionSignature action;
  Ratio ratio;
  std::vector<std::string> pre_assigns;
  std::vector<std::string> preds;
  Destination dest;
  std::vector<std::string> post_assigns;
  SourceSpan span;  // the action name token

  bool operator==(const Branch& o) const {
    return action == o.action && ratio == o.ratio && pre_assigns == o.pre_assigns && preds == o.preds &&
           dest == o.dest && post_assigns == o.post_assigns;
  }
};

struct StateBody {
  std::vector<Branch> in_branches;
  std::vector<Branch> out_branches;
  /// Only meaningful for mixed states: `?{..} + !{..}` rather than `!{..} + ?{..}`.
  bool inputs_first = false;

  bool is_terminal() const { return in_branches.empty() && out_branches.empty(); }
  bool is_mixed() const { return !in_branches.empty() && !out_branches.empty(); }
  bool operator==(const StateBody& o) const {
    return in_branches == o.in_branches && out_branches == o.out_branches &&
           (!is_mixed() || inputs_first == o.inputs_first);
  }
};

struct StateDecl {
  std::string name;
  StateBody body;
  SourceSpan span;
  bool operator==(const StateDecl& o) const { return name == o.name && body == o.body; }
};

/// Ordered state declarations; the first entry is the start state. Kept as a
/// sequence so a hand-built typestate can carry duplicates for the
/// well-formedness checker to report.
struct Typestate {
  std::vector<StateDecl> states;

  const StateDecl* find(std::string_view name) const;
  const std::string& start() const { return states.front().name; }
  bool operator==(const Typestate&) const = default;
};

//------------------------------------------------------------------------------
// Internal state declarations.

template <typename T>
struct Named {
  std::string name;
  T value;
  SourceSpan span;
  bool operator==(const Named& o) const { return name == o.name && value == o.value; }
};

template <typename T>
const T* find_named(const std::vector<Named<T>>& items, std::string_view name) {
  for (const auto& item : items) {
    if (item.name == name) return &item.value;
  }
  return nullptr;
}

struct InternalStateDecl {
  std::vector<Named<std::int64_t>> consts;
  std::vector<Named<Expr>> vars;  // initializers
  std::vector<Named<Assignment>> assigns;
  std::vector<Named<Predicate>> preds;
  std::vector<Named<std::vector<std::string>>> enums;

  bool operator==(const InternalStateDecl&) const = default;
};

/// One participant: a typestate plus its internal-state declarations.
struct ProtocolSpec {
  std::string name;
  Typestate typestate;
  InternalStateDecl internal;

  bool operator==(const ProtocolSpec&) const = default;
};

//------------------------------------------------------------------------------
// Accessors.

class UndefinedActionError : public std::runtime_error {
 public:
  UndefinedActionError(std::string state, std::string action);
  const std::string& state() const { return state_; }
  const std::string& action() const { return action_; }

 private:
  std::string state_;
  std::string action_;
};

class UnknownEnumError : public std::runtime_error {
 public:
  explicit UnknownEnumError(const std::string& name) : std::runtime_error("unknown enumeration '" + name + "'") {}
};

/// Label returned for plain destinations and non-enumerable types.
inline constexpr std::string_view kNoneLabel = "none";

/// Either the state's body, or the name itself when it is not declared.
using Resolved = std::variant<const StateBody*, std::string>;
Resolved resolve_state(const Typestate& t, std::string_view state);

struct ActionAttrs {
  Ratio ratio;
  const Destination* dest = nullptr;
  const std::vector<std::string>* pre_assigns = nullptr;
  const std::vector<std::string>* post_assigns = nullptr;
  const std::vector<std::string>* preds = nullptr;
};

ActionAttrs attrs(const Typestate& t, std::string_view state, std::string_view action);

/// The branch itself, along with which side of the state it sits on.
std::pair<const Branch*, Side> find_branch(const Typestate& t, std::string_view state, std::string_view action);

Ratio ratio_of(const Typestate& t, std::string_view state, std::string_view action);
const Destination& dest_of(const Typestate& t, std::string_view state, std::string_view action);
const std::vector<std::string>& pre_assigns_of(const Typestate& t, std::string_view state, std::string_view action);
const std::vector<std::string>& post_assigns_of(const Typestate& t, std::string_view state, std::string_view action);
const std::vector<std::string>& preds_of(const Typestate& t, std::string_view state, std::string_view action);

std::set<std::string> decisions_of(const Typestate& t, std::string_view state, std::string_view action);
std::set<std::string> enum_labels(const ProtocolSpec& spec, const TypeRef& type);
std::set<std::string> actions_of(const Typestate& t, std::string_view state);

/// Numeric ratios of the state's branches in declaration order (outputs
/// before inputs unless the state lists inputs first); ε entries are skipped.
std::vector<double> ratios_of(const Typestate& t, std::string_view state);

/// Branches in declaration order, tagged with their side.
std::vector<std::pair<const Branch*, Side>> branches_in_order(const StateBody& body);

}  // namespace tsmon
