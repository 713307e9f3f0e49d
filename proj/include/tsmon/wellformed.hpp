#pragma once

#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "tsmon/model.hpp"

namespace tsmon {

/// Value returned by an action: none, a boolean, or an enumeration label.
class Value {
 public:
  enum class Kind { None, Boolean, Label };

  Value() = default;
  static Value none() { return Value(); }
  static Value boolean(bool b) { return Value(Kind::Boolean, b ? "true" : "false"); }
  static Value label(std::string l) { return Value(Kind::Label, std::move(l)); }

  /// Interprets a decision outcome under the action's return type: `true` and
  /// `false` become booleans for boolean actions, anything else a label.
  static Value from_outcome(const std::string& outcome, const TypeRef& return_type);

  Kind kind() const { return kind_; }
  bool is_none() const { return kind_ == Kind::None; }
  /// "none", "true", "false" or the label.
  const std::string& text() const { return text_; }

  auto operator<=>(const Value&) const = default;

 private:
  Value(Kind k, std::string text) : kind_(k), text_(std::move(text)) {}

  Kind kind_ = Kind::None;
  std::string text_ = "none";
};

struct Transition {
  std::string from;
  std::string action;
  Value value;
  std::string to;

  auto operator<=>(const Transition&) const = default;
};

using TransitionSet = std::set<Transition>;

enum class Rule {
  NoDuplicateStateName,
  ValidRatioSum,
  EnumerateAllDecisions,
  UsefulStates,
  Deterministic,
  WeakConnectivity,
  DecisionTotality,
  NonEnumerableRepresentation,
  EnumerableRepresentation,
};

std::string_view rule_name(Rule rule);

struct Diagnostic {
  Rule rule;
  std::string state;
  std::string action;
  std::string detail;
  SourceSpan span;
};

/// Absolute tolerance on a state's ratio sum.
inline constexpr double kRatioSumTolerance = 1e-9;

/// No Duplicate State Name, Valid Ratio Sum and Enumerate All Decisions.
/// Every violation is reported.
std::vector<Diagnostic> check_well_formed(const ProtocolSpec& spec);

TransitionSet build_trs(const ProtocolSpec& spec);

/// Whether `state` can be reached from `start` along transitions.
bool is_reachable(std::string_view state, const TransitionSet& trs, std::string_view start);

/// Whether a terminal state (one with no outgoing transition) can be reached
/// from `state`; terminal states are trivially productive.
bool is_productive(std::string_view state, const TransitionSet& trs);

/// Useful States and Deterministic, plus consistency checks that `trs`
/// represents the typestate: weak connectivity, decision totality and the
/// shape of plain and decision tuples.
std::vector<Diagnostic> check_transition_rules(const ProtocolSpec& spec, const TransitionSet& trs);

/// Graphviz digraph, one node per state and one edge per transition. Output
/// edges are labelled `!m`, input edges `?m`, decision edges `m/v`.
std::string export_dot(const ProtocolSpec& spec, const TransitionSet& trs);

}  // namespace tsmon
