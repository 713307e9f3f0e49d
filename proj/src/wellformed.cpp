#include "tsmon/wellformed.hpp"

#include <cmath>
#include <deque>
#include <map>
#include <sstream>

namespace tsmon {

Value Value::from_outcome(const std::string& outcome, const TypeRef& return_type) {
  if (return_type.kind == TypeRef::Kind::Boolean && (outcome == "true" || outcome == "false"))
    return boolean(outcome == "true");
  return label(outcome);
}

std::string_view rule_name(Rule rule) {
  switch (rule) {
    case Rule::NoDuplicateStateName: return "NO-DUPLICATE-STATE-NAME";
    case Rule::ValidRatioSum: return "VALID-RATIO-SUM";
    case Rule::EnumerateAllDecisions: return "ENUMERATE-ALL-DECISIONS";
    case Rule::UsefulStates: return "USEFUL-STATES";
    case Rule::Deterministic: return "DETERMINISTIC";
    case Rule::WeakConnectivity: return "WEAK-CONNECTIVITY";
    case Rule::DecisionTotality: return "DECISION-TOTALITY";
    case Rule::NonEnumerableRepresentation: return "NON-ENUMERABLE-REPRESENTATION";
    case Rule::EnumerableRepresentation: return "ENUMERABLE-REPRESENTATION";
  }
  return "UNKNOWN";
}

namespace {

std::set<std::string> branch_decisions(const Branch& b) {
  if (b.dest.is_plain()) return {std::string(kNoneLabel)};
  std::set<std::string> out;
  for (const auto& arm : b.dest.arms()) out.insert(arm.outcome);
  return out;
}

std::string join(const std::set<std::string>& items) {
  std::string out = "{";
  bool first = true;
  for (const auto& s : items) {
    out += (first ? "" : ", ") + s;
    first = false;
  }
  return out + "}";
}

// Distinct state names in declaration order.
std::vector<const StateDecl*> unique_states(const Typestate& t) {
  std::vector<const StateDecl*> out;
  std::set<std::string> seen;
  for (const auto& s : t.states) {
    if (seen.insert(s.name).second) out.push_back(&s);
  }
  return out;
}

const Branch* lookup_branch(const StateDecl* decl, std::string_view action, Side* side = nullptr) {
  if (!decl) return nullptr;
  for (const auto& [b, sd] : branches_in_order(decl->body)) {
    if (b->action.name == action) {
      if (side) *side = sd;
      return b;
    }
  }
  return nullptr;
}

}  // namespace

std::vector<Diagnostic> check_well_formed(const ProtocolSpec& spec) {
  std::vector<Diagnostic> diags;
  std::set<std::string> seen;
  for (const auto& s : spec.typestate.states) {
    if (!seen.insert(s.name).second)
      diags.push_back({Rule::NoDuplicateStateName, s.name, "", "state '" + s.name + "' is declared more than once", s.span});
  }

  for (const auto& s : spec.typestate.states) {
    std::vector<double> ratios;
    for (const auto& [b, side] : branches_in_order(s.body)) {
      if (!b->ratio.is_epsilon()) ratios.push_back(b->ratio.value());
    }
    if (!ratios.empty()) {
      double sum = 0.0;
      for (double r : ratios) sum += r;
      if (std::fabs(sum - 1.0) > kRatioSumTolerance) {
        std::ostringstream os;
        os << "ratios of state '" << s.name << "' sum to " << sum << ", expected 1";
        diags.push_back({Rule::ValidRatioSum, s.name, "", os.str(), s.span});
      }
    }

    for (const auto& [b, side] : branches_in_order(s.body)) {
      std::set<std::string> decisions = branch_decisions(*b);
      std::set<std::string> labels;
      try {
        labels = enum_labels(spec, b->action.return_type);
      } catch (const UnknownEnumError& e) {
        diags.push_back({Rule::EnumerateAllDecisions, s.name, b->action.name, e.what(), b->span});
        continue;
      }
      if (decisions != labels) {
        diags.push_back({Rule::EnumerateAllDecisions, s.name, b->action.name,
                         "action '" + b->action.name + "' decides on " + join(decisions) + " but returns " + join(labels),
                         b->span});
      }
    }
  }
  return diags;
}

TransitionSet build_trs(const ProtocolSpec& spec) {
  TransitionSet trs;
  for (const auto& s : spec.typestate.states) {
    for (const auto& [b, side] : branches_in_order(s.body)) {
      if (b->dest.is_plain()) {
        trs.insert({s.name, b->action.name, Value::none(), b->dest.state()});
      } else {
        for (const auto& arm : b->dest.arms())
          trs.insert({s.name, b->action.name, Value::from_outcome(arm.outcome, b->action.return_type), arm.state});
      }
    }
  }
  return trs;
}

bool is_reachable(std::string_view state, const TransitionSet& trs, std::string_view start) {
  // Backward search over predecessors; a state is visited at most once.
  std::map<std::string, std::vector<std::string>, std::less<>> preds;
  for (const auto& t : trs) preds[t.to].push_back(t.from);

  std::set<std::string, std::less<>> visited;
  std::deque<std::string> work{std::string(state)};
  while (!work.empty()) {
    std::string s = std::move(work.front());
    work.pop_front();
    if (s == start) return true;
    if (!visited.insert(s).second) continue;
    if (auto it = preds.find(s); it != preds.end()) {
      for (const auto& p : it->second) {
        if (!visited.count(p)) work.push_back(p);
      }
    }
  }
  return false;
}

bool is_productive(std::string_view state, const TransitionSet& trs) {
  std::map<std::string, std::vector<std::string>, std::less<>> succs;
  for (const auto& t : trs) succs[t.from].push_back(t.to);

  std::set<std::string, std::less<>> visited;
  std::deque<std::string> work{std::string(state)};
  while (!work.empty()) {
    std::string s = std::move(work.front());
    work.pop_front();
    auto it = succs.find(s);
    if (it == succs.end()) return true;
    if (!visited.insert(s).second) continue;
    for (const auto& n : it->second) {
      if (!visited.count(n)) work.push_back(n);
    }
  }
  return false;
}

std::vector<Diagnostic> check_transition_rules(const ProtocolSpec& spec, const TransitionSet& trs) {
  std::vector<Diagnostic> diags;
  const auto states = unique_states(spec.typestate);
  if (states.empty()) return diags;
  const std::string& start = spec.typestate.start();

  std::set<std::string> has_outgoing;
  for (const auto& t : trs) has_outgoing.insert(t.from);
  bool terminal_exists = false;
  for (const auto* s : states) terminal_exists = terminal_exists || !has_outgoing.count(s->name);

  // Useful States.
  for (const auto* s : states) {
    if (!is_reachable(s->name, trs, start))
      diags.push_back({Rule::UsefulStates, s->name, "", "state '" + s->name + "' is unreachable from '" + start + "'", s->span});
    if (terminal_exists && !is_productive(s->name, trs))
      diags.push_back({Rule::UsefulStates, s->name, "", "no terminal state is reachable from '" + s->name + "'", s->span});
  }

  // Deterministic: one destination per (s, m, v), and an action is either
  // plain or a decision.
  std::map<std::pair<std::string, std::string>, std::map<Value, std::set<std::string>>> by_action;
  for (const auto& t : trs) by_action[{t.from, t.action}][t.value].insert(t.to);
  for (const auto& [key, by_value] : by_action) {
    const auto& [from, action] = key;
    SourceSpan span = spec.typestate.find(from) ? spec.typestate.find(from)->span : SourceSpan{};
    if (const Branch* b = lookup_branch(spec.typestate.find(from), action)) span = b->span;
    bool has_none = by_value.count(Value::none()) > 0;
    if (has_none && by_value.size() > 1)
      diags.push_back({Rule::Deterministic, from, action, "action '" + action + "' mixes a plain destination with decision outcomes", span});
    for (const auto& [value, targets] : by_value) {
      if (targets.size() > 1)
        diags.push_back({Rule::Deterministic, from, action,
                         "action '" + action + "' with value " + value.text() + " leads to " + join(targets), span});
    }
  }
  const bool rules_hold = diags.empty();

  // Decision totality.
  for (const auto* s : states) {
    for (const auto& [b, side] : branches_in_order(s->body)) {
      for (const auto& outcome : branch_decisions(*b)) {
        Value v = b->dest.is_plain() ? Value::none() : Value::from_outcome(outcome, b->action.return_type);
        auto it = trs.lower_bound(Transition{s->name, b->action.name, v, ""});
        if (it == trs.end() || it->from != s->name || it->action != b->action.name || it->value != v)
          diags.push_back({Rule::DecisionTotality, s->name, b->action.name,
                           "no transition for outcome " + v.text() + " of action '" + b->action.name + "'", b->span});
      }
    }
  }

  // Tuples agree with the declared destinations.
  for (const auto& t : trs) {
    const StateDecl* decl = spec.typestate.find(t.from);
    const Branch* b = lookup_branch(decl, t.action);
    if (!b) {
      diags.push_back({Rule::NonEnumerableRepresentation, t.from, t.action,
                       "transition names action '" + t.action + "' which state '" + t.from + "' does not declare",
                       decl ? decl->span : SourceSpan{}});
      continue;
    }
    if (b->dest.is_plain()) {
      if (!t.value.is_none() || t.to != b->dest.state())
        diags.push_back({Rule::NonEnumerableRepresentation, t.from, t.action,
                         "transition (" + t.value.text() + ", " + t.to + ") does not match plain destination " + b->dest.state(),
                         b->span});
    } else {
      bool matched = false;
      for (const auto& arm : b->dest.arms()) {
        matched = matched || (Value::from_outcome(arm.outcome, b->action.return_type) == t.value && arm.state == t.to);
      }
      if (!matched)
        diags.push_back({Rule::EnumerableRepresentation, t.from, t.action,
                         "transition (" + t.value.text() + ", " + t.to + ") is not an arm of the decision", b->span});
    }
  }

  // Weak connectivity follows from the rules above; only meaningful once
  // they hold.
  if (rules_hold) {
    std::map<std::string, std::string> parent;
    for (const auto* s : states) parent[s->name] = s->name;
    auto find = [&](std::string x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& t : trs) {
      if (!parent.count(t.from) || !parent.count(t.to)) continue;
      parent[find(t.from)] = find(t.to);
    }
    const std::string root = find(start);
    for (const auto* s : states) {
      if (find(s->name) != root)
        diags.push_back({Rule::WeakConnectivity, s->name, "", "state '" + s->name + "' is disconnected from '" + start + "'", s->span});
    }
  }
  return diags;
}

std::string export_dot(const ProtocolSpec& spec, const TransitionSet& trs) {
  std::ostringstream os;
  os << "digraph \"" << (spec.name.empty() ? "typestate" : spec.name) << "\" {\n";
  os << "  rankdir=LR;\n";
  const auto states = unique_states(spec.typestate);
  for (const auto* s : states) {
    os << "  \"" << s->name << "\" [shape=circle";
    if (s == states.front()) os << ", style=bold";
    os << "];\n";
  }
  for (const auto& t : trs) {
    Side side = Side::In;
    const Branch* b = lookup_branch(spec.typestate.find(t.from), t.action, &side);
    std::string label = b ? std::string(side == Side::Out ? "!" : "?") + t.action : t.action;
    if (b && !b->dest.is_plain()) label += "/" + t.value.text();
    os << "  \"" << t.from << "\" -> \"" << t.to << "\" [label=\"" << label << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace tsmon
