#include "tsmon/semantics.hpp"

namespace tsmon {

std::int64_t VarStore::lookup(std::string_view name) const {
  if (auto it = vars.find(name); it != vars.end()) return it->second;
  if (auto it = consts.find(name); it != consts.end()) return it->second;
  throw EvalError("unknown name '" + std::string(name) + "'");
}

std::int64_t evaluate(const Expr& e, const VarStore& store) {
  if (const auto* lit = std::get_if<IntLiteral>(&e.node)) return lit->value;
  if (const auto* n = std::get_if<NameRef>(&e.node)) return store.lookup(n->name);

  const auto& b = std::get<BinaryExpr>(e.node);
  std::int64_t lhs = evaluate(*b.lhs, store);
  std::int64_t rhs = evaluate(*b.rhs, store);
  std::int64_t out = 0;
  bool overflow = false;
  switch (b.op) {
    case BinaryOp::Add: overflow = __builtin_add_overflow(lhs, rhs, &out); break;
    case BinaryOp::Sub: overflow = __builtin_sub_overflow(lhs, rhs, &out); break;
    case BinaryOp::Mul: overflow = __builtin_mul_overflow(lhs, rhs, &out); break;
  }
  if (overflow) throw EvalError("integer overflow evaluating " + std::to_string(lhs) + " and " + std::to_string(rhs));
  return out;
}

bool evaluate(const Predicate& p, const VarStore& store) {
  for (const auto& c : p.conjuncts) {
    std::int64_t lhs = evaluate(c.lhs, store);
    std::int64_t rhs = evaluate(c.rhs, store);
    bool holds = false;
    switch (c.op) {
      case CmpOp::Eq: holds = lhs == rhs; break;
      case CmpOp::Ne: holds = lhs != rhs; break;
      case CmpOp::Lt: holds = lhs < rhs; break;
      case CmpOp::Le: holds = lhs <= rhs; break;
      case CmpOp::Gt: holds = lhs > rhs; break;
      case CmpOp::Ge: holds = lhs >= rhs; break;
    }
    if (!holds) return false;
  }
  return true;
}

VarStore update(const InternalStateDecl& decl, const std::vector<std::string>& keys, VarStore store) {
  for (const auto& key : keys) {
    const Assignment* a = find_named(decl.assigns, key);
    if (!a) throw EvalError("unknown assignment key '" + key + "'");
    auto it = store.vars.find(a->target);
    if (it == store.vars.end()) throw EvalError("assignment '" + key + "' targets unknown variable '" + a->target + "'");
    it->second = evaluate(a->expr, store);
  }
  return store;
}

bool eval(const InternalStateDecl& decl, const std::vector<std::string>& keys, const VarStore& store) {
  bool result = true;
  for (const auto& key : keys) {
    const Predicate* p = find_named(decl.preds, key);
    if (!p) throw EvalError("unknown predicate key '" + key + "'");
    // Every key is checked even once the result is known.
    result = evaluate(*p, store) && result;
  }
  return result;
}

TInfo initial_config(const ProtocolSpec& spec) {
  if (spec.typestate.states.empty()) throw EvalError("typestate has no states");
  TInfo cfg;
  cfg.state = spec.typestate.start();
  for (const auto& c : spec.internal.consts) cfg.store.consts[c.name] = c.value;
  VarStore consts_only{{}, cfg.store.consts};
  for (const auto& v : spec.internal.vars) cfg.store.vars[v.name] = evaluate(v.value, consts_only);
  return cfg;
}

namespace {

const std::string* destination_for(const Branch& b, const Value& value) {
  if (b.dest.is_plain()) return value.is_none() ? &b.dest.state() : nullptr;
  for (const auto& arm : b.dest.arms()) {
    if (Value::from_outcome(arm.outcome, b.action.return_type) == value) return &arm.state;
  }
  return nullptr;
}

}  // namespace

bool has_transition(const Typestate& t, std::string_view state, std::string_view action, const Value& value) {
  try {
    return destination_for(*find_branch(t, state, action).first, value) != nullptr;
  } catch (const UndefinedActionError&) {
    return false;
  }
}

StepOutcome step(const ProtocolSpec& spec, const TInfo& cfg, std::string_view action, const Value& value) {
  const Branch* branch = nullptr;
  try {
    branch = find_branch(spec.typestate, cfg.state, action).first;
  } catch (const UndefinedActionError& e) {
    throw IllegalActionError(cfg.state, std::string(action), value, e.what());
  }
  const std::string* dest = destination_for(*branch, value);
  if (!dest) {
    std::string why = !branch->dest.is_plain() && value.is_none()
                          ? "action '" + std::string(action) + "' needs its returned value to select a destination"
                          : "no transition for action '" + std::string(action) + "' with value " + value.text() +
                                " in state '" + cfg.state + "'";
    throw IllegalActionError(cfg.state, std::string(action), value, why);
  }

  VarStore after_pre = update(spec.internal, branch->pre_assigns, cfg.store);
  if (!eval(spec.internal, branch->preds, after_pre)) return StepOutcome{TInfo{cfg.state, std::move(after_pre)}, false};
  return StepOutcome{TInfo{*dest, update(spec.internal, branch->post_assigns, std::move(after_pre))}, true};
}

}  // namespace tsmon
