#include "tsmon/model.hpp"

#include <algorithm>

namespace tsmon {

bool BinaryExpr::operator==(const BinaryExpr& other) const {
  if (op != other.op) return false;
  auto same = [](const std::shared_ptr<const Expr>& a, const std::shared_ptr<const Expr>& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return *a == *b;
  };
  return same(lhs, other.lhs) && same(rhs, other.rhs);
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  return Expr{BinaryExpr{op, std::make_shared<const Expr>(std::move(lhs)), std::make_shared<const Expr>(std::move(rhs))}};
}

namespace {

void collect_names(const Expr& e, std::vector<std::string>& out) {
  if (const auto* n = std::get_if<NameRef>(&e.node)) {
    if (std::find(out.begin(), out.end(), n->name) == out.end()) out.push_back(n->name);
  } else if (const auto* b = std::get_if<BinaryExpr>(&e.node)) {
    collect_names(*b->lhs, out);
    collect_names(*b->rhs, out);
  }
}

}  // namespace

std::vector<std::string> referenced_names(const Expr& e) {
  std::vector<std::string> out;
  collect_names(e, out);
  return out;
}

Ratio::Ratio(double v) : value_(v) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::out_of_range("ratio must lie in [0, 1]");
}

const StateDecl* Typestate::find(std::string_view name) const {
  for (const auto& s : states) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

UndefinedActionError::UndefinedActionError(std::string state, std::string action)
    : std::runtime_error("action '" + action + "' is not defined in state '" + state + "'"),
      state_(std::move(state)),
      action_(std::move(action)) {}

Resolved resolve_state(const Typestate& t, std::string_view state) {
  if (const auto* decl = t.find(state)) return &decl->body;
  return std::string(state);
}

std::vector<std::pair<const Branch*, Side>> branches_in_order(const StateBody& body) {
  std::vector<std::pair<const Branch*, Side>> out;
  out.reserve(body.in_branches.size() + body.out_branches.size());
  auto add = [&out](const std::vector<Branch>& bs, Side side) {
    for (const auto& b : bs) out.emplace_back(&b, side);
  };
  if (body.inputs_first) {
    add(body.in_branches, Side::In);
    add(body.out_branches, Side::Out);
  } else {
    add(body.out_branches, Side::Out);
    add(body.in_branches, Side::In);
  }
  return out;
}

std::pair<const Branch*, Side> find_branch(const Typestate& t, std::string_view state, std::string_view action) {
  if (const auto* decl = t.find(state)) {
    for (const auto& b : decl->body.out_branches) {
      if (b.action.name == action) return {&b, Side::Out};
    }
    for (const auto& b : decl->body.in_branches) {
      if (b.action.name == action) return {&b, Side::In};
    }
  }
  throw UndefinedActionError(std::string(state), std::string(action));
}

ActionAttrs attrs(const Typestate& t, std::string_view state, std::string_view action) {
  const Branch* b = find_branch(t, state, action).first;
  return ActionAttrs{b->ratio, &b->dest, &b->pre_assigns, &b->post_assigns, &b->preds};
}

Ratio ratio_of(const Typestate& t, std::string_view state, std::string_view action) {
  return attrs(t, state, action).ratio;
}

const Destination& dest_of(const Typestate& t, std::string_view state, std::string_view action) {
  return *attrs(t, state, action).dest;
}

const std::vector<std::string>& pre_assigns_of(const Typestate& t, std::string_view state, std::string_view action) {
  return *attrs(t, state, action).pre_assigns;
}

const std::vector<std::string>& post_assigns_of(const Typestate& t, std::string_view state, std::string_view action) {
  return *attrs(t, state, action).post_assigns;
}

const std::vector<std::string>& preds_of(const Typestate& t, std::string_view state, std::string_view action) {
  return *attrs(t, state, action).preds;
}

std::set<std::string> decisions_of(const Typestate& t, std::string_view state, std::string_view action) {
  const Destination& dest = dest_of(t, state, action);
  if (dest.is_plain()) return {std::string(kNoneLabel)};
  std::set<std::string> out;
  for (const auto& arm : dest.arms()) out.insert(arm.outcome);
  return out;
}

std::set<std::string> enum_labels(const ProtocolSpec& spec, const TypeRef& type) {
  switch (type.kind) {
    case TypeRef::Kind::Boolean:
      return {"true", "false"};
    case TypeRef::Kind::Enum: {
      const auto* labels = find_named(spec.internal.enums, type.enum_name);
      if (!labels) throw UnknownEnumError(type.enum_name);
      return {labels->begin(), labels->end()};
    }
    case TypeRef::Kind::Unit:
      break;
  }
  return {std::string(kNoneLabel)};
}

std::set<std::string> actions_of(const Typestate& t, std::string_view state) {
  std::set<std::string> out;
  if (const auto* decl = t.find(state)) {
    for (const auto& b : decl->body.in_branches) out.insert(b.action.name);
    for (const auto& b : decl->body.out_branches) out.insert(b.action.name);
  }
  return out;
}

std::vector<double> ratios_of(const Typestate& t, std::string_view state) {
  std::vector<double> out;
  if (const auto* decl = t.find(state)) {
    for (const auto& [b, side] : branches_in_order(decl->body)) {
      if (!b->ratio.is_epsilon()) out.push_back(b->ratio.value());
    }
  }
  return out;
}

}  // namespace tsmon
