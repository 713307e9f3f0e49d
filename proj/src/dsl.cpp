#include "tsmon/dsl.hpp"

#include <cctype>
#include <charconv>
#include <limits>
#include <set>
#include <sstream>
#include <system_error>
#include <vector>

namespace tsmon {

std::string_view rule_name(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::Syntax: return "SYNTAX";
    case ParseErrorKind::Range: return "RANGE";
    case ParseErrorKind::Reference: return "REFERENCE";
    case ParseErrorKind::DuplicateState: return "NO-DUPLICATE-STATE-NAME";
    case ParseErrorKind::DuplicateAction: return "DUPLICATE-ACTION";
    case ParseErrorKind::DuplicateOutcome: return "DUPLICATE-OUTCOME";
    case ParseErrorKind::DuplicateDeclaration: return "DUPLICATE-DECLARATION";
  }
  return "SYNTAX";
}

namespace {

enum class Tok {
  Ident,
  Int,
  Real,
  Epsilon,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  LParen,
  RParen,
  Lt,
  Gt,
  Le,
  Ge,
  EqEq,
  Ne,
  Equals,
  Arrow,
  Comma,
  Semi,
  Colon,
  Plus,
  Minus,
  Star,
  Bang,
  Question,
  AndAnd,
  Eof,
};

struct Token {
  Tok kind;
  std::string text;
  SourceSpan span;
};

[[noreturn]] void fail(ParseErrorKind kind, SourceSpan span, const std::string& message) {
  throw ParseError(kind, span, message);
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  auto push = [&](Tok kind, std::size_t len) {
    out.push_back(Token{kind, std::string(src.substr(i, len)), SourceSpan{line, col, static_cast<int>(len)}});
    advance(len);
  };

  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && is_ident_char(src[j])) ++j;
      push(j - i == 1 && c == '_' ? Tok::Epsilon : Tok::Ident, j - i);
      continue;
    }
    if (is_digit(c)) {
      std::size_t j = i;
      while (j < src.size() && is_digit(src[j])) ++j;
      bool real = false;
      if (j + 1 < src.size() && src[j] == '.' && is_digit(src[j + 1])) {
        real = true;
        ++j;
        while (j < src.size() && is_digit(src[j])) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && is_digit(src[k])) {
          real = true;
          j = k;
          while (j < src.size() && is_digit(src[j])) ++j;
        }
      }
      push(real ? Tok::Real : Tok::Int, j - i);
      continue;
    }
    auto next_is = [&](char d) { return i + 1 < src.size() && src[i + 1] == d; };
    switch (c) {
      case '{': push(Tok::LBrace, 1); continue;
      case '}': push(Tok::RBrace, 1); continue;
      case '[': push(Tok::LBracket, 1); continue;
      case ']': push(Tok::RBracket, 1); continue;
      case '(': push(Tok::LParen, 1); continue;
      case ')': push(Tok::RParen, 1); continue;
      case ',': push(Tok::Comma, 1); continue;
      case ';': push(Tok::Semi, 1); continue;
      case ':': push(Tok::Colon, 1); continue;
      case '+': push(Tok::Plus, 1); continue;
      case '-': push(Tok::Minus, 1); continue;
      case '*': push(Tok::Star, 1); continue;
      case '?': push(Tok::Question, 1); continue;
      case '>':
        if (next_is('=')) push(Tok::Ge, 2); else push(Tok::Gt, 1);
        continue;
      case '<':
        if (next_is('=')) push(Tok::Le, 2);
        else if (next_is('-')) push(Tok::Arrow, 2);
        else push(Tok::Lt, 1);
        continue;
      case '=':
        if (next_is('=')) push(Tok::EqEq, 2); else push(Tok::Equals, 1);
        continue;
      case '!':
        if (next_is('=')) push(Tok::Ne, 2); else push(Tok::Bang, 1);
        continue;
      case '&':
        if (next_is('&')) {
          push(Tok::AndAnd, 2);
          continue;
        }
        break;
      default:
        break;
    }
    fail(ParseErrorKind::Syntax, SourceSpan{line, col, 1}, std::string("unexpected character '") + c + "'");
  }
  out.push_back(Token{Tok::Eof, "", SourceSpan{line, col, 1}});
  return out;
}

enum class NameScope { ConstsOnly, ConstsAndVars };

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  ProtocolSpec run() {
    if (peek_keyword("typestate")) {
      next();
      spec_.name = expect(Tok::Ident, "typestate name").text;
      expect(Tok::Semi, "';'");
    }
    while (peek().kind != Tok::Eof) declaration();
    if (spec_.typestate.states.empty()) fail(ParseErrorKind::Syntax, peek().span, "protocol declares no states");
    resolve_references();
    return std::move(spec_);
  }

 private:
  struct StateRef {
    std::string name;
    SourceSpan span;
  };
  struct KeyRef {
    enum class Kind { Assign, Pred, Enum } kind;
    std::string name;
    SourceSpan span;
  };
  struct ExprRef {
    std::string name;
    SourceSpan span;
    NameScope scope;
  };

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t k = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[k];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool accept(Tok kind) {
    if (peek().kind != kind) return false;
    next();
    return true;
  }
  bool peek_keyword(std::string_view kw) const { return peek().kind == Tok::Ident && peek().text == kw; }

  const Token& expect(Tok kind, std::string_view what) {
    if (peek().kind != kind) {
      std::string found = peek().kind == Tok::Eof ? "end of input" : "'" + peek().text + "'";
      fail(ParseErrorKind::Syntax, peek().span, "expected " + std::string(what) + ", found " + found);
    }
    return next();
  }

  void declaration() {
    const Token& kw = peek();
    if (kw.kind != Tok::Ident) fail(ParseErrorKind::Syntax, kw.span, "expected a declaration, found '" + kw.text + "'");
    if (kw.text == "const") return const_decl();
    if (kw.text == "var") return var_decl();
    if (kw.text == "enum") return enum_decl();
    if (kw.text == "assign") return assign_decl();
    if (kw.text == "pred") return pred_decl();
    if (kw.text == "state") return state_decl();
    fail(ParseErrorKind::Syntax, kw.span, "unknown declaration '" + kw.text + "'");
  }

  void declare_internal_name(const Token& tok, std::set<std::string>& table, std::string_view what) {
    if (!table.insert(tok.text).second)
      fail(ParseErrorKind::DuplicateDeclaration, tok.span, std::string(what) + " '" + tok.text + "' is already declared");
  }

  void const_decl() {
    next();
    const Token& name = expect(Tok::Ident, "constant name");
    declare_internal_name(name, value_names_, "name");
    expect(Tok::Equals, "'='");
    std::int64_t v = integer_literal();
    expect(Tok::Semi, "';'");
    spec_.internal.consts.push_back({name.text, v, name.span});
  }

  void var_decl() {
    next();
    const Token& name = expect(Tok::Ident, "variable name");
    declare_internal_name(name, value_names_, "name");
    expect(Tok::Equals, "'='");
    Expr init = expr(NameScope::ConstsOnly);
    expect(Tok::Semi, "';'");
    spec_.internal.vars.push_back({name.text, std::move(init), name.span});
  }

  void enum_decl() {
    next();
    const Token& name = expect(Tok::Ident, "enumeration name");
    declare_internal_name(name, enum_names_, "enumeration");
    expect(Tok::LBrace, "'{'");
    std::vector<std::string> labels;
    std::set<std::string> seen;
    do {
      const Token& label = expect(Tok::Ident, "enumeration label");
      if (label.text == kNoneLabel) fail(ParseErrorKind::Syntax, label.span, "'none' is reserved and cannot be an enumeration label");
      if (!seen.insert(label.text).second)
        fail(ParseErrorKind::DuplicateDeclaration, label.span, "label '" + label.text + "' repeated in enumeration");
      labels.push_back(label.text);
    } while (accept(Tok::Comma));
    expect(Tok::RBrace, "'}'");
    expect(Tok::Semi, "';'");
    spec_.internal.enums.push_back({name.text, std::move(labels), name.span});
  }

  void assign_decl() {
    next();
    const Token& key = expect(Tok::Ident, "assignment key");
    declare_internal_name(key, assign_keys_, "assignment");
    expect(Tok::Colon, "':'");
    const Token& target = expect(Tok::Ident, "assignment target");
    assign_targets_.push_back({target.text, target.span});
    expect(Tok::Arrow, "'<-'");
    Expr rhs = expr(NameScope::ConstsAndVars);
    expect(Tok::Semi, "';'");
    spec_.internal.assigns.push_back({key.text, Assignment{target.text, std::move(rhs)}, key.span});
  }

  void pred_decl() {
    next();
    const Token& key = expect(Tok::Ident, "predicate key");
    declare_internal_name(key, pred_keys_, "predicate");
    expect(Tok::Colon, "':'");
    Predicate p;
    do {
      Comparison c;
      c.lhs = expr(NameScope::ConstsAndVars);
      c.op = comparison_op();
      c.rhs = expr(NameScope::ConstsAndVars);
      p.conjuncts.push_back(std::move(c));
    } while (accept(Tok::AndAnd));
    expect(Tok::Semi, "';'");
    spec_.internal.preds.push_back({key.text, std::move(p), key.span});
  }

  CmpOp comparison_op() {
    const Token& t = next();
    switch (t.kind) {
      case Tok::EqEq:
      case Tok::Equals: return CmpOp::Eq;
      case Tok::Ne: return CmpOp::Ne;
      case Tok::Lt: return CmpOp::Lt;
      case Tok::Le: return CmpOp::Le;
      case Tok::Gt: return CmpOp::Gt;
      case Tok::Ge: return CmpOp::Ge;
      default: break;
    }
    fail(ParseErrorKind::Syntax, t.span, "expected a comparison operator, found '" + t.text + "'");
  }

  std::int64_t integer_literal() {
    bool negative = accept(Tok::Minus);
    const Token& t = expect(Tok::Int, "integer literal");
    std::uint64_t magnitude = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), magnitude);
    constexpr auto max = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());
    if (ec != std::errc() || magnitude > max + (negative ? 1 : 0))
      fail(ParseErrorKind::Range, t.span, "integer literal '" + t.text + "' does not fit in 64 bits");
    if (negative) return magnitude == max + 1 ? std::numeric_limits<std::int64_t>::min() : -static_cast<std::int64_t>(magnitude);
    return static_cast<std::int64_t>(magnitude);
  }

  Expr expr(NameScope scope) {
    Expr lhs = term(scope);
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      BinaryOp op = next().kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
      lhs = Expr::binary(op, std::move(lhs), term(scope));
    }
    return lhs;
  }

  Expr term(NameScope scope) {
    Expr lhs = factor(scope);
    while (accept(Tok::Star)) lhs = Expr::binary(BinaryOp::Mul, std::move(lhs), factor(scope));
    return lhs;
  }

  Expr factor(NameScope scope) {
    const Token& t = peek();
    if (t.kind == Tok::Int || t.kind == Tok::Minus) return Expr::literal(integer_literal());
    if (t.kind == Tok::Ident) {
      next();
      expr_refs_.push_back({t.text, t.span, scope});
      return Expr::name(t.text);
    }
    if (accept(Tok::LParen)) {
      Expr inner = expr(scope);
      expect(Tok::RParen, "')'");
      return inner;
    }
    fail(ParseErrorKind::Syntax, t.span, "expected an expression, found '" + t.text + "'");
  }

  void state_decl() {
    next();
    const Token& name = expect(Tok::Ident, "state name");
    if (!state_names_.insert(name.text).second)
      fail(ParseErrorKind::DuplicateState, name.span, "state '" + name.text + "' is declared twice");
    expect(Tok::Equals, "'='");
    StateBody body;
    if (peek_keyword("end")) {
      next();
    } else {
      std::set<std::string> actions;
      Side first = group(body, actions);
      if (accept(Tok::Plus)) {
        const Token& at = peek();
        Side second = group(body, actions);
        if (second == first) fail(ParseErrorKind::Syntax, at.span, "a mixed state joins one output group and one input group");
      }
      if (body.is_terminal())
        fail(ParseErrorKind::Syntax, name.span, "state '" + name.text + "' has no branches; write `end` for a terminal state");
      body.inputs_first = body.is_mixed() && first == Side::In;
    }
    expect(Tok::Semi, "';'");
    spec_.typestate.states.push_back(StateDecl{name.text, std::move(body), name.span});
  }

  Side group(StateBody& body, std::set<std::string>& actions) {
    Side side;
    if (accept(Tok::Bang)) {
      side = Side::Out;
    } else if (accept(Tok::Question)) {
      side = Side::In;
    } else {
      fail(ParseErrorKind::Syntax, peek().span, "expected '!{', '?{' or 'end', found '" + peek().text + "'");
    }
    expect(Tok::LBrace, "'{'");
    auto& target = side == Side::Out ? body.out_branches : body.in_branches;
    if (peek().kind != Tok::RBrace) {
      do {
        Branch b = branch();
        if (!actions.insert(b.action.name).second)
          fail(ParseErrorKind::DuplicateAction, b.span, "action '" + b.action.name + "' appears twice in one state");
        target.push_back(std::move(b));
      } while (accept(Tok::Comma));
    }
    expect(Tok::RBrace, "'}'");
    return side;
  }

  TypeRef type_ref(const Token& t) {
    if (t.text == "void") return TypeRef::unit();
    if (t.text == "boolean" || t.text == "bool") return TypeRef::boolean();
    key_refs_.push_back({KeyRef::Kind::Enum, t.text, t.span});
    return TypeRef::enumeration(t.text);
  }

  Branch branch() {
    Branch b;
    b.action.return_type = type_ref(expect(Tok::Ident, "return type"));
    const Token& name = expect(Tok::Ident, "action name");
    b.action.name = name.text;
    b.span = name.span;
    expect(Tok::LParen, "'('");
    if (peek().kind != Tok::RParen) {
      do {
        b.action.param_types.push_back(expect(Tok::Ident, "parameter type").text);
      } while (accept(Tok::Comma));
    }
    expect(Tok::RParen, "')'");
    if (accept(Tok::LBracket)) {
      b.ratio = ratio();
      if (accept(Tok::Semi)) {
        b.pre_assigns = key_list(KeyRef::Kind::Assign);
        expect(Tok::Semi, "';'");
        b.preds = key_list(KeyRef::Kind::Pred);
      }
      expect(Tok::RBracket, "']'");
    }
    expect(Tok::Colon, "':'");
    b.dest = destination();
    if (peek().kind == Tok::LBracket) b.post_assigns = key_list(KeyRef::Kind::Assign);
    return b;
  }

  Ratio ratio() {
    const Token& t = next();
    if (t.kind == Tok::Epsilon) return Ratio::epsilon();
    if (t.kind != Tok::Int && t.kind != Tok::Real) fail(ParseErrorKind::Syntax, t.span, "expected a ratio or '_', found '" + t.text + "'");
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size() || !(v >= 0.0 && v <= 1.0))
      fail(ParseErrorKind::Range, t.span, "ratio " + t.text + " lies outside [0, 1]");
    return Ratio(v);
  }

  std::vector<std::string> key_list(KeyRef::Kind kind) {
    std::vector<std::string> keys;
    expect(Tok::LBracket, "'['");
    if (peek().kind != Tok::RBracket) {
      do {
        const Token& k = expect(Tok::Ident, kind == KeyRef::Kind::Pred ? "predicate key" : "assignment key");
        key_refs_.push_back({kind, k.text, k.span});
        keys.push_back(k.text);
      } while (accept(Tok::Comma));
    }
    expect(Tok::RBracket, "']'");
    return keys;
  }

  Destination destination() {
    if (peek().kind == Tok::Ident) {
      const Token& s = next();
      state_refs_.push_back({s.text, s.span});
      return Destination::plain(s.text);
    }
    expect(Tok::Lt, "a destination state or '<'");
    std::vector<DecisionArm> arms;
    std::set<std::string> seen;
    do {
      const Token& o = peek();
      if (o.kind == Tok::Epsilon) fail(ParseErrorKind::Syntax, o.span, "'_' is not a decision outcome");
      expect(Tok::Ident, "decision outcome");
      if (!seen.insert(o.text).second)
        fail(ParseErrorKind::DuplicateOutcome, o.span, "outcome '" + o.text + "' repeated in decision");
      expect(Tok::Colon, "':'");
      const Token& s = expect(Tok::Ident, "destination state");
      state_refs_.push_back({s.text, s.span});
      arms.push_back(DecisionArm{o.text, s.text, o.span});
    } while (accept(Tok::Comma));
    expect(Tok::Gt, "'>'");
    return Destination::decision(std::move(arms));
  }

  void resolve_references() {
    const auto& in = spec_.internal;
    auto is_const = [&](const std::string& n) { return find_named(in.consts, n) != nullptr; };
    auto is_var = [&](const std::string& n) { return find_named(in.vars, n) != nullptr; };

    for (const auto& r : expr_refs_) {
      if (is_const(r.name)) continue;
      if (r.scope == NameScope::ConstsAndVars && is_var(r.name)) continue;
      if (is_var(r.name))
        fail(ParseErrorKind::Reference, r.span, "variable initializer refers to variable '" + r.name + "'; only constants are allowed");
      fail(ParseErrorKind::Reference, r.span, "undeclared name '" + r.name + "'");
    }
    for (const auto& t : assign_targets_) {
      if (is_var(t.name)) continue;
      if (is_const(t.name)) fail(ParseErrorKind::Reference, t.span, "cannot assign to constant '" + t.name + "'");
      fail(ParseErrorKind::Reference, t.span, "assignment target '" + t.name + "' is not a declared variable");
    }
    for (const auto& k : key_refs_) {
      switch (k.kind) {
        case KeyRef::Kind::Assign:
          if (!find_named(in.assigns, k.name)) fail(ParseErrorKind::Reference, k.span, "undeclared assignment key '" + k.name + "'");
          break;
        case KeyRef::Kind::Pred:
          if (!find_named(in.preds, k.name)) fail(ParseErrorKind::Reference, k.span, "undeclared predicate key '" + k.name + "'");
          break;
        case KeyRef::Kind::Enum:
          if (!find_named(in.enums, k.name)) fail(ParseErrorKind::Reference, k.span, "undeclared type '" + k.name + "'");
          break;
      }
    }
    for (const auto& s : state_refs_) {
      if (!state_names_.count(s.name)) fail(ParseErrorKind::Reference, s.span, "undeclared state '" + s.name + "'");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  ProtocolSpec spec_;

  std::set<std::string> value_names_;
  std::set<std::string> enum_names_;
  std::set<std::string> assign_keys_;
  std::set<std::string> pred_keys_;
  std::set<std::string> state_names_;

  std::vector<StateRef> assign_targets_;
  std::vector<StateRef> state_refs_;
  std::vector<KeyRef> key_refs_;
  std::vector<ExprRef> expr_refs_;
};

//------------------------------------------------------------------------------
// Serialization.

int precedence(const Expr& e) {
  if (const auto* b = std::get_if<BinaryExpr>(&e.node)) return b->op == BinaryOp::Mul ? 2 : 1;
  return 3;
}

void write_expr(std::ostream& os, const Expr& e) {
  if (const auto* lit = std::get_if<IntLiteral>(&e.node)) {
    os << lit->value;
  } else if (const auto* n = std::get_if<NameRef>(&e.node)) {
    os << n->name;
  } else {
    const auto& b = std::get<BinaryExpr>(e.node);
    int p = precedence(e);
    // Left-associative: a right operand at the same level needs parentheses.
    bool paren_l = precedence(*b.lhs) < p;
    bool paren_r = precedence(*b.rhs) <= p;
    if (paren_l) os << '(';
    write_expr(os, *b.lhs);
    if (paren_l) os << ')';
    os << (b.op == BinaryOp::Add ? " + " : b.op == BinaryOp::Sub ? " - " : " * ");
    if (paren_r) os << '(';
    write_expr(os, *b.rhs);
    if (paren_r) os << ')';
  }
}

std::string format_ratio(const Ratio& r) {
  if (r.is_epsilon()) return "_";
  // Shortest round-trip form; the lexer reads exponents such as 1e-05.
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, r.value());
  return std::string(buf, ptr);
}

void write_keys(std::ostream& os, const std::vector<std::string>& keys) {
  os << '[';
  for (std::size_t i = 0; i < keys.size(); ++i) os << (i ? ", " : "") << keys[i];
  os << ']';
}

std::string type_name(const TypeRef& t) {
  switch (t.kind) {
    case TypeRef::Kind::Unit: return "void";
    case TypeRef::Kind::Boolean: return "boolean";
    case TypeRef::Kind::Enum: return t.enum_name;
  }
  return "void";
}

void write_branch(std::ostream& os, const Branch& b) {
  os << type_name(b.action.return_type) << ' ' << b.action.name << '(';
  for (std::size_t i = 0; i < b.action.param_types.size(); ++i) os << (i ? ", " : "") << b.action.param_types[i];
  os << ") [" << format_ratio(b.ratio) << "; ";
  write_keys(os, b.pre_assigns);
  os << "; ";
  write_keys(os, b.preds);
  os << "] : ";
  if (b.dest.is_plain()) {
    os << b.dest.state();
  } else {
    os << '<';
    const auto& arms = b.dest.arms();
    for (std::size_t i = 0; i < arms.size(); ++i) os << (i ? ", " : "") << arms[i].outcome << ": " << arms[i].state;
    os << '>';
  }
  os << ' ';
  write_keys(os, b.post_assigns);
}

void write_group(std::ostream& os, char sigil, const std::vector<Branch>& branches) {
  os << sigil << "{ ";
  for (std::size_t i = 0; i < branches.size(); ++i) {
    if (i) os << ", ";
    write_branch(os, branches[i]);
  }
  os << " }";
}

}  // namespace

ProtocolSpec parse_protocol(std::string_view text) { return Parser(lex(text)).run(); }

std::string_view to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "==";
}

std::string to_string(const Expr& e) {
  std::ostringstream os;
  write_expr(os, e);
  return os.str();
}

std::string to_string(const Predicate& p) {
  std::ostringstream os;
  for (std::size_t i = 0; i < p.conjuncts.size(); ++i) {
    if (i) os << " && ";
    write_expr(os, p.conjuncts[i].lhs);
    os << ' ' << to_string(p.conjuncts[i].op) << ' ';
    write_expr(os, p.conjuncts[i].rhs);
  }
  return os.str();
}

std::string serialize_protocol(const ProtocolSpec& spec) {
  std::ostringstream os;
  const auto& in = spec.internal;
  bool any = false;
  auto section = [&](bool nonempty) {
    if (nonempty && any) os << '\n';
    any = any || nonempty;
  };

  if (!spec.name.empty()) {
    os << "typestate " << spec.name << ";\n";
    any = true;
  }
  section(!in.enums.empty());
  for (const auto& e : in.enums) {
    os << "enum " << e.name << " { ";
    for (std::size_t i = 0; i < e.value.size(); ++i) os << (i ? ", " : "") << e.value[i];
    os << " };\n";
  }
  section(!in.consts.empty());
  for (const auto& c : in.consts) os << "const " << c.name << " = " << c.value << ";\n";
  section(!in.vars.empty());
  for (const auto& v : in.vars) os << "var " << v.name << " = " << to_string(v.value) << ";\n";
  section(!in.assigns.empty());
  for (const auto& a : in.assigns) os << "assign " << a.name << ": " << a.value.target << " <- " << to_string(a.value.expr) << ";\n";
  section(!in.preds.empty());
  for (const auto& p : in.preds) os << "pred " << p.name << ": " << to_string(p.value) << ";\n";
  section(!spec.typestate.states.empty());
  for (const auto& s : spec.typestate.states) {
    os << "state " << s.name << " = ";
    const auto& body = s.body;
    if (body.is_terminal()) {
      os << "end";
    } else if (!body.is_mixed()) {
      if (body.out_branches.empty()) write_group(os, '?', body.in_branches);
      else write_group(os, '!', body.out_branches);
    } else if (body.inputs_first) {
      write_group(os, '?', body.in_branches);
      os << " + ";
      write_group(os, '!', body.out_branches);
    } else {
      write_group(os, '!', body.out_branches);
      os << " + ";
      write_group(os, '?', body.in_branches);
    }
    os << ";\n";
  }
  return os.str();
}

}  // namespace tsmon
