#pragma once

// Surface syntax for `.tsp` protocol files.
//
//   typestate Leader;
//   const n = 2;
//   var acks = 0;
//   enum LoginResult { success, failure };
//   assign A1: acks <- acks + 1;
//   pred P1: acks == n;
//   state L1 = !{ void vreq() [0.5; [A2]; [P2]] : L2 [A3, A4] }
//            + ?{ void vack() [0.5; [A1]; [P1]] : L2 [A3, A4] };
//   state Unauth = ?{ LoginResult login() : <success: Auth, failure: Unauth> };
//   state Done = end;
//
// `!{}` groups output branches, `?{}` input branches, `_` is the empty ratio.
// A branch may omit its `[r; A; P]` block, shorten it to `[r]`, and omit its
// trailing post-assign list.

#include <stdexcept>
#include <string>
#include <string_view>

#include "tsmon/model.hpp"

namespace tsmon {

enum class ParseErrorKind {
  Syntax,
  Range,
  Reference,
  DuplicateState,
  DuplicateAction,
  DuplicateOutcome,
  DuplicateDeclaration,
};

/// Stable rule identifier for a parse failure, e.g. "SYNTAX".
std::string_view rule_name(ParseErrorKind kind);

class ParseError : public std::runtime_error {
 public:
  /// what() is "line:column: message".
  ParseError(ParseErrorKind kind, SourceSpan span, const std::string& message)
      : std::runtime_error(std::to_string(span.line) + ":" + std::to_string(span.column) + ": " + message),
        kind_(kind),
        span_(span),
        detail_(message) {}

  ParseErrorKind kind() const { return kind_; }
  const SourceSpan& span() const { return span_; }
  const std::string& detail() const { return detail_; }

 private:
  ParseErrorKind kind_;
  SourceSpan span_;
  std::string detail_;
};

/// Parses one participant. Structural invariants and name references are
/// enforced; well-formedness rules are not.
ProtocolSpec parse_protocol(std::string_view text);

/// Canonical text; parse_protocol(serialize_protocol(s)) == s.
std::string serialize_protocol(const ProtocolSpec& spec);

std::string to_string(const Expr& e);
std::string to_string(const Predicate& p);
std::string_view to_string(CmpOp op);

}  // namespace tsmon
