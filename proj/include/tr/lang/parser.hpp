#pragma once

#include <string>
#include <string_view>

#include "tr/lang/ast.hpp"
#include "tr/lang/diagnostics.hpp"

namespace tr::lang {

/// Parses a whole `.tr` source. Throws ParseError carrying every diagnostic
/// found; there is no partial result.
ProgramLibrary parse(std::string_view source);

/// Parses a single expression, e.g. `point(10, 10)`.
ExprPtr parse_expr(std::string_view source);

/// Parses a single action term such as `goto(point(10, 10))`. Names that are
/// programs or trees of `lib` become ProgramCall, all others Primitive.
ActionTerm parse_action(std::string_view source, const ProgramLibrary& lib);

/// Reports unresolved names, arity mismatches, unbound variables, zero-rule
/// programs and malformed trees. Recursion is legal and not reported.
Diagnostics validate(const ProgramLibrary& lib);

/// Canonical source text; parse(pretty(x)) is structurally equal to x.
std::string pretty(const ProgramLibrary& lib);
std::string pretty(const Expr& e);
std::string pretty(const ActionTerm& action);
std::string pretty_rule(const Rule& rule);

/// Shortest decimal text that reads back to exactly `value`.
std::string format_number(double value);

}  // namespace tr::lang
