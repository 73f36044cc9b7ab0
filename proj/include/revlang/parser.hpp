#pragma once

#include <string>
#include <string_view>

#include "revlang/ir.hpp"

namespace revlang {

/// Parse `.rnl` source: one or more `fn name(params) ... end` definitions.
/// Throws SyntaxError with the offending span.
Program parse_program(std::string_view text, std::string file = "<input>");

/// Parse a standalone expression (used for command-line literals and tests).
Expr parse_expression(std::string_view text);

/// Canonical `.rnl` text; `parse_program(pretty_print(p)) == p`.
std::string pretty_print(const Program& program);
std::string pretty_print(const FunctionDef& fn);
std::string pretty_print(const Statement& stmt, int indent = 0);
std::string pretty_print(const Expr& expr);
std::string pretty_print(const DataView& view);

}  // namespace revlang
