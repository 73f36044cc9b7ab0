#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "revlang/value.hpp"

namespace revlang {

/// Exit codes of the command-line front end.
enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitParse = 2, kExitRuntime = 3 };

/// Entry point shared by the executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Command-line literal: 5 Int, 2.0 Float, 3fx Fixed, 1.5ul ULog, 1+2im or
/// 2im Complex, true/false, [1.0, 2.0] vector, [1 2; 3 4] matrix (rows).
Value parse_literal(const std::string& text);
/// Splits on top-level commas, leaving brackets intact.
std::vector<std::string> split_args(const std::string& text);

/// JSON text of a value: numbers, {"re","im"} for Complex, nested row
/// lists for matrices.
std::string value_json(const Value& v);

}  // namespace revlang
