#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "revlang/ir.hpp"
#include "revlang/numerics.hpp"

namespace revlang {

struct ExecOptions {
  bool invcheck = true;
  double float_tolerance = kDefaultFloatTolerance;
  std::int64_t max_steps = 100'000'000;  // statement executions
  bool trace = false;
  std::ostream* trace_out = nullptr;  // trace lines; stderr when null
  std::ostream* show_out = nullptr;   // @safe @show output; dropped when null
  std::size_t max_call_depth = 512;
  bool float32 = false;  // round Float instruction results to binary32
  bool checked = false;  // Fixed overflow raises
  /// Backward pass of differentiation: ancillas are promoted to GVar and
  /// shared reads within one instruction are rejected.
  bool gradient = false;
};

/// Counters of executed reversibility checks.
struct CheckStats {
  std::int64_t passed = 0;
  std::int64_t failed = 0;
  std::int64_t steps = 0;
};

/// Tree-walking evaluator for one program. Functions are routine-expanded
/// once; inverses are derived on first use.
class Interpreter {
 public:
  explicit Interpreter(const Program& program, ExecOptions opts = {});

  std::vector<Value> run(const std::string& fname, std::vector<Value> args);
  std::vector<Value> uncall(const std::string& fname, std::vector<Value> args);

  const CheckStats& stats() const { return stats_; }
  const ExecOptions& options() const { return opts_; }

  /// Expression evaluation against one frame (conditions, ancilla values,
  /// loop bounds).
  Value eval(const Env& env, const Expr& e) const;

 private:
  const FunctionDef& function(const std::string& name, bool inverse, const SourceSpan& site);
  std::vector<Value> invoke(const FunctionDef& f, std::vector<Value> args, const SourceSpan& site);
  void exec_block(Env& env, const Block& b);
  void exec(Env& env, const Statement& s);
  void exec_instr(Env& env, const InstrCall& c, const Statement& s);
  void exec_call(Env& env, const std::string& fname, const std::vector<DataView>& args, bool inverse,
                 const Statement& s);
  void check(bool ok, ErrorKind kind, const std::string& message, const SourceSpan& span);
  void trace(const Statement& s, const std::string& views);
  NumericOptions numeric() const { return {opts_.float32, opts_.checked}; }

  Program program_;
  ExecOptions opts_;
  std::map<std::string, FunctionDef> forward_;
  std::map<std::string, FunctionDef> inverse_;
  CheckStats stats_;
  std::size_t depth_ = 0;
};

std::vector<Value> run(const Program& program, const std::string& fname, std::vector<Value> args,
                       const ExecOptions& opts = {});
std::vector<Value> uncall(const Program& program, const std::string& fname, std::vector<Value> args,
                          const ExecOptions& opts = {});

/// Reads apply bijectors; writes apply their inverses. Plain views address
/// one cell of the frame.
Value read_view(const Env& env, const DataView& view);
void write_view(Env& env, const DataView& view, Value v);

/// Largest componentwise primal difference; infinity when shapes or
/// discrete kinds disagree.
double max_deviation(const Value& a, const Value& b);
/// Discrete components bit-identical and Float/Complex/Dual components
/// within `tol`.
bool values_match(const Value& a, const Value& b, double tol);

struct ReversibilityReport {
  bool ok = false;
  double max_deviation = 0.0;
  bool ancilla_balanced = true;
  CheckStats forward;
  CheckStats backward;
  std::optional<ErrorKind> error;
  std::string message;
};

/// Runs f then ~f and compares against the original arguments. Errors are
/// captured in the report.
ReversibilityReport check_reversibility(const Program& program, const std::string& fname,
                                        const std::vector<Value>& args, const ExecOptions& opts = {});

}  // namespace revlang
