#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "revlang/value.hpp"

namespace revlang {

/// Absolute tolerance for Float reversibility and ancilla checks.
inline constexpr double kDefaultFloatTolerance = 1e-9;

/// d(out.re, out.im) / d(in.re, in.im); row index is the output component.
struct Jac2 {
  double m[2][2] = {{0, 0}, {0, 0}};
};

enum class FnId {
  Identity, Convert, Add, Sub, Mul, Div, Pow, Neg, Abs, Abs2, Sqrt, Exp, Log, Sin, Cos, Atan2, Angle,
  Eq, Ne, Lt, Le, Gt, Ge, And, Or, Not,
};

/// Pure scalar function usable on instruction right-hand sides and in
/// expressions. Paths left null are unsupported for that domain.
struct ScalarFunction {
  std::string_view name;
  FnId id;
  std::size_t arity;
  Dual (*real)(const Dual* x) = nullptr;
  void (*real_partials)(const Dual* x, Dual* out) = nullptr;
  Complex (*complex)(const Complex* x) = nullptr;
  void (*complex_jacobian)(const Complex* x, Jac2* out) = nullptr;
  bool complex_to_real = false;
  /// nullopt when the result leaves the integers (falls back to Float).
  std::optional<std::int64_t> (*integer)(const std::int64_t* x) = nullptr;
  bool (*predicate)(const Value* x) = nullptr;
};

const ScalarFunction* find_function(std::string_view name);
const std::vector<ScalarFunction>& registered_functions();
/// Registered functions plus structural helpers (size, length, zeros, ...).
bool is_expression_function(std::string_view name);

/// Evaluate `f` on primal values (GVar arguments contribute their primal).
/// Domain: integer if every argument is Int/Bool, exact Fixed or ULog for
/// the operations where that is exact, complex if any argument is Complex,
/// Dual if any argument is Dual, Float otherwise.
Value apply_function(const ScalarFunction& f, std::span<const Value> args);

// ---------------------------------------------------------------------------
// Instructions

enum class InstrKind { PlusEq, MinusEq, MulEq, DivEq, XorEq, Swap, Rot, IRot, Neg, Inc, Dec, Xor };

struct PrimitiveInstr {
  InstrKind kind;
  const ScalarFunction* fn = nullptr;  // update kinds only

  bool operator==(const PrimitiveInstr&) const = default;
};

bool is_update(InstrKind kind);
std::string_view instr_name(InstrKind kind);
/// Maps SWAP/ROT/IROT/NEG/INC/DEC/XOR to their kind.
std::optional<InstrKind> primitive_kind(std::string_view name);

struct NumericOptions {
  bool float32 = false;  // round Float results to binary32
  bool checked = false;  // Fixed overflow raises instead of wrapping
};

/// Update kinds take [target, operands...]; primitives take their operands
/// in call order. Returns the updated argument list.
std::vector<Value> apply_instr(const PrimitiveInstr& instr, std::vector<Value> args,
                               const NumericOptions& opts = {});

PrimitiveInstr invert_instr(const PrimitiveInstr& instr);

/// Instruction as it appears in a reversed program: updates primals like
/// apply_instr and back-propagates the cotangents stored in GVar arguments.
/// Plain differentiable arguments are promoted to GVar with zero gradient.
std::vector<Value> adjoint_instr(const PrimitiveInstr& instr, std::vector<Value> args,
                                 const NumericOptions& opts = {});

/// Adjoint dispatch when any argument carries a gradient, plain otherwise.
std::vector<Value> dispatch_instr(const PrimitiveInstr& instr, std::vector<Value> args,
                                  const NumericOptions& opts = {});

/// New target value of `target op= r`.
Value combine_update(InstrKind op, const Value& target, const Value& r, const NumericOptions& opts = {});

/// (v + w) - w.
Fixed fixed_roundtrip(Fixed v, Fixed w);
/// (v * w) / w.
ULog ulog_roundtrip(ULog v, ULog w);

// ---------------------------------------------------------------------------
// Bijectors

/// Apply the named bijection (or its inverse) to a scalar; GVar values are
/// mapped on the primal and their gradient is rescaled by the derivative.
Value apply_bijector(std::string_view name, std::span<const Value> args, const Value& v, bool inverse);

/// Promote a plain differentiable scalar to GVar(v, 0); others unchanged.
Value promote_gvar(Value v);

}  // namespace revlang
