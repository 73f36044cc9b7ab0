#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "revlang/errors.hpp"
#include "revlang/value.hpp"

namespace revlang {

// ---------------------------------------------------------------------------
// Expressions

enum class UnaryOp { Neg, Not };
enum class BinaryOp { Add, Sub, Mul, Div, Pow, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

std::string_view op_symbol(UnaryOp op);
std::string_view op_symbol(BinaryOp op);

struct Expr;
struct DataView;

struct LiteralExpr {
  Value value;
  bool operator==(const LiteralExpr& o) const { return value == o.value; }
};

struct ViewExpr {
  Box<DataView> view;
  bool operator==(const ViewExpr&) const;
};

struct UnaryExpr {
  UnaryOp op;
  Box<Expr> operand;
  bool operator==(const UnaryExpr&) const;
};

struct BinaryExpr {
  BinaryOp op;
  Box<Expr> lhs;
  Box<Expr> rhs;
  bool operator==(const BinaryExpr&) const;
};

/// Application of a pure function (registered scalar function or one of the
/// structural helpers size/length/zeros/ulog/fixed/float/complex).
struct CallExpr {
  std::string fname;
  std::vector<Expr> args;
  bool operator==(const CallExpr&) const;
};

struct Expr {
  std::variant<LiteralExpr, ViewExpr, UnaryExpr, BinaryExpr, CallExpr> node;
  SourceSpan span;

  bool operator==(const Expr& o) const { return node == o.node; }

  static Expr literal(Value v, SourceSpan span = {});
  static Expr view(DataView v);
  static Expr unary(UnaryOp op, Expr operand, SourceSpan span = {});
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs, SourceSpan span = {});
  static Expr call(std::string fname, std::vector<Expr> args, SourceSpan span = {});

  const LiteralExpr* as_literal() const { return std::get_if<LiteralExpr>(&node); }
  const DataView* as_view() const;
};

// ---------------------------------------------------------------------------
// Data views

struct VarView {
  std::string name;
  bool operator==(const VarView&) const = default;
};

struct FieldView {
  Box<DataView> base;
  std::string field;
  bool operator==(const FieldView&) const;
};

struct IndexView {
  Box<DataView> base;
  std::vector<Expr> indices;  // one (linear) or two (row, column), 1-based
  bool operator==(const IndexView&) const;
};

/// `base |> name(args...)`: reads apply the bijection, writes its inverse.
struct BijectorView {
  Box<DataView> base;
  std::string name;
  std::vector<Expr> args;
  bool operator==(const BijectorView&) const;
};

struct DataView {
  std::variant<VarView, FieldView, IndexView, BijectorView> node;
  SourceSpan span;

  bool operator==(const DataView& o) const { return node == o.node; }

  static DataView var(std::string name, SourceSpan span = {});
  static DataView field(DataView base, std::string field, SourceSpan span = {});
  static DataView index(DataView base, std::vector<Expr> indices, SourceSpan span = {});
  static DataView bijector(DataView base, std::string name, std::vector<Expr> args, SourceSpan span = {});

  /// Name of the variable the chain bottoms out at.
  const std::string& root() const;
};

/// Built-in bijections usable in views: neg, addconst(c), mulconst(c != 0).
bool is_known_bijector(std::string_view name, std::size_t nargs);

// ---------------------------------------------------------------------------
// Statements

enum class InstrOp { PlusEq, MinusEq, MulEq, DivEq, XorEq };
std::string_view op_symbol(InstrOp op);

struct Statement;
using Block = std::vector<Statement>;

struct AncillaAlloc {
  std::string name;
  Expr init;
  bool operator==(const AncillaAlloc&) const = default;
};

struct AncillaDealloc {
  std::string name;
  Expr value;
  bool operator==(const AncillaDealloc&) const = default;
};

/// `target op= fname(operands...)`; operands are views or literals.
struct InstrCall {
  InstrOp op;
  std::string fname;
  DataView target;
  std::vector<Expr> operands;
  bool operator==(const InstrCall&) const = default;
};

struct FnCall {
  std::string fname;
  std::vector<DataView> args;
  bool operator==(const FnCall&) const = default;
};

struct UncallFn {
  std::string fname;
  std::vector<DataView> args;
  bool operator==(const UncallFn&) const = default;
};

/// `if (pre, post)`; an empty post means "same as the precondition" (`~`).
struct IfStmt {
  Expr pre;
  std::optional<Expr> post;
  Block then_block;
  Block else_block;
  bool operator==(const IfStmt&) const;
};

struct WhileStmt {
  Expr pre;
  Expr post;
  Block body;
  bool operator==(const WhileStmt&) const;
};

struct ForStmt {
  std::string var;
  Expr start;
  Expr step;
  Expr stop;
  Block body;
  bool operator==(const ForStmt&) const;
};

struct RoutineBegin {
  Block body;
  bool operator==(const RoutineBegin&) const;
};

struct RoutineEnd {
  bool operator==(const RoutineEnd&) const = default;
};

struct InvCheckOff {
  Box<Statement> stmt;
  bool operator==(const InvCheckOff&) const;
};

enum class SafeKind { Assert, Show };

/// Irreversible escape hatch; never inverted.
struct SafeStmt {
  SafeKind kind;
  std::vector<Expr> exprs;
  bool operator==(const SafeStmt&) const = default;
};

struct BlockStmt {
  Block stmts;
  bool operator==(const BlockStmt&) const;
};

struct Statement {
  std::variant<AncillaAlloc, AncillaDealloc, InstrCall, FnCall, UncallFn, IfStmt, WhileStmt, ForStmt,
               RoutineBegin, RoutineEnd, InvCheckOff, SafeStmt, BlockStmt>
      node;
  SourceSpan span;

  bool operator==(const Statement& o) const { return node == o.node; }
};

std::string_view statement_kind(const Statement& s);

// ---------------------------------------------------------------------------
// Functions and programs

enum class ParamKind { Any, Scalar, Array };

struct Param {
  std::string name;
  ParamKind kind = ParamKind::Any;
  bool operator==(const Param&) const = default;
};

struct FunctionDef {
  std::string name;
  std::vector<Param> params;
  Block body;
  SourceSpan span;

  bool operator==(const FunctionDef& o) const {
    return name == o.name && params == o.params && body == o.body;
  }
};

struct Program {
  std::vector<FunctionDef> functions;  // source order

  const FunctionDef* find(std::string_view name) const;
  bool operator==(const Program& o) const { return functions == o.functions; }
};

/// Reversible primitive instructions callable with function-call syntax.
struct PrimitiveCallInfo {
  std::string_view name;
  std::size_t arity;
};
const PrimitiveCallInfo* find_primitive_call(std::string_view name);

// ---------------------------------------------------------------------------
// Validation

struct Diagnostic {
  std::string rule;
  std::string message;
  SourceSpan span;
};

/// Static well-formedness: unique names, resolvable calls and arities,
/// balanced ancillas per lexical scope, matched routines, affine indices,
/// known bijectors, operand forms.
std::vector<Diagnostic> validate(const Program& program);

/// Whether an index expression is an affine form over integer variables.
bool is_affine_index(const Expr& e);

// ---------------------------------------------------------------------------
// Environment and storage identity

/// Bindings of one call frame.
class Env {
 public:
  bool has(const std::string& name) const { return bindings_.count(name) != 0; }
  const Value& at(const std::string& name) const;
  Value& at(const std::string& name);
  void bind(const std::string& name, Value v);
  Value unbind(const std::string& name);

  void mark_ancilla(const std::string& name) { ancillas_.insert(name); }
  void clear_ancilla(const std::string& name) { ancillas_.erase(name); }
  const std::set<std::string>& ancillas() const { return ancillas_; }

  /// Sorted key set.
  std::vector<std::string> names() const;
  std::size_t size() const { return bindings_.size(); }

 private:
  std::map<std::string, Value> bindings_;
  std::set<std::string> ancillas_;
};

/// Canonical identity of a memory cell: the frame variable plus the resolved
/// field/element path. Bijectors do not contribute.
struct StorageId {
  std::string root;
  std::vector<std::string> path;

  bool operator==(const StorageId&) const = default;
  /// One cell contains the other (or they coincide).
  bool overlaps(const StorageId& other) const;
  std::string str() const;
};

StorageId canonical_view_identity(const Env& env, const DataView& view);

/// Evaluate an affine integer index expression against `env`.
std::int64_t eval_affine_index(const Env& env, const Expr& e);

}  // namespace revlang
