#include "revlang/ir.hpp"

#include <algorithm>
#include <array>

#include "revlang/numerics.hpp"

namespace revlang {

std::string_view op_symbol(UnaryOp op) { return op == UnaryOp::Neg ? "-" : "!"; }

std::string_view op_symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Pow: return "^";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::And: return "&&";
    case BinaryOp::Or: return "||";
  }
  return "?";
}

std::string_view op_symbol(InstrOp op) {
  switch (op) {
    case InstrOp::PlusEq: return "+=";
    case InstrOp::MinusEq: return "-=";
    case InstrOp::MulEq: return "*=";
    case InstrOp::DivEq: return "/=";
    case InstrOp::XorEq: return "xor=";
  }
  return "?";
}

bool ViewExpr::operator==(const ViewExpr& o) const { return view == o.view; }
bool UnaryExpr::operator==(const UnaryExpr& o) const { return op == o.op && operand == o.operand; }
bool BinaryExpr::operator==(const BinaryExpr& o) const { return op == o.op && lhs == o.lhs && rhs == o.rhs; }
bool CallExpr::operator==(const CallExpr& o) const { return fname == o.fname && args == o.args; }
bool FieldView::operator==(const FieldView& o) const { return base == o.base && field == o.field; }
bool IndexView::operator==(const IndexView& o) const { return base == o.base && indices == o.indices; }
bool BijectorView::operator==(const BijectorView& o) const {
  return base == o.base && name == o.name && args == o.args;
}
bool IfStmt::operator==(const IfStmt& o) const {
  return pre == o.pre && post == o.post && then_block == o.then_block && else_block == o.else_block;
}
bool WhileStmt::operator==(const WhileStmt& o) const { return pre == o.pre && post == o.post && body == o.body; }
bool ForStmt::operator==(const ForStmt& o) const {
  return var == o.var && start == o.start && step == o.step && stop == o.stop && body == o.body;
}
bool RoutineBegin::operator==(const RoutineBegin& o) const { return body == o.body; }
bool InvCheckOff::operator==(const InvCheckOff& o) const { return stmt == o.stmt; }
bool BlockStmt::operator==(const BlockStmt& o) const { return stmts == o.stmts; }

Expr Expr::literal(Value v, SourceSpan span) { return Expr{LiteralExpr{std::move(v)}, std::move(span)}; }

Expr Expr::view(DataView v) {
  SourceSpan span = v.span;
  return Expr{ViewExpr{Box<DataView>(std::move(v))}, std::move(span)};
}

Expr Expr::unary(UnaryOp op, Expr operand, SourceSpan span) {
  return Expr{UnaryExpr{op, Box<Expr>(std::move(operand))}, std::move(span)};
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs, SourceSpan span) {
  return Expr{BinaryExpr{op, Box<Expr>(std::move(lhs)), Box<Expr>(std::move(rhs))}, std::move(span)};
}

Expr Expr::call(std::string fname, std::vector<Expr> args, SourceSpan span) {
  return Expr{CallExpr{std::move(fname), std::move(args)}, std::move(span)};
}

const DataView* Expr::as_view() const {
  const auto* v = std::get_if<ViewExpr>(&node);
  return v ? &*v->view : nullptr;
}

DataView DataView::var(std::string name, SourceSpan span) { return DataView{VarView{std::move(name)}, std::move(span)}; }

DataView DataView::field(DataView base, std::string field, SourceSpan span) {
  return DataView{FieldView{Box<DataView>(std::move(base)), std::move(field)}, std::move(span)};
}

DataView DataView::index(DataView base, std::vector<Expr> indices, SourceSpan span) {
  return DataView{IndexView{Box<DataView>(std::move(base)), std::move(indices)}, std::move(span)};
}

DataView DataView::bijector(DataView base, std::string name, std::vector<Expr> args, SourceSpan span) {
  return DataView{BijectorView{Box<DataView>(std::move(base)), std::move(name), std::move(args)}, std::move(span)};
}

const std::string& DataView::root() const {
  return std::visit(
      [](const auto& n) -> const std::string& {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarView>) {
          return n.name;
        } else {
          return n.base->root();
        }
      },
      node);
}

bool is_known_bijector(std::string_view name, std::size_t nargs) {
  if (name == "neg") return nargs == 0;
  if (name == "addconst" || name == "mulconst") return nargs == 1;
  return false;
}

std::string_view statement_kind(const Statement& s) {
  static constexpr std::array<std::string_view, 13> kNames = {
      "alloc", "dealloc", "instr", "call", "uncall", "if", "while",
      "for", "routine", "~routine", "invcheckoff", "safe", "block"};
  return kNames[s.node.index()];
}

const FunctionDef* Program::find(std::string_view name) const {
  for (const auto& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

const PrimitiveCallInfo* find_primitive_call(std::string_view name) {
  static constexpr std::array<PrimitiveCallInfo, 7> kPrimitives = {{
      {"SWAP", 2}, {"ROT", 3}, {"IROT", 3}, {"NEG", 1}, {"INC", 1}, {"DEC", 1}, {"XOR", 2}}};
  for (const auto& p : kPrimitives) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Validation

bool is_affine_index(const Expr& e) {
  if (const auto* lit = e.as_literal()) return lit->value.kind() == Kind::Int;
  if (const auto* v = e.as_view()) return std::holds_alternative<VarView>(v->node);
  if (const auto* u = std::get_if<UnaryExpr>(&e.node)) {
    return u->op == UnaryOp::Neg && is_affine_index(*u->operand);
  }
  if (const auto* b = std::get_if<BinaryExpr>(&e.node)) {
    switch (b->op) {
      case BinaryOp::Add:
      case BinaryOp::Sub: return is_affine_index(*b->lhs) && is_affine_index(*b->rhs);
      case BinaryOp::Mul: {
        auto is_const = [](const Expr& x) {
          const auto* lit = x.as_literal();
          return lit && lit->value.kind() == Kind::Int;
        };
        return (is_const(*b->lhs) && is_affine_index(*b->rhs)) || (is_const(*b->rhs) && is_affine_index(*b->lhs));
      }
      default: return false;
    }
  }
  return false;
}

namespace {

bool is_constant_expr(const Expr& e) {
  if (e.as_literal()) return true;
  if (const auto* u = std::get_if<UnaryExpr>(&e.node)) return is_constant_expr(*u->operand);
  return false;
}

class Validator {
 public:
  explicit Validator(const Program& p) : program_(p) {}

  std::vector<Diagnostic> run() {
    std::set<std::string> seen;
    for (const auto& f : program_.functions) {
      if (!seen.insert(f.name).second) report("DuplicateFunction", "function '" + f.name + "' is defined twice", f.span);
      if (find_primitive_call(f.name)) {
        report("DuplicateFunction", "function '" + f.name + "' shadows a primitive instruction", f.span);
      }
      check_function(f);
    }
    return std::move(diags_);
  }

 private:
  struct Scope {
    std::set<std::string> fixed;  // parameters and loop variables
    std::set<std::string> live;   // allocated ancillas
  };

  void report(std::string rule, std::string message, const SourceSpan& span) {
    diags_.push_back({std::move(rule), std::move(message), span});
  }

  void check_function(const FunctionDef& f) {
    Scope scope;
    for (const auto& p : f.params) {
      if (!scope.fixed.insert(p.name).second) {
        report("DuplicateParameter", "parameter '" + p.name + "' repeated in '" + f.name + "'", f.span);
      }
    }
    check_block(f.body, scope);
    for (const auto& name : scope.live) {
      report("UnbalancedAncilla", "ancilla '" + name + "' is never deallocated in '" + f.name + "'", f.span);
    }
  }

  // A nested lexical scope must leave the ancilla set as it found it.
  void check_nested(const Block& body, const Scope& outer, const SourceSpan& span,
                    const std::string* loop_var = nullptr) {
    Scope inner = outer;
    if (loop_var) inner.fixed.insert(*loop_var);
    check_block(body, inner);
    for (const auto& name : inner.live) {
      if (!outer.live.count(name)) {
        report("UnbalancedAncilla", "ancilla '" + name + "' escapes its scope", span);
      }
    }
    for (const auto& name : outer.live) {
      if (!inner.live.count(name)) {
        report("UnbalancedAncilla", "ancilla '" + name + "' deallocated in a nested scope", span);
      }
    }
  }

  void check_block(const Block& block, Scope& scope) {
    struct Open {
      std::set<std::string> before;
      std::set<std::string> after;
    };
    std::vector<Open> routines;
    for (const auto& s : block) {
      if (const auto* r = std::get_if<RoutineBegin>(&s.node)) {
        Open o{scope.live, {}};
        check_block(r->body, scope);
        o.after = scope.live;
        routines.push_back(std::move(o));
      } else if (std::holds_alternative<RoutineEnd>(s.node)) {
        if (routines.empty()) {
          report("UnmatchedRoutine", "~@routine without a preceding @routine", s.span);
          continue;
        }
        const Open& o = routines.back();
        // The uncompute undoes the routine's net effect on the ancilla set.
        for (const auto& n : o.after) {
          if (!o.before.count(n)) scope.live.erase(n);
        }
        for (const auto& n : o.before) {
          if (!o.after.count(n)) scope.live.insert(n);
        }
        routines.pop_back();
      } else {
        check_statement(s, scope);
      }
    }
    for (std::size_t i = 0; i < routines.size(); ++i) {
      report("UnmatchedRoutine", "@routine without a matching ~@routine",
             block.empty() ? SourceSpan{} : block.back().span);
    }
  }

  void check_statement(const Statement& s, Scope& scope) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, AncillaAlloc>) {
            check_expr(n.init, s.span);
            if (scope.fixed.count(n.name) || scope.live.count(n.name)) {
              report("DuplicateAncilla", "'" + n.name + "' is already bound", s.span);
            } else {
              scope.live.insert(n.name);
            }
          } else if constexpr (std::is_same_v<T, AncillaDealloc>) {
            check_expr(n.value, s.span);
            if (!scope.live.erase(n.name)) {
              report("UnbalancedAncilla", "deallocating '" + n.name + "' which is not an allocated ancilla", s.span);
            }
          } else if constexpr (std::is_same_v<T, InstrCall>) {
            check_view(n.target, s.span);
            const ScalarFunction* fn = find_function(n.fname);
            if (!fn) {
              report("UnknownFunction", "no scalar function '" + n.fname + "'", s.span);
            } else if (fn->arity != n.operands.size()) {
              report("ArityMismatch",
                     "'" + n.fname + "' takes " + std::to_string(fn->arity) + " operands, got " +
                         std::to_string(n.operands.size()),
                     s.span);
            }
            for (const auto& op : n.operands) {
              if (!op.as_view() && !op.as_literal()) {
                report("InvalidOperand", "instruction operands must be views or literals", s.span);
              }
              check_expr(op, s.span);
            }
          } else if constexpr (std::is_same_v<T, FnCall> || std::is_same_v<T, UncallFn>) {
            check_call(n.fname, n.args, s.span);
          } else if constexpr (std::is_same_v<T, IfStmt>) {
            check_expr(n.pre, s.span);
            if (n.post) check_expr(*n.post, s.span);
            check_nested(n.then_block, scope, s.span);
            check_nested(n.else_block, scope, s.span);
          } else if constexpr (std::is_same_v<T, WhileStmt>) {
            check_expr(n.pre, s.span);
            check_expr(n.post, s.span);
            check_nested(n.body, scope, s.span);
          } else if constexpr (std::is_same_v<T, ForStmt>) {
            check_expr(n.start, s.span);
            check_expr(n.step, s.span);
            check_expr(n.stop, s.span);
            if (scope.live.count(n.var)) report("DuplicateAncilla", "loop variable '" + n.var + "' is bound", s.span);
            check_nested(n.body, scope, s.span, &n.var);
          } else if constexpr (std::is_same_v<T, InvCheckOff>) {
            check_statement(*n.stmt, scope);
          } else if constexpr (std::is_same_v<T, SafeStmt>) {
            for (const auto& e : n.exprs) check_expr(e, s.span);
          } else if constexpr (std::is_same_v<T, BlockStmt>) {
            check_block(n.stmts, scope);
          }
        },
        s.node);
  }

  void check_call(const std::string& fname, const std::vector<DataView>& args, const SourceSpan& span) {
    for (const auto& a : args) check_view(a, span);
    std::size_t arity = 0;
    if (const auto* p = find_primitive_call(fname)) {
      arity = p->arity;
    } else if (const auto* f = program_.find(fname)) {
      arity = f->params.size();
    } else {
      report("UnknownFunction", "no function or primitive named '" + fname + "'", span);
      return;
    }
    if (arity != args.size()) {
      report("ArityMismatch",
             "'" + fname + "' takes " + std::to_string(arity) + " arguments, got " + std::to_string(args.size()),
             span);
    }
  }

  void check_view(const DataView& v, const SourceSpan& span) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, FieldView>) {
            check_view(*n.base, span);
          } else if constexpr (std::is_same_v<T, IndexView>) {
            check_view(*n.base, span);
            if (n.indices.empty() || n.indices.size() > 2) {
              report("NonAffineIndex", "arrays take one or two indices", span);
            }
            for (const auto& e : n.indices) {
              if (!is_affine_index(e)) report("NonAffineIndex", "index is not affine in integer variables", span);
            }
          } else if constexpr (std::is_same_v<T, BijectorView>) {
            check_view(*n.base, span);
            if (!is_known_bijector(n.name, n.args.size())) {
              report("UnknownBijector", "no bijector '" + n.name + "' with " + std::to_string(n.args.size()) + " args",
                     span);
            }
            for (const auto& e : n.args) {
              if (!is_constant_expr(e)) report("InvalidBijectorArgument", "bijector arguments must be constants", span);
            }
          }
        },
        v.node);
  }

  void check_expr(const Expr& e, const SourceSpan& span) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, ViewExpr>) {
            check_view(*n.view, span);
          } else if constexpr (std::is_same_v<T, UnaryExpr>) {
            check_expr(*n.operand, span);
          } else if constexpr (std::is_same_v<T, BinaryExpr>) {
            check_expr(*n.lhs, span);
            check_expr(*n.rhs, span);
          } else if constexpr (std::is_same_v<T, CallExpr>) {
            if (!is_expression_function(n.fname)) {
              report("UnknownFunction", "no expression function '" + n.fname + "'", span);
            }
            for (const auto& a : n.args) check_expr(a, span);
          }
        },
        e.node);
  }

  const Program& program_;
  std::vector<Diagnostic> diags_;
};

}  // namespace

std::vector<Diagnostic> validate(const Program& program) { return Validator(program).run(); }

// ---------------------------------------------------------------------------
// Env and storage identity

const Value& Env::at(const std::string& name) const {
  auto it = bindings_.find(name);
  if (it == bindings_.end()) throw RevError(ErrorKind::UnboundVariable, "'" + name + "' is not bound");
  return it->second;
}

Value& Env::at(const std::string& name) {
  auto it = bindings_.find(name);
  if (it == bindings_.end()) throw RevError(ErrorKind::UnboundVariable, "'" + name + "' is not bound");
  return it->second;
}

void Env::bind(const std::string& name, Value v) { bindings_.insert_or_assign(name, std::move(v)); }

Value Env::unbind(const std::string& name) {
  auto it = bindings_.find(name);
  if (it == bindings_.end()) throw RevError(ErrorKind::UnboundVariable, "'" + name + "' is not bound");
  Value v = std::move(it->second);
  bindings_.erase(it);
  ancillas_.erase(name);
  return v;
}

std::vector<std::string> Env::names() const {
  std::vector<std::string> out;
  out.reserve(bindings_.size());
  for (const auto& kv : bindings_) out.push_back(kv.first);
  return out;
}

bool StorageId::overlaps(const StorageId& other) const {
  if (root != other.root) return false;
  std::size_t n = std::min(path.size(), other.path.size());
  return std::equal(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(n), other.path.begin());
}

std::string StorageId::str() const {
  std::string s = root;
  for (const auto& p : path) s += p;
  return s;
}

std::int64_t eval_affine_index(const Env& env, const Expr& e) {
  if (const auto* lit = e.as_literal()) {
    if (lit->value.kind() == Kind::Int) return lit->value.as<std::int64_t>();
  } else if (const auto* v = e.as_view()) {
    if (const auto* var = std::get_if<VarView>(&v->node)) {
      const Value& val = env.at(var->name);
      if (val.kind() == Kind::Int) return val.as<std::int64_t>();
      throw RevError(ErrorKind::TypeError, "index variable '" + var->name + "' is not an Int", e.span);
    }
  } else if (const auto* u = std::get_if<UnaryExpr>(&e.node)) {
    if (u->op == UnaryOp::Neg) return -eval_affine_index(env, *u->operand);
  } else if (const auto* b = std::get_if<BinaryExpr>(&e.node)) {
    std::int64_t l = eval_affine_index(env, *b->lhs);
    std::int64_t r = eval_affine_index(env, *b->rhs);
    switch (b->op) {
      case BinaryOp::Add: return l + r;
      case BinaryOp::Sub: return l - r;
      case BinaryOp::Mul: return l * r;
      default: break;
    }
  }
  throw RevError(ErrorKind::TypeError, "index expression is not affine", e.span);
}

namespace {

const Value* walk_identity(const Env& env, const DataView& view, StorageId& id) {
  return std::visit(
      [&](const auto& n) -> const Value* {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarView>) {
          id.root = n.name;
          return &env.at(n.name);
        } else if constexpr (std::is_same_v<T, FieldView>) {
          const Value* base = walk_identity(env, *n.base, id);
          id.path.push_back("." + n.field);
          if (!base) return nullptr;
          if (base->kind() == Kind::Record) {
            const Value* f = base->as<Record>().find(n.field);
            if (!f) throw RevError(ErrorKind::NoSuchField, "no field '" + n.field + "'", view.span);
            return f;
          }
          if (base->kind() == Kind::GVar) {
            if (n.field == "x") return &*base->as<GVar>().x;
            if (n.field == "g") return &*base->as<GVar>().g;
          }
          return nullptr;
        } else if constexpr (std::is_same_v<T, IndexView>) {
          const Value* base = walk_identity(env, *n.base, id);
          if (!base || base->kind() != Kind::Array) {
            throw RevError(ErrorKind::TypeError, "indexing a non-array", view.span);
          }
          const Array& a = base->as<Array>();
          std::int64_t linear = 0;
          if (n.indices.size() == 1) {
            linear = eval_affine_index(env, n.indices[0]);
            if (linear < 1 || linear > static_cast<std::int64_t>(a.size())) {
              throw RevError(ErrorKind::IndexOutOfBounds, "index " + std::to_string(linear), view.span);
            }
          } else {
            if (a.rank() != 2) throw RevError(ErrorKind::IndexOutOfBounds, "two indices on a vector", view.span);
            std::int64_t i = eval_affine_index(env, n.indices[0]);
            std::int64_t j = eval_affine_index(env, n.indices[1]);
            auto rows = static_cast<std::int64_t>(a.shape[0]);
            auto cols = static_cast<std::int64_t>(a.shape[1]);
            if (i < 1 || i > rows || j < 1 || j > cols) {
              throw RevError(ErrorKind::IndexOutOfBounds,
                             "index [" + std::to_string(i) + "," + std::to_string(j) + "]", view.span);
            }
            linear = i + (j - 1) * rows;
          }
          id.path.push_back("[" + std::to_string(linear) + "]");
          return &a.data[static_cast<std::size_t>(linear - 1)];
        } else {
          return walk_identity(env, *n.base, id);
        }
      },
      view.node);
}

}  // namespace

StorageId canonical_view_identity(const Env& env, const DataView& view) {
  StorageId id;
  walk_identity(env, view, id);
  return id;
}

}  // namespace revlang
