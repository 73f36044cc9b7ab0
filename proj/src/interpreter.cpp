#include "revlang/interpreter.hpp"

#include <array>
#include <cmath>
#include <iostream>
#include <limits>

#include "revlang/parser.hpp"
#include "revlang/reverser.hpp"

namespace revlang {

namespace {

// A storage cell, or one real component of a complex cell.
struct Place {
  Value* cell = nullptr;
  int component = -1;  // 0 = re, 1 = im
};

bool has_bijector(const DataView& v) {
  return std::visit(
      [](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarView>) {
          return false;
        } else if constexpr (std::is_same_v<T, BijectorView>) {
          return true;
        } else {
          return has_bijector(*n.base);
        }
      },
      v.node);
}

std::int64_t as_int(const Value& v0, const char* what) {
  const Value v = primal_of(v0);
  if (v.kind() == Kind::Int) return v.as<std::int64_t>();
  if (v.kind() == Kind::Bool) return v.as<bool>() ? 1 : 0;
  throw RevError(ErrorKind::TypeError, std::string(what) + " must be an Int, got " + std::string(kind_name(v.kind())));
}

bool truth(const Value& v0) {
  const Value v = primal_of(v0);
  if (v.kind() == Kind::Bool) return v.as<bool>();
  if (v.kind() == Kind::Int) return v.as<std::int64_t>() != 0;
  throw RevError(ErrorKind::TypeError, "condition is a " + std::string(kind_name(v.kind())) + ", not a Bool");
}

Place locate(Env& env, const DataView& view) {
  return std::visit(
      [&](const auto& n) -> Place {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarView>) {
          return {&env.at(n.name), -1};
        } else if constexpr (std::is_same_v<T, FieldView>) {
          Place base = locate(env, *n.base);
          if (base.component >= 0) throw RevError(ErrorKind::NoSuchField, "no field '" + n.field + "'", view.span);
          Value& b = *base.cell;
          if (b.kind() == Kind::Record) {
            Value* f = b.as<Record>().find(n.field);
            if (!f) throw RevError(ErrorKind::NoSuchField, "no field '" + n.field + "'", view.span);
            return {f, -1};
          }
          const Value* inner = &b;
          if (b.kind() == Kind::GVar) {
            if (n.field == "x") return {&*b.as<GVar>().x, -1};
            if (n.field == "g") return {&*b.as<GVar>().g, -1};
            inner = &*b.as<GVar>().x;
          }
          if (inner->kind() == Kind::Complex && (n.field == "re" || n.field == "im")) {
            return {&b, n.field == "re" ? 0 : 1};
          }
          throw RevError(ErrorKind::NoSuchField,
                         "a " + std::string(kind_name(b.kind())) + " has no field '" + n.field + "'", view.span);
        } else if constexpr (std::is_same_v<T, IndexView>) {
          Place base = locate(env, *n.base);
          if (base.component >= 0 || base.cell->kind() != Kind::Array) {
            throw RevError(ErrorKind::TypeError, "indexing a non-array", view.span);
          }
          Array& a = base.cell->as<Array>();
          std::int64_t linear = 0;
          if (n.indices.size() == 1) {
            linear = eval_affine_index(env, n.indices[0]);
            if (linear < 1 || linear > static_cast<std::int64_t>(a.size())) {
              throw RevError(ErrorKind::IndexOutOfBounds,
                             "index " + std::to_string(linear) + " outside 1:" + std::to_string(a.size()), view.span);
            }
          } else {
            if (a.rank() != 2) throw RevError(ErrorKind::IndexOutOfBounds, "two indices on a vector", view.span);
            std::int64_t i = eval_affine_index(env, n.indices[0]);
            std::int64_t j = eval_affine_index(env, n.indices[1]);
            auto rows = static_cast<std::int64_t>(a.shape[0]);
            auto cols = static_cast<std::int64_t>(a.shape[1]);
            if (i < 1 || i > rows || j < 1 || j > cols) {
              throw RevError(ErrorKind::IndexOutOfBounds,
                             "index [" + std::to_string(i) + ", " + std::to_string(j) + "] outside " +
                                 std::to_string(rows) + "x" + std::to_string(cols),
                             view.span);
            }
            linear = i + (j - 1) * rows;
          }
          return {&a.data[static_cast<std::size_t>(linear - 1)], -1};
        } else {
          throw RevError(ErrorKind::TypeError, "bijector views have no storage cell", view.span);
        }
      },
      view.node);
}

Value read_place(const Place& p) {
  if (p.component < 0) return *p.cell;
  auto part = [&](const Complex& z) { return p.component == 0 ? z.real() : z.imag(); };
  const Value& c = *p.cell;
  if (c.kind() == Kind::GVar) {
    const GVar& g = c.as<GVar>();
    return Value::gvar(part(g.x->as<Complex>()), part(g.g->as<Complex>()));
  }
  return part(c.as<Complex>());
}

void write_place(const Place& p, Value v) {
  if (p.component < 0) {
    *p.cell = std::move(v);
    return;
  }
  auto set = [&](Complex& z, double d) {
    if (p.component == 0) {
      z.real(d);
    } else {
      z.imag(d);
    }
  };
  Value& c = *p.cell;
  if (c.kind() == Kind::GVar) {
    GVar& g = c.as<GVar>();
    set(g.x->as<Complex>(), to_double(primal_of(v)));
    if (v.kind() == Kind::GVar) set(g.g->as<Complex>(), to_double(*v.as<GVar>().g));
    return;
  }
  set(c.as<Complex>(), to_double(primal_of(v)));
}

std::vector<Value> eval_all(const Env& env, const std::vector<Expr>& es);

Value eval_helper(const std::string& f, const std::vector<Value>& a) {
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (a.size() < lo || a.size() > hi) {
      throw RevError(ErrorKind::ArityMismatch, "'" + f + "' got " + std::to_string(a.size()) + " arguments");
    }
  };
  auto array = [&](const Value& v) -> const Array& {
    if (v.kind() != Kind::Array) throw RevError(ErrorKind::TypeError, "'" + f + "' needs an array");
    return v.as<Array>();
  };
  if (f == "size") {
    need(2, 2);
    const Array& x = array(a[0]);
    std::int64_t d = as_int(a[1], "dimension");
    if (d < 1) throw RevError(ErrorKind::IndexOutOfBounds, "dimension " + std::to_string(d));
    if (static_cast<std::size_t>(d) > x.rank()) return std::int64_t{1};
    return static_cast<std::int64_t>(x.shape[static_cast<std::size_t>(d - 1)]);
  }
  if (f == "length") {
    need(1, 1);
    return static_cast<std::int64_t>(array(a[0]).size());
  }
  if (f == "zeros") {
    need(1, 2);
    std::int64_t m = as_int(a[0], "size");
    std::int64_t n = a.size() == 2 ? as_int(a[1], "size") : 1;
    if (m < 0 || n < 0) throw RevError(ErrorKind::InvalidArgument, "negative size");
    std::vector<Value> data(static_cast<std::size_t>(m * n), Value(0.0));
    if (a.size() == 1) return Array::vector(std::move(data));
    return Array::matrix(static_cast<std::size_t>(m), static_cast<std::size_t>(n), std::move(data));
  }
  need(1, f == "complex" ? 2 : 1);
  const Value x = primal_of(a[0]);
  if (f == "ulog") {
    if (x.kind() == Kind::ULog) return x;
    double d = to_double(x);
    if (!(d > 0)) throw RevError(ErrorKind::DomainError, "ulog needs a positive value");
    return ULog::from_double(d);
  }
  if (f == "fixed") {
    if (x.kind() == Kind::Int) return Fixed::from_int(x.as<std::int64_t>());
    return Fixed::from_double(to_double(x));
  }
  if (f == "float") return to_double(x);
  if (f == "complex") {
    if (a.size() == 1) return Complex(to_double(x), 0.0);
    return Complex(to_double(x), to_double(primal_of(a[1])));
  }
  if (f == "real" || f == "imag") {
    if (x.kind() != Kind::Complex) return f == "real" ? to_double(x) : 0.0;
    return f == "real" ? x.as<Complex>().real() : x.as<Complex>().imag();
  }
  throw RevError(ErrorKind::UnknownFunction, "no function '" + f + "'");
}

Value eval_expr(const Env& env, const Expr& e) {
  try {
    return std::visit(
        [&](const auto& n) -> Value {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, LiteralExpr>) {
            return n.value;
          } else if constexpr (std::is_same_v<T, ViewExpr>) {
            return read_view(env, *n.view);
          } else if constexpr (std::is_same_v<T, UnaryExpr>) {
            Value x = eval_expr(env, *n.operand);
            return apply_function(*find_function(n.op == UnaryOp::Neg ? "neg" : "not"), std::span(&x, 1));
          } else if constexpr (std::is_same_v<T, BinaryExpr>) {
            static const char* kNames[] = {"add", "sub", "mul", "div", "pow", "eq", "ne",
                                           "lt",  "le",  "gt",  "ge",  "and", "or"};
            std::array<Value, 2> xs{eval_expr(env, *n.lhs), eval_expr(env, *n.rhs)};
            return apply_function(*find_function(kNames[static_cast<int>(n.op)]), xs);
          } else {
            std::vector<Value> xs = eval_all(env, n.args);
            if (const ScalarFunction* f = find_function(n.fname)) return apply_function(*f, xs);
            return eval_helper(n.fname, xs);
          }
        },
        e.node);
  } catch (const RevError& err) {
    throw err.with_span(e.span);
  }
}

std::vector<Value> eval_all(const Env& env, const std::vector<Expr>& es) {
  std::vector<Value> out;
  out.reserve(es.size());
  for (const auto& e : es) out.push_back(eval_expr(env, e));
  return out;
}

InstrKind instr_kind(InstrOp op) {
  switch (op) {
    case InstrOp::PlusEq: return InstrKind::PlusEq;
    case InstrOp::MinusEq: return InstrKind::MinusEq;
    case InstrOp::MulEq: return InstrKind::MulEq;
    case InstrOp::DivEq: return InstrKind::DivEq;
    case InstrOp::XorEq: return InstrKind::XorEq;
  }
  return InstrKind::PlusEq;
}

bool discrete(Kind k) { return k == Kind::Int || k == Kind::Bool || k == Kind::Fixed || k == Kind::ULog; }

Complex as_complex(const Value& v) {
  switch (v.kind()) {
    case Kind::Complex: return v.as<Complex>();
    case Kind::Dual: return {v.as<Dual>().v, v.as<Dual>().d};
    default: return {to_double(v), 0.0};
  }
}

std::string join_views(const std::vector<const DataView*>& views) {
  std::string s;
  for (const auto* v : views) {
    if (!s.empty()) s += ", ";
    s += pretty_print(*v);
  }
  return s;
}

}  // namespace

Value read_view(const Env& env, const DataView& view) {
  if (const auto* b = std::get_if<BijectorView>(&view.node)) {
    Value base = read_view(env, *b->base);
    std::vector<Value> args = eval_all(env, b->args);
    return apply_bijector(b->name, args, base, false);
  }
  return read_place(locate(const_cast<Env&>(env), view));
}

void write_view(Env& env, const DataView& view, Value v) {
  if (const auto* b = std::get_if<BijectorView>(&view.node)) {
    std::vector<Value> args = eval_all(env, b->args);
    write_view(env, *b->base, apply_bijector(b->name, args, v, true));
    return;
  }
  write_place(locate(env, view), std::move(v));
}

double max_deviation(const Value& a0, const Value& b0) {
  const Value a = a0.kind() == Kind::GVar ? primal_of(a0) : a0;
  const Value b = b0.kind() == Kind::GVar ? primal_of(b0) : b0;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (a.kind() == Kind::Array || b.kind() == Kind::Array) {
    if (a.kind() != b.kind() || a.as<Array>().shape != b.as<Array>().shape) return kInf;
    double m = 0.0;
    for (std::size_t i = 0; i < a.as<Array>().size(); ++i) {
      m = std::max(m, max_deviation(a.as<Array>().data[i], b.as<Array>().data[i]));
    }
    return m;
  }
  if (a.kind() == Kind::Record || b.kind() == Kind::Record) {
    if (a.kind() != b.kind() || a.as<Record>().fields.size() != b.as<Record>().fields.size()) return kInf;
    double m = 0.0;
    for (std::size_t i = 0; i < a.as<Record>().fields.size(); ++i) {
      const auto& fa = a.as<Record>().fields[i];
      const auto& fb = b.as<Record>().fields[i];
      if (fa.first != fb.first) return kInf;
      m = std::max(m, max_deviation(fa.second, fb.second));
    }
    return m;
  }
  if (a.kind() == Kind::ULog && b.kind() == Kind::ULog) {
    return std::abs(a.as<ULog>().exponent() - b.as<ULog>().exponent());
  }
  double d = std::abs(as_complex(a) - as_complex(b));
  return std::isnan(d) ? kInf : d;
}

bool values_match(const Value& a0, const Value& b0, double tol) {
  const Value a = a0.kind() == Kind::GVar ? primal_of(a0) : a0;
  const Value b = b0.kind() == Kind::GVar ? primal_of(b0) : b0;
  if (a.kind() == Kind::Array || b.kind() == Kind::Array) {
    if (a.kind() != b.kind() || a.as<Array>().shape != b.as<Array>().shape) return false;
    for (std::size_t i = 0; i < a.as<Array>().size(); ++i) {
      if (!values_match(a.as<Array>().data[i], b.as<Array>().data[i], tol)) return false;
    }
    return true;
  }
  if (a.kind() == Kind::Record || b.kind() == Kind::Record) {
    if (a.kind() != b.kind() || a.as<Record>().fields.size() != b.as<Record>().fields.size()) return false;
    for (std::size_t i = 0; i < a.as<Record>().fields.size(); ++i) {
      const auto& fa = a.as<Record>().fields[i];
      const auto& fb = b.as<Record>().fields[i];
      if (fa.first != fb.first || !values_match(fa.second, fb.second, tol)) return false;
    }
    return true;
  }
  if (discrete(a.kind()) && discrete(b.kind())) {
    if (a.kind() == b.kind()) return a == b;
    return to_double(a) == to_double(b);
  }
  return max_deviation(a, b) <= tol;
}

// ---------------------------------------------------------------------------
// Interpreter

Interpreter::Interpreter(const Program& program, ExecOptions opts) : program_(program), opts_(opts) {
  if (!(opts_.float_tolerance >= 0)) throw RevError(ErrorKind::InvalidArgument, "float_tolerance must be >= 0");
  if (opts_.max_steps <= 0) throw RevError(ErrorKind::InvalidArgument, "max_steps must be positive");
  for (const auto& f : program_.functions) forward_.emplace(f.name, expand_routines(f));
}

Value Interpreter::eval(const Env& env, const Expr& e) const { return eval_expr(env, e); }

const FunctionDef& Interpreter::function(const std::string& name, bool inverse, const SourceSpan& site) {
  auto it = forward_.find(name);
  if (it == forward_.end()) throw RevError(ErrorKind::UnknownFunction, "no function '" + name + "'", site);
  if (!inverse) return it->second;
  auto inv = inverse_.find(name);
  if (inv == inverse_.end()) inv = inverse_.emplace(name, invert_function(it->second)).first;
  return inv->second;
}

std::vector<Value> Interpreter::run(const std::string& fname, std::vector<Value> args) {
  return invoke(function(fname, false, {}), std::move(args), {});
}

std::vector<Value> Interpreter::uncall(const std::string& fname, std::vector<Value> args) {
  return invoke(function(fname, true, {}), std::move(args), {});
}

std::vector<Value> Interpreter::invoke(const FunctionDef& f, std::vector<Value> args, const SourceSpan& site) {
  if (args.size() != f.params.size()) {
    throw RevError(ErrorKind::ArityMismatch,
                   "'" + f.name + "' takes " + std::to_string(f.params.size()) + " arguments, got " +
                       std::to_string(args.size()),
                   site);
  }
  if (depth_ >= opts_.max_call_depth) {
    throw RevError(ErrorKind::FuelExhausted, "call depth exceeds " + std::to_string(opts_.max_call_depth), site);
  }
  Env env;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const Param& p = f.params[i];
    Kind k = primal_of(args[i]).kind();
    if (p.kind == ParamKind::Array && k != Kind::Array) {
      throw RevError(ErrorKind::TypeError, "parameter '" + p.name + "' expects an array", site);
    }
    if (p.kind == ParamKind::Scalar && !is_scalar(args[i].kind()) && args[i].kind() != Kind::GVar) {
      throw RevError(ErrorKind::TypeError, "parameter '" + p.name + "' expects a scalar", site);
    }
    env.bind(p.name, std::move(args[i]));
  }
  ++depth_;
  struct DepthGuard {
    std::size_t& d;
    ~DepthGuard() { --d; }
  } guard{depth_};
  exec_block(env, f.body);
  if (!env.ancillas().empty()) {
    throw RevError(ErrorKind::UnbalancedAncilla, "ancilla '" + *env.ancillas().begin() + "' is never deallocated",
                   f.span);
  }
  std::vector<Value> out;
  out.reserve(f.params.size());
  for (const auto& p : f.params) out.push_back(env.unbind(p.name));
  if (env.size() != 0) {
    throw RevError(ErrorKind::UnbalancedAncilla, "'" + env.names().front() + "' outlives the call", f.span);
  }
  return out;
}

void Interpreter::exec_block(Env& env, const Block& b) {
  for (const auto& s : b) exec(env, s);
}

void Interpreter::check(bool ok, ErrorKind kind, const std::string& message, const SourceSpan& span) {
  if (ok) {
    ++stats_.passed;
    return;
  }
  ++stats_.failed;
  throw RevError(kind, message, span);
}

void Interpreter::trace(const Statement& s, const std::string& views) {
  if (!opts_.trace) return;
  std::ostream& os = opts_.trace_out ? *opts_.trace_out : std::cerr;
  os << s.span.str() << '\t' << statement_kind(s) << '\t' << views << '\n';
}

void Interpreter::exec(Env& env, const Statement& s) {
  if (++stats_.steps > opts_.max_steps) {
    throw RevError(ErrorKind::FuelExhausted, "step budget of " + std::to_string(opts_.max_steps) + " exhausted",
                   s.span);
  }
  try {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, AncillaAlloc>) {
            trace(s, n.name);
            if (env.has(n.name)) {
              throw RevError(ErrorKind::DuplicateAncilla, "'" + n.name + "' is already bound", s.span);
            }
            Value v = eval(env, n.init);
            env.bind(n.name, opts_.gradient ? promote_gvar(std::move(v)) : std::move(v));
            env.mark_ancilla(n.name);
          } else if constexpr (std::is_same_v<T, AncillaDealloc>) {
            trace(s, n.name);
            const Value& cur = env.at(n.name);
            if (opts_.invcheck) {
              Value expected = eval(env, n.value);
              double residual = max_deviation(cur, expected);
              check(values_match(cur, expected, opts_.float_tolerance), ErrorKind::DirtyAncilla,
                    "ancilla '" + n.name + "' holds " + to_string(primal_of(cur)) + ", expected " +
                        to_string(primal_of(expected)) + " (residual " + to_string(Value(residual)) + ")",
                    s.span);
            }
            env.unbind(n.name);
          } else if constexpr (std::is_same_v<T, InstrCall>) {
            exec_instr(env, n, s);
          } else if constexpr (std::is_same_v<T, FnCall>) {
            exec_call(env, n.fname, n.args, false, s);
          } else if constexpr (std::is_same_v<T, UncallFn>) {
            exec_call(env, n.fname, n.args, true, s);
          } else if constexpr (std::is_same_v<T, IfStmt>) {
            trace(s, "");
            bool c = truth(eval(env, n.pre));
            exec_block(env, c ? n.then_block : n.else_block);
            if (opts_.invcheck) {
              bool post = truth(eval(env, n.post ? *n.post : n.pre));
              check(post == c, ErrorKind::PostconditionMismatch,
                    std::string("branch postcondition is ") + (post ? "true" : "false") + " but the precondition was " +
                        (c ? "true" : "false"),
                    s.span);
            }
          } else if constexpr (std::is_same_v<T, WhileStmt>) {
            trace(s, "");
            if (opts_.invcheck) {
              check(!truth(eval(env, n.post)), ErrorKind::PostconditionMismatch,
                    "loop postcondition must be false on entry", s.span);
            }
            while (truth(eval(env, n.pre))) {
              exec_block(env, n.body);
              if (opts_.invcheck) {
                check(truth(eval(env, n.post)), ErrorKind::PostconditionMismatch,
                      "loop postcondition must be true after every iteration", s.span);
              }
            }
          } else if constexpr (std::is_same_v<T, ForStmt>) {
            trace(s, n.var);
            const Value v_start = eval(env, n.start), v_step = eval(env, n.step), v_stop = eval(env, n.stop);
            std::int64_t start = as_int(v_start, "loop start");
            std::int64_t step = as_int(v_step, "loop step");
            std::int64_t stop = as_int(v_stop, "loop stop");
            if (step == 0) throw RevError(ErrorKind::InvalidArgument, "loop step is zero", s.span);
            if (env.has(n.var)) {
              throw RevError(ErrorKind::DuplicateAncilla, "loop variable '" + n.var + "' is already bound", s.span);
            }
            for (std::int64_t i = start; step > 0 ? i <= stop : i >= stop; i += step) {
              env.bind(n.var, i);
              exec_block(env, n.body);
              if (opts_.invcheck) {
                check(env.at(n.var) == Value(i), ErrorKind::LoopIteratorMutated,
                      "loop variable '" + n.var + "' was modified by the body", s.span);
              }
            }
            if (env.has(n.var)) env.unbind(n.var);
            if (opts_.invcheck) {
              bool same = eval(env, n.start) == v_start && eval(env, n.step) == v_step && eval(env, n.stop) == v_stop;
              check(same, ErrorKind::LoopIteratorMutated, "loop range changed while iterating", s.span);
            }
          } else if constexpr (std::is_same_v<T, RoutineBegin> || std::is_same_v<T, RoutineEnd>) {
            throw RevError(ErrorKind::UnmatchedRoutine, "routine markers must be expanded before execution", s.span);
          } else if constexpr (std::is_same_v<T, InvCheckOff>) {
            trace(s, "");
            bool saved = opts_.invcheck;
            opts_.invcheck = false;
            try {
              exec(env, *n.stmt);
            } catch (...) {
              opts_.invcheck = saved;
              throw;
            }
            opts_.invcheck = saved;
          } else if constexpr (std::is_same_v<T, SafeStmt>) {
            trace(s, "");
            if (n.kind == SafeKind::Assert) {
              for (const auto& e : n.exprs) {
                if (!truth(eval(env, e))) {
                  throw RevError(ErrorKind::AssertFailed, "assertion " + pretty_print(e) + " failed", s.span);
                }
              }
            } else if (opts_.show_out) {
              for (const auto& e : n.exprs) {
                *opts_.show_out << pretty_print(e) << " = " << to_string(primal_of(eval(env, e))) << '\n';
              }
            }
          } else {
            trace(s, "");
            exec_block(env, n.stmts);
          }
        },
        s.node);
  } catch (const RevError& e) {
    throw e.with_span(s.span);
  }
}

void Interpreter::exec_instr(Env& env, const InstrCall& c, const Statement& s) {
  std::vector<const DataView*> touched{&c.target};
  for (const auto& o : c.operands) {
    if (const DataView* v = o.as_view()) touched.push_back(v);
  }
  if (opts_.trace) trace(s, join_views(touched));

  const ScalarFunction* fn = find_function(c.fname);
  if (!fn) throw RevError(ErrorKind::UnknownFunction, "no instruction function '" + c.fname + "'", s.span);

  StorageId target = canonical_view_identity(env, c.target);
  std::vector<std::optional<StorageId>> ids;
  for (const auto& o : c.operands) {
    const DataView* v = o.as_view();
    if (!v) {
      ids.emplace_back();
      continue;
    }
    StorageId id = canonical_view_identity(env, *v);
    if (id.overlaps(target)) {
      throw RevError(ErrorKind::AliasedArguments,
                     "'" + id.str() + "' is both updated and read by this instruction", s.span);
    }
    if (opts_.gradient) {
      for (const auto& prev : ids) {
        if (prev && prev->overlaps(id)) {
          throw RevError(ErrorKind::AliasedArguments,
                         "'" + id.str() + "' is read twice; its gradient would be a shared write. "
                         "Rewrite with a single read, e.g. y += x ^ 2",
                         s.span);
        }
      }
    }
    ids.push_back(std::move(id));
  }

  std::vector<Value> args;
  args.reserve(c.operands.size() + 1);
  args.push_back(read_view(env, c.target));
  for (const auto& o : c.operands) args.push_back(eval(env, o));

  std::vector<Value> out = dispatch_instr({instr_kind(c.op), fn}, std::move(args), numeric());
  write_view(env, c.target, std::move(out[0]));
  for (std::size_t i = 0; i < c.operands.size(); ++i) {
    const DataView* v = c.operands[i].as_view();
    if (v && out[i + 1].kind() == Kind::GVar) write_view(env, *v, std::move(out[i + 1]));
  }
}

void Interpreter::exec_call(Env& env, const std::string& fname, const std::vector<DataView>& args, bool inverse,
                            const Statement& s) {
  std::vector<const DataView*> touched;
  for (const auto& a : args) touched.push_back(&a);
  if (opts_.trace) trace(s, join_views(touched));

  std::vector<StorageId> ids;
  for (const auto& a : args) {
    StorageId id = canonical_view_identity(env, a);
    for (const auto& prev : ids) {
      if (prev.overlaps(id)) {
        throw RevError(ErrorKind::AliasedArguments,
                       "'" + prev.str() + "' and '" + id.str() + "' share storage in a call to '" + fname + "'",
                       s.span);
      }
    }
    ids.push_back(std::move(id));
  }

  if (auto kind = primitive_kind(fname)) {
    PrimitiveInstr in{*kind, nullptr};
    if (inverse) in = invert_instr(in);
    std::vector<Value> vals;
    for (const auto& a : args) vals.push_back(read_view(env, a));
    std::vector<Value> out = dispatch_instr(in, std::move(vals), numeric());
    for (std::size_t i = 0; i < args.size(); ++i) write_view(env, args[i], std::move(out[i]));
    return;
  }

  const FunctionDef& f = function(fname, inverse, s.span);
  // Plain views are moved in and out; indices are resolved before any move.
  std::vector<Place> places(args.size());
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (!has_bijector(args[i])) places[i] = locate(env, args[i]);
  }
  std::vector<Value> vals;
  vals.reserve(args.size());
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (places[i].cell && places[i].component < 0) {
      vals.push_back(std::move(*places[i].cell));
    } else if (places[i].cell) {
      vals.push_back(read_place(places[i]));
    } else {
      vals.push_back(read_view(env, args[i]));
    }
  }
  std::vector<Value> out = invoke(f, std::move(vals), s.span);
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (places[i].cell) {
      write_place(places[i], std::move(out[i]));
    } else {
      write_view(env, args[i], std::move(out[i]));
    }
  }
}

// ---------------------------------------------------------------------------

std::vector<Value> run(const Program& program, const std::string& fname, std::vector<Value> args,
                       const ExecOptions& opts) {
  return Interpreter(program, opts).run(fname, std::move(args));
}

std::vector<Value> uncall(const Program& program, const std::string& fname, std::vector<Value> args,
                          const ExecOptions& opts) {
  return Interpreter(program, opts).uncall(fname, std::move(args));
}

ReversibilityReport check_reversibility(const Program& program, const std::string& fname,
                                        const std::vector<Value>& args, const ExecOptions& opts) {
  ReversibilityReport r;
  std::optional<Interpreter> fwd, bwd;
  try {
    fwd.emplace(program, opts);
    std::vector<Value> out = fwd->run(fname, args);
    r.forward = fwd->stats();
    bwd.emplace(program, opts);
    std::vector<Value> back = bwd->uncall(fname, std::move(out));
    r.backward = bwd->stats();
    r.ok = true;
    for (std::size_t i = 0; i < args.size(); ++i) {
      r.max_deviation = std::max(r.max_deviation, max_deviation(args[i], back[i]));
      r.ok = r.ok && values_match(args[i], back[i], opts.float_tolerance);
    }
    if (!r.ok) r.message = "uncall does not restore the arguments";
  } catch (const RevError& e) {
    if (fwd) r.forward = fwd->stats();
    if (bwd) r.backward = bwd->stats();
    r.ok = false;
    r.error = e.kind();
    r.message = e.what();
    r.ancilla_balanced = e.kind() != ErrorKind::DirtyAncilla && e.kind() != ErrorKind::UnbalancedAncilla &&
                         e.kind() != ErrorKind::DuplicateAncilla;
  }
  return r;
}

}  // namespace revlang
