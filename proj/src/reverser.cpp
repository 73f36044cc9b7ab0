#include "revlang/reverser.hpp"

#include <algorithm>

namespace revlang {

namespace {

// Primitive called with function syntax and its inverse primitive.
std::string inverse_primitive(const std::string& name) {
  if (name == "INC") return "DEC";
  if (name == "DEC") return "INC";
  if (name == "ROT") return "IROT";
  if (name == "IROT") return "ROT";
  return name;  // SWAP, NEG, XOR
}

Expr negate_step(const Expr& step) {
  if (const auto* u = std::get_if<UnaryExpr>(&step.node); u && u->op == UnaryOp::Neg) return *u->operand;
  if (const auto* lit = step.as_literal()) {
    const Value& v = lit->value;
    if (v.kind() == Kind::Int) return Expr::literal(-v.as<std::int64_t>(), step.span);
    if (v.kind() == Kind::Float) return Expr::literal(-v.as<double>(), step.span);
  }
  return Expr::unary(UnaryOp::Neg, step, step.span);
}

void expand_into(const Block& in, Block& out);

Statement expand_stmt(const Statement& s) {
  Statement r = s;
  std::visit(
      [&](auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, IfStmt>) {
          n.then_block = expand_routines(n.then_block);
          n.else_block = expand_routines(n.else_block);
        } else if constexpr (std::is_same_v<T, WhileStmt> || std::is_same_v<T, ForStmt>) {
          n.body = expand_routines(n.body);
        } else if constexpr (std::is_same_v<T, BlockStmt>) {
          n.stmts = expand_routines(n.stmts);
        } else if constexpr (std::is_same_v<T, InvCheckOff>) {
          if (std::holds_alternative<RoutineBegin>(n.stmt->node) || std::holds_alternative<RoutineEnd>(n.stmt->node)) {
            throw RevError(ErrorKind::UnmatchedRoutine, "routine markers cannot be wrapped by @invcheckoff", s.span);
          }
          *n.stmt = expand_stmt(*n.stmt);
        }
      },
      r.node);
  return r;
}

void expand_into(const Block& in, Block& out) {
  std::vector<std::pair<Block, SourceSpan>> open;
  for (const auto& s : in) {
    if (const auto* rb = std::get_if<RoutineBegin>(&s.node)) {
      Block body = expand_routines(rb->body);
      out.insert(out.end(), body.begin(), body.end());
      open.emplace_back(std::move(body), s.span);
    } else if (std::holds_alternative<RoutineEnd>(s.node)) {
      if (open.empty()) throw RevError(ErrorKind::UnmatchedRoutine, "~@routine without a matching @routine", s.span);
      Block inv = invert_block(open.back().first);
      open.pop_back();
      out.insert(out.end(), inv.begin(), inv.end());
    } else {
      out.push_back(expand_stmt(s));
    }
  }
  if (!open.empty()) {
    throw RevError(ErrorKind::UnmatchedRoutine, "@routine is never uncomputed by ~@routine", open.back().second);
  }
}

}  // namespace

InstrOp invert_op(InstrOp op) {
  switch (op) {
    case InstrOp::PlusEq: return InstrOp::MinusEq;
    case InstrOp::MinusEq: return InstrOp::PlusEq;
    case InstrOp::MulEq: return InstrOp::DivEq;
    case InstrOp::DivEq: return InstrOp::MulEq;
    case InstrOp::XorEq: return InstrOp::XorEq;
  }
  return op;
}

Block expand_routines(const Block& block) {
  Block out;
  expand_into(block, out);
  return out;
}

FunctionDef expand_routines(const FunctionDef& fdef) {
  FunctionDef r = fdef;
  r.body = expand_routines(fdef.body);
  return r;
}

Statement invert_statement(const Statement& s) {
  Statement r{BlockStmt{}, s.span};
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, AncillaAlloc>) {
          r.node = AncillaDealloc{n.name, n.init};
        } else if constexpr (std::is_same_v<T, AncillaDealloc>) {
          r.node = AncillaAlloc{n.name, n.value};
        } else if constexpr (std::is_same_v<T, InstrCall>) {
          InstrCall c = n;
          c.op = invert_op(n.op);
          r.node = std::move(c);
        } else if constexpr (std::is_same_v<T, FnCall>) {
          if (find_primitive_call(n.fname)) {
            r.node = FnCall{inverse_primitive(n.fname), n.args};
          } else {
            r.node = UncallFn{n.fname, n.args};
          }
        } else if constexpr (std::is_same_v<T, UncallFn>) {
          if (find_primitive_call(n.fname)) {
            r.node = UncallFn{inverse_primitive(n.fname), n.args};
          } else {
            r.node = FnCall{n.fname, n.args};
          }
        } else if constexpr (std::is_same_v<T, IfStmt>) {
          IfStmt i{n.post ? *n.post : n.pre, std::nullopt, invert_block(n.then_block), invert_block(n.else_block)};
          if (n.post) i.post = n.pre;
          r.node = std::move(i);
        } else if constexpr (std::is_same_v<T, WhileStmt>) {
          r.node = WhileStmt{n.post, n.pre, invert_block(n.body)};
        } else if constexpr (std::is_same_v<T, ForStmt>) {
          r.node = ForStmt{n.var, n.stop, negate_step(n.step), n.start, invert_block(n.body)};
        } else if constexpr (std::is_same_v<T, RoutineBegin> || std::is_same_v<T, RoutineEnd>) {
          throw RevError(ErrorKind::UnmatchedRoutine, "expand routines before inverting", s.span);
        } else if constexpr (std::is_same_v<T, InvCheckOff>) {
          r.node = InvCheckOff{Box<Statement>(invert_statement(*n.stmt))};
        } else if constexpr (std::is_same_v<T, SafeStmt>) {
          r.node = n;
        } else {
          r.node = BlockStmt{invert_block(n.stmts)};
        }
      },
      s.node);
  return r;
}

Block invert_block(const Block& block) {
  Block out;
  out.reserve(block.size());
  for (auto it = block.rbegin(); it != block.rend(); ++it) out.push_back(invert_statement(*it));
  return out;
}

FunctionDef invert_function(const FunctionDef& fdef) {
  FunctionDef r = fdef;
  r.body = invert_block(expand_routines(fdef.body));
  return r;
}

Program invert_program(const Program& program) {
  Program r;
  for (const auto& f : program.functions) r.functions.push_back(invert_function(f));
  return r;
}

}  // namespace revlang
