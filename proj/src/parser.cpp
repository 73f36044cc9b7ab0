#include "revlang/parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <optional>
#include <unordered_map>

#include "revlang/numerics.hpp"

namespace revlang {

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Ident, Number, Sym, At, Eof };

struct Token {
  Tok kind = Tok::Eof;
  std::string text;
  Value value;
  int line = 1;
  int col = 1;
  int end_line = 1;
  int end_col = 1;
};

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

class Lexer {
 public:
  Lexer(std::string_view text, std::shared_ptr<const std::string> file) : src_(text), file_(std::move(file)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.line = line_;
      t.col = col_;
      if (pos_ >= src_.size()) {
        t.kind = Tok::Eof;
        t.end_line = line_;
        t.end_col = col_;
        out.push_back(std::move(t));
        return out;
      }
      lex_one(t);
      t.end_line = line_;
      t.end_col = col_;
      out.push_back(std::move(t));
    }
  }

 private:
  static constexpr std::pair<std::string_view, std::string_view> kUnicode[] = {
      {"\xE2\x86\x90", "<-"}, {"\xE2\x86\x92", "->"}, {"\xE2\x8A\xBB=", "xor="}, {"\xE2\x96\xB7", "|>"}};

  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(msg, SourceSpan{file_, line_, col_, line_, col_ + 1});
  }

  char peek(std::size_t off = 0) const { return pos_ + off < src_.size() ? src_[pos_ + off] : '\0'; }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      unsigned char c = static_cast<unsigned char>(src_[pos_++]);
      if (c == '\n') {
        ++line_;
        col_ = 1;
      } else if ((c & 0xC0) != 0x80) {
        ++col_;
      }
    }
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = peek();
      if (c == '#') {
        while (pos_ < src_.size() && peek() != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == ';') {
        advance();
      } else {
        return;
      }
    }
  }

  bool starts_with(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

  void lex_one(Token& t) {
    for (const auto& [u, ascii] : kUnicode) {
      if (starts_with(u)) {
        advance(u.size());
        t.kind = Tok::Sym;
        t.text = std::string(ascii);
        return;
      }
    }
    unsigned char c = static_cast<unsigned char>(peek());
    if (c == '@') {
      advance();
      std::size_t start = pos_;
      while (pos_ < src_.size() && is_ident_char(static_cast<unsigned char>(peek()))) advance();
      if (pos_ == start) fail("expected a macro name after '@'");
      t.kind = Tok::At;
      t.text = std::string(src_.substr(start, pos_ - start));
      return;
    }
    if (std::isdigit(c) || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      lex_number(t);
      return;
    }
    if (is_ident_start(c)) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && is_ident_char(static_cast<unsigned char>(peek()))) advance();
      while (peek() == '!' && peek(1) != '=') advance();
      t.text = std::string(src_.substr(start, pos_ - start));
      if (t.text == "xor" && peek() == '=' && peek(1) != '=') {
        advance();
        t.kind = Tok::Sym;
        t.text = "xor=";
        return;
      }
      t.kind = Tok::Ident;
      return;
    }
    static constexpr std::string_view kTwo[] = {"<-", "->", "|>", "+=", "-=", "*=", "/=", "==", "!=", "<=", ">=", "&&", "||"};
    for (auto s : kTwo) {
      if (starts_with(s)) {
        advance(2);
        t.kind = Tok::Sym;
        t.text = std::string(s);
        return;
      }
    }
    static constexpr std::string_view kOne = "()[],.:+-*/^<>!~=";
    if (kOne.find(static_cast<char>(c)) != std::string_view::npos) {
      advance();
      t.kind = Tok::Sym;
      t.text = std::string(1, static_cast<char>(c));
      return;
    }
    fail(std::string("unexpected character '") + static_cast<char>(c) + "'");
  }

  void lex_number(Token& t) {
    std::size_t start = pos_;
    bool is_float = false;
    while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      is_float = true;
      advance();
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (std::isdigit(static_cast<unsigned char>(peek(1))) ||
         ((peek(1) == '-' || peek(1) == '+') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
      is_float = true;
      advance(2);
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
    }
    std::string_view digits = src_.substr(start, pos_ - start);
    std::string suffix;
    for (std::string_view s : {"fx", "im", "ul"}) {
      if (starts_with(s) && !is_ident_char(static_cast<unsigned char>(peek(2)))) {
        suffix = std::string(s);
        advance(2);
        break;
      }
    }
    if (is_ident_char(static_cast<unsigned char>(peek()))) fail("malformed number literal");
    t.kind = Tok::Number;
    t.text = std::string(src_.substr(start, pos_ - start));
    double d = 0.0;
    std::from_chars(digits.data(), digits.data() + digits.size(), d);
    if (suffix == "fx") {
      t.value = Fixed::from_double(d);
    } else if (suffix == "im") {
      t.value = Complex(0.0, d);
    } else if (suffix == "ul") {
      if (!(d > 0)) fail("ULog literals must be positive");
      t.value = ULog::from_double(d);
    } else if (is_float) {
      t.value = d;
    } else {
      std::int64_t i = 0;
      auto res = std::from_chars(digits.data(), digits.data() + digits.size(), i);
      if (res.ec != std::errc()) fail("integer literal out of range");
      t.value = i;
    }
  }

  std::string_view src_;
  std::shared_ptr<const std::string> file_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// ---------------------------------------------------------------------------
// Parser

bool is_keyword(std::string_view s) {
  return s == "fn" || s == "end" || s == "if" || s == "else" || s == "while" || s == "for" || s == "begin" ||
         s == "true" || s == "false";
}

Value negate_literal(const Value& v) {
  switch (v.kind()) {
    case Kind::Int: return -v.as<std::int64_t>();
    case Kind::Float: return -v.as<double>();
    case Kind::Fixed: return -v.as<Fixed>();
    case Kind::Complex: return -v.as<Complex>();
    default: return v;
  }
}

std::string_view binary_fname(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "add";
    case BinaryOp::Sub: return "sub";
    case BinaryOp::Mul: return "mul";
    case BinaryOp::Div: return "div";
    case BinaryOp::Pow: return "pow";
    case BinaryOp::Eq: return "eq";
    case BinaryOp::Ne: return "ne";
    case BinaryOp::Lt: return "lt";
    case BinaryOp::Le: return "le";
    case BinaryOp::Gt: return "gt";
    case BinaryOp::Ge: return "ge";
    case BinaryOp::And: return "and";
    case BinaryOp::Or: return "or";
  }
  return "";
}

class Parser {
 public:
  Parser(std::vector<Token> toks, std::shared_ptr<const std::string> file)
      : toks_(std::move(toks)), file_(std::move(file)) {}

  Program program() {
    Program p;
    while (!at_eof()) p.functions.push_back(function());
    return p;
  }

  Expr standalone_expr() {
    Expr e = expr();
    if (!at_eof()) fail("unexpected '" + cur().text + "' after expression");
    return e;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& ahead(std::size_t n = 1) const { return toks_[std::min(pos_ + n, toks_.size() - 1)]; }
  bool at_eof() const { return cur().kind == Tok::Eof; }
  bool is_sym(std::string_view s, std::size_t off = 0) const {
    const Token& t = ahead(off);
    return t.kind == Tok::Sym && t.text == s;
  }
  bool is_word(std::string_view s) const { return cur().kind == Tok::Ident && cur().text == s; }
  bool is_at(std::string_view s) const { return cur().kind == Tok::At && cur().text == s; }

  SourceSpan span_from(const Token& start) const {
    const Token& last = toks_[pos_ > 0 ? pos_ - 1 : 0];
    return SourceSpan{file_, start.line, start.col, last.end_line, last.end_col};
  }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = cur();
    throw SyntaxError(msg, SourceSpan{file_, t.line, t.col, t.end_line, t.end_col});
  }

  const Token& take() { return toks_[pos_++]; }

  void expect_sym(std::string_view s) {
    if (!is_sym(s)) fail("expected '" + std::string(s) + "', found '" + describe(cur()) + "'");
    ++pos_;
  }
  void expect_word(std::string_view s) {
    if (!is_word(s)) fail("expected '" + std::string(s) + "', found '" + describe(cur()) + "'");
    ++pos_;
  }
  static std::string describe(const Token& t) { return t.kind == Tok::Eof ? "end of input" : t.text; }

  std::string name() {
    if (cur().kind != Tok::Ident) fail("expected a name, found '" + describe(cur()) + "'");
    if (is_keyword(cur().text)) fail("'" + cur().text + "' is a reserved word");
    return take().text;
  }

  FunctionDef function() {
    const Token& start = cur();
    expect_word("fn");
    FunctionDef f;
    f.name = name();
    expect_sym("(");
    while (!is_sym(")")) {
      Param p;
      p.name = name();
      if (is_sym(":") && is_sym(":", 1)) {
        pos_ += 2;
        std::string kind = name();
        if (kind == "scalar") {
          p.kind = ParamKind::Scalar;
        } else if (kind == "array") {
          p.kind = ParamKind::Array;
        } else if (kind == "any") {
          p.kind = ParamKind::Any;
        } else {
          fail("unknown parameter kind '" + kind + "'");
        }
      }
      f.params.push_back(std::move(p));
      if (!is_sym(",")) break;
      ++pos_;
    }
    expect_sym(")");
    f.body = block();
    expect_word("end");
    f.span = span_from(start);
    return f;
  }

  Block block() {
    Block b;
    while (!at_eof() && !is_word("end") && !is_word("else")) b.push_back(statement());
    if (at_eof()) fail("missing 'end'");
    return b;
  }

  Statement statement() {
    const Token& start = cur();
    Statement s{BlockStmt{}, {}};
    if (cur().kind == Tok::At) {
      std::string macro = take().text;
      if (macro == "routine") {
        Block body;
        if (is_word("begin")) {
          ++pos_;
          body = block();
          expect_word("end");
        } else {
          body.push_back(statement());
        }
        s.node = RoutineBegin{std::move(body)};
      } else if (macro == "invcheckoff") {
        s.node = InvCheckOff{Box<Statement>(statement())};
      } else if (macro == "safe") {
        if (is_at("assert")) {
          ++pos_;
          s.node = SafeStmt{SafeKind::Assert, {expr()}};
        } else if (is_at("show")) {
          ++pos_;
          std::vector<Expr> es{expr()};
          while (is_sym(",")) {
            ++pos_;
            es.push_back(expr());
          }
          s.node = SafeStmt{SafeKind::Show, std::move(es)};
        } else {
          fail("@safe must be followed by @assert or @show");
        }
      } else {
        --pos_;
        fail("unknown macro '@" + macro + "'");
      }
    } else if (is_sym("~")) {
      ++pos_;
      if (is_at("routine")) {
        ++pos_;
        s.node = RoutineEnd{};
      } else {
        std::string f = name();
        s.node = UncallFn{f, call_args()};
      }
    } else if (is_word("if")) {
      s.node = if_stmt();
    } else if (is_word("while")) {
      ++pos_;
      expect_sym("(");
      Expr pre = expr();
      expect_sym(",");
      Expr post = expr();
      expect_sym(")");
      Block body = block();
      expect_word("end");
      s.node = WhileStmt{std::move(pre), std::move(post), std::move(body)};
    } else if (is_word("for")) {
      s.node = for_stmt();
    } else if (is_word("begin")) {
      ++pos_;
      Block body = block();
      expect_word("end");
      s.node = BlockStmt{std::move(body)};
    } else if (cur().kind == Tok::Ident && is_sym("(", 1) && !is_keyword(cur().text)) {
      std::string f = name();
      s.node = FnCall{f, call_args()};
    } else if (cur().kind == Tok::Ident) {
      s.node = assignment();
    } else {
      fail("expected a statement, found '" + describe(cur()) + "'");
    }
    s.span = span_from(start);
    return s;
  }

  IfStmt if_stmt() {
    expect_word("if");
    expect_sym("(");
    IfStmt s{expr(), std::nullopt, {}, {}};
    expect_sym(",");
    if (is_sym("~") && is_sym(")", 1)) {
      ++pos_;
    } else {
      s.post = expr();
    }
    expect_sym(")");
    s.then_block = block();
    if (is_word("else")) {
      ++pos_;
      s.else_block = block();
    }
    expect_word("end");
    return s;
  }

  ForStmt for_stmt() {
    expect_word("for");
    std::string var = name();
    expect_sym("=");
    Expr start = expr();
    expect_sym(":");
    Expr second = expr();
    Expr step = Expr::literal(std::int64_t{1});
    Expr stop = std::move(second);
    if (is_sym(":")) {
      ++pos_;
      step = std::move(stop);
      stop = expr();
    }
    Block body = block();
    expect_word("end");
    return ForStmt{std::move(var), std::move(start), std::move(step), std::move(stop), std::move(body)};
  }

  std::vector<DataView> call_args() {
    expect_sym("(");
    std::vector<DataView> args;
    while (!is_sym(")")) {
      if (cur().kind != Tok::Ident || is_keyword(cur().text) || is_sym("(", 1)) {
        fail("function arguments must be data views");
      }
      args.push_back(view());
      if (!is_sym(",")) break;
      ++pos_;
    }
    expect_sym(")");
    return args;
  }

  decltype(Statement::node) assignment() {
    const Token& start = cur();
    DataView target = view();
    if (is_sym("<-") || is_sym("->")) {
      bool alloc = cur().text == "<-";
      ++pos_;
      const auto* var = std::get_if<VarView>(&target.node);
      if (!var) {
        pos_ = static_cast<std::size_t>(&start - toks_.data());
        fail("ancillas must be plain variables");
      }
      Expr e = expr();
      if (alloc) return AncillaAlloc{var->name, std::move(e)};
      return AncillaDealloc{var->name, std::move(e)};
    }
    static const std::unordered_map<std::string, InstrOp> kOps = {{"+=", InstrOp::PlusEq},
                                                                  {"-=", InstrOp::MinusEq},
                                                                  {"*=", InstrOp::MulEq},
                                                                  {"/=", InstrOp::DivEq},
                                                                  {"xor=", InstrOp::XorEq}};
    if (cur().kind != Tok::Sym || !kOps.count(cur().text)) {
      fail("expected an update operator, '<-' or '->' after '" + pretty_print(target) + "'");
    }
    InstrOp op = kOps.at(take().text);
    const Token& rhs_start = cur();
    Expr rhs = expr();
    InstrCall call{op, "", std::move(target), {}};
    lower_rhs(rhs, call, rhs_start);
    return call;
  }

  // The right-hand side of an instruction is one function application whose
  // operands are views or literals.
  void lower_rhs(Expr& rhs, InstrCall& call, const Token& at) {
    auto atom = [](const Expr& e) { return e.as_literal() || e.as_view(); };
    auto bad = [&]() {
      throw SyntaxError("instruction right-hand side must be a single function application over views or literals",
                        SourceSpan{file_, at.line, at.col, at.end_line, at.end_col});
    };
    if (atom(rhs)) {
      call.fname = "identity";
      call.operands.push_back(std::move(rhs));
    } else if (auto* u = std::get_if<UnaryExpr>(&rhs.node)) {
      if (!atom(*u->operand)) bad();
      call.fname = u->op == UnaryOp::Neg ? "neg" : "not";
      call.operands.push_back(std::move(*u->operand));
    } else if (auto* b = std::get_if<BinaryExpr>(&rhs.node)) {
      if (!atom(*b->lhs) || !atom(*b->rhs)) bad();
      call.fname = std::string(binary_fname(b->op));
      call.operands.push_back(std::move(*b->lhs));
      call.operands.push_back(std::move(*b->rhs));
    } else if (auto* c = std::get_if<CallExpr>(&rhs.node)) {
      for (const auto& a : c->args) {
        if (!atom(a)) bad();
      }
      call.fname = c->fname;
      call.operands = std::move(c->args);
    } else {
      bad();
    }
  }

  DataView view() {
    const Token& start = cur();
    DataView v = DataView::var(name());
    v.span = span_from(start);
    for (;;) {
      if (is_sym(".")) {
        ++pos_;
        std::string field = name();
        v = DataView::field(std::move(v), std::move(field));
      } else if (is_sym("[")) {
        ++pos_;
        std::vector<Expr> idx;
        for (;;) {
          const Token& istart = cur();
          Expr e = expr();
          if (!is_affine_index(e)) {
            throw SyntaxError("index expression must be affine in integer variables",
                              SourceSpan{file_, istart.line, istart.col, istart.end_line, istart.end_col});
          }
          idx.push_back(std::move(e));
          if (!is_sym(",")) break;
          ++pos_;
        }
        expect_sym("]");
        v = DataView::index(std::move(v), std::move(idx));
      } else {
        break;
      }
      v.span = span_from(start);
    }
    while (is_sym("|>")) {
      ++pos_;
      std::string bij = name();
      std::vector<Expr> args;
      if (is_sym("(")) {
        ++pos_;
        while (!is_sym(")")) {
          args.push_back(expr());
          if (!is_sym(",")) break;
          ++pos_;
        }
        expect_sym(")");
      }
      v = DataView::bijector(std::move(v), std::move(bij), std::move(args));
      v.span = span_from(start);
    }
    return v;
  }

  // Expressions, loosest binding first.
  Expr expr() { return or_expr(); }

  Expr or_expr() {
    const Token& start = cur();
    Expr e = and_expr();
    while (is_sym("||")) {
      ++pos_;
      e = Expr::binary(BinaryOp::Or, std::move(e), and_expr());
      e.span = span_from(start);
    }
    return e;
  }

  Expr and_expr() {
    const Token& start = cur();
    Expr e = cmp_expr();
    while (is_sym("&&")) {
      ++pos_;
      e = Expr::binary(BinaryOp::And, std::move(e), cmp_expr());
      e.span = span_from(start);
    }
    return e;
  }

  Expr cmp_expr() {
    static const std::unordered_map<std::string, BinaryOp> kCmp = {
        {"==", BinaryOp::Eq}, {"!=", BinaryOp::Ne}, {"<", BinaryOp::Lt},
        {"<=", BinaryOp::Le}, {">", BinaryOp::Gt},  {">=", BinaryOp::Ge}};
    const Token& start = cur();
    Expr e = add_expr();
    while (cur().kind == Tok::Sym && kCmp.count(cur().text)) {
      BinaryOp op = kCmp.at(take().text);
      e = Expr::binary(op, std::move(e), add_expr());
      e.span = span_from(start);
    }
    return e;
  }

  Expr add_expr() {
    const Token& start = cur();
    Expr e = mul_expr();
    while (is_sym("+") || is_sym("-")) {
      BinaryOp op = take().text == "+" ? BinaryOp::Add : BinaryOp::Sub;
      e = Expr::binary(op, std::move(e), mul_expr());
      e.span = span_from(start);
    }
    return e;
  }

  Expr mul_expr() {
    const Token& start = cur();
    Expr e = unary_expr();
    while (is_sym("*") || is_sym("/")) {
      BinaryOp op = take().text == "*" ? BinaryOp::Mul : BinaryOp::Div;
      e = Expr::binary(op, std::move(e), unary_expr());
      e.span = span_from(start);
    }
    return e;
  }

  Expr unary_expr() {
    const Token& start = cur();
    if (is_sym("-")) {
      ++pos_;
      if (cur().kind == Tok::Number && !is_sym("^", 1)) {
        Value v = negate_literal(take().value);
        return Expr::literal(std::move(v), span_from(start));
      }
      Expr operand = unary_expr();
      return Expr::unary(UnaryOp::Neg, std::move(operand), span_from(start));
    }
    if (is_sym("!")) {
      ++pos_;
      Expr operand = unary_expr();
      return Expr::unary(UnaryOp::Not, std::move(operand), span_from(start));
    }
    return pow_expr();
  }

  Expr pow_expr() {
    const Token& start = cur();
    Expr base = primary();
    if (is_sym("^")) {
      ++pos_;
      Expr exponent = unary_expr();
      return Expr::binary(BinaryOp::Pow, std::move(base), std::move(exponent), span_from(start));
    }
    return base;
  }

  Expr primary() {
    const Token& start = cur();
    if (cur().kind == Tok::Number) {
      Value v = take().value;
      return Expr::literal(std::move(v), span_from(start));
    }
    if (is_word("true") || is_word("false")) {
      bool b = take().text == "true";
      return Expr::literal(b, span_from(start));
    }
    if (is_sym("(")) {
      ++pos_;
      Expr e = expr();
      expect_sym(")");
      return e;
    }
    if (cur().kind == Tok::Ident && is_sym("(", 1) && !is_keyword(cur().text)) {
      std::string f = take().text;
      ++pos_;
      std::vector<Expr> args;
      while (!is_sym(")")) {
        args.push_back(expr());
        if (!is_sym(",")) break;
        ++pos_;
      }
      expect_sym(")");
      return Expr::call(std::move(f), std::move(args), span_from(start));
    }
    if (cur().kind == Tok::Ident) return Expr::view(view());
    fail("expected an expression, found '" + describe(cur()) + "'");
  }

  std::vector<Token> toks_;
  std::shared_ptr<const std::string> file_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Printer

constexpr int kPrecOr = 1, kPrecAnd = 2, kPrecCmp = 3, kPrecAdd = 4, kPrecMul = 5, kPrecUnary = 6, kPrecPow = 7,
              kPrecAtom = 8;

int binary_prec(BinaryOp op) {
  switch (op) {
    case BinaryOp::Or: return kPrecOr;
    case BinaryOp::And: return kPrecAnd;
    case BinaryOp::Add:
    case BinaryOp::Sub: return kPrecAdd;
    case BinaryOp::Mul:
    case BinaryOp::Div: return kPrecMul;
    case BinaryOp::Pow: return kPrecPow;
    default: return kPrecCmp;
  }
}

bool is_negative_number(const Value& v) {
  switch (v.kind()) {
    case Kind::Int: return v.as<std::int64_t>() < 0;
    case Kind::Float: return std::signbit(v.as<double>());
    case Kind::Fixed: return v.as<Fixed>().raw() < 0;
    case Kind::Complex: return std::signbit(v.as<Complex>().imag());
    default: return false;
  }
}

std::string literal_text(const Value& v, int& prec) {
  prec = is_negative_number(v) ? kPrecUnary : kPrecAtom;
  switch (v.kind()) {
    case Kind::Complex: {
      const Complex& c = v.as<Complex>();
      if (c.real() == 0.0) {
        prec = std::signbit(c.imag()) ? kPrecUnary : kPrecAtom;
        return to_string(Value(c.imag())) + "im";
      }
      prec = kPrecAtom;
      return "complex(" + to_string(Value(c.real())) + ", " + to_string(Value(c.imag())) + ")";
    }
    case Kind::ULog: prec = kPrecAtom; return to_string(Value(v.as<ULog>().to_double())) + "ul";
    default: return to_string(v);
  }
}

std::string print_expr(const Expr& e, int& prec);

std::string wrap(const Expr& e, int min_prec) {
  int p = 0;
  std::string s = print_expr(e, p);
  return p < min_prec ? "(" + s + ")" : s;
}

std::string print_expr(const Expr& e, int& prec) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LiteralExpr>) {
          return literal_text(n.value, prec);
        } else if constexpr (std::is_same_v<T, ViewExpr>) {
          prec = kPrecAtom;
          return pretty_print(*n.view);
        } else if constexpr (std::is_same_v<T, UnaryExpr>) {
          prec = kPrecUnary;
          const auto* lit = n.operand->as_literal();
          bool needs_parens = lit && (lit->value.kind() == Kind::Int || lit->value.kind() == Kind::Float ||
                                      lit->value.kind() == Kind::Fixed || lit->value.kind() == Kind::Complex);
          std::string inner = needs_parens ? "(" + wrap(*n.operand, 0) + ")" : wrap(*n.operand, kPrecUnary);
          return std::string(op_symbol(n.op)) + inner;
        } else if constexpr (std::is_same_v<T, BinaryExpr>) {
          prec = binary_prec(n.op);
          std::string l, r;
          if (n.op == BinaryOp::Pow) {
            l = wrap(*n.lhs, kPrecAtom);
            r = wrap(*n.rhs, kPrecUnary);
          } else {
            l = wrap(*n.lhs, prec);
            r = wrap(*n.rhs, prec + 1);
          }
          return l + " " + std::string(op_symbol(n.op)) + " " + r;
        } else {
          prec = kPrecAtom;
          std::string s = n.fname + "(";
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) s += ", ";
            s += wrap(n.args[i], 0);
          }
          return s + ")";
        }
      },
      e.node);
}

std::optional<BinaryOp> fname_binary(std::string_view f) {
  static const std::unordered_map<std::string_view, BinaryOp> kMap = {
      {"add", BinaryOp::Add}, {"sub", BinaryOp::Sub}, {"mul", BinaryOp::Mul}, {"div", BinaryOp::Div},
      {"pow", BinaryOp::Pow}, {"eq", BinaryOp::Eq},   {"ne", BinaryOp::Ne},   {"lt", BinaryOp::Lt},
      {"le", BinaryOp::Le},   {"gt", BinaryOp::Gt},   {"ge", BinaryOp::Ge},   {"and", BinaryOp::And},
      {"or", BinaryOp::Or}};
  auto it = kMap.find(f);
  if (it == kMap.end()) return std::nullopt;
  return it->second;
}

std::string rhs_text(const InstrCall& c) {
  const auto& ops = c.operands;
  if (c.fname == "identity" && ops.size() == 1) return wrap(ops[0], 0);
  if ((c.fname == "neg" || c.fname == "not") && ops.size() == 1) {
    Expr e = Expr::unary(c.fname == "neg" ? UnaryOp::Neg : UnaryOp::Not, ops[0]);
    return wrap(e, 0);
  }
  if (auto op = fname_binary(c.fname); op && ops.size() == 2) {
    Expr e = Expr::binary(*op, ops[0], ops[1]);
    return wrap(e, 0);
  }
  return wrap(Expr::call(c.fname, ops), 0);
}

void print_block(const Block& b, int indent, std::string& out) {
  for (const auto& s : b) out += pretty_print(s, indent);
}

std::string print_args(const std::vector<DataView>& args) {
  std::string s = "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) s += ", ";
    s += pretty_print(args[i]);
  }
  return s + ")";
}

}  // namespace

Program parse_program(std::string_view text, std::string file) {
  auto f = std::make_shared<const std::string>(std::move(file));
  return Parser(Lexer(text, f).run(), f).program();
}

Expr parse_expression(std::string_view text) {
  auto f = std::make_shared<const std::string>("<expr>");
  return Parser(Lexer(text, f).run(), f).standalone_expr();
}

std::string pretty_print(const Expr& expr) { return wrap(expr, 0); }

std::string pretty_print(const DataView& view) {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarView>) {
          return n.name;
        } else if constexpr (std::is_same_v<T, FieldView>) {
          return pretty_print(*n.base) + "." + n.field;
        } else if constexpr (std::is_same_v<T, IndexView>) {
          std::string s = pretty_print(*n.base) + "[";
          for (std::size_t i = 0; i < n.indices.size(); ++i) {
            if (i) s += ", ";
            s += pretty_print(n.indices[i]);
          }
          return s + "]";
        } else {
          std::string s = pretty_print(*n.base) + " |> " + n.name;
          if (!n.args.empty()) {
            s += "(";
            for (std::size_t i = 0; i < n.args.size(); ++i) {
              if (i) s += ", ";
              s += pretty_print(n.args[i]);
            }
            s += ")";
          }
          return s;
        }
      },
      view.node);
}

std::string pretty_print(const Statement& stmt, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 4, ' ');
  std::string out;
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, AncillaAlloc>) {
          out = pad + n.name + " <- " + pretty_print(n.init) + "\n";
        } else if constexpr (std::is_same_v<T, AncillaDealloc>) {
          out = pad + n.name + " -> " + pretty_print(n.value) + "\n";
        } else if constexpr (std::is_same_v<T, InstrCall>) {
          out = pad + pretty_print(n.target) + " " + std::string(op_symbol(n.op)) + " " + rhs_text(n) + "\n";
        } else if constexpr (std::is_same_v<T, FnCall>) {
          out = pad + n.fname + print_args(n.args) + "\n";
        } else if constexpr (std::is_same_v<T, UncallFn>) {
          out = pad + "~" + n.fname + print_args(n.args) + "\n";
        } else if constexpr (std::is_same_v<T, IfStmt>) {
          out = pad + "if (" + pretty_print(n.pre) + ", " + (n.post ? pretty_print(*n.post) : std::string("~")) + ")\n";
          print_block(n.then_block, indent + 1, out);
          if (!n.else_block.empty()) {
            out += pad + "else\n";
            print_block(n.else_block, indent + 1, out);
          }
          out += pad + "end\n";
        } else if constexpr (std::is_same_v<T, WhileStmt>) {
          out = pad + "while (" + pretty_print(n.pre) + ", " + pretty_print(n.post) + ")\n";
          print_block(n.body, indent + 1, out);
          out += pad + "end\n";
        } else if constexpr (std::is_same_v<T, ForStmt>) {
          out = pad + "for " + n.var + " = " + pretty_print(n.start) + ":" + pretty_print(n.step) + ":" +
                pretty_print(n.stop) + "\n";
          print_block(n.body, indent + 1, out);
          out += pad + "end\n";
        } else if constexpr (std::is_same_v<T, RoutineBegin>) {
          out = pad + "@routine begin\n";
          print_block(n.body, indent + 1, out);
          out += pad + "end\n";
        } else if constexpr (std::is_same_v<T, RoutineEnd>) {
          out = pad + "~@routine\n";
        } else if constexpr (std::is_same_v<T, InvCheckOff>) {
          std::string inner = pretty_print(*n.stmt, indent);
          out = pad + "@invcheckoff " + inner.substr(pad.size());
        } else if constexpr (std::is_same_v<T, SafeStmt>) {
          out = pad + (n.kind == SafeKind::Assert ? "@safe @assert " : "@safe @show ");
          for (std::size_t i = 0; i < n.exprs.size(); ++i) {
            if (i) out += ", ";
            out += pretty_print(n.exprs[i]);
          }
          out += "\n";
        } else {
          out = pad + "begin\n";
          print_block(n.stmts, indent + 1, out);
          out += pad + "end\n";
        }
      },
      stmt.node);
  return out;
}

std::string pretty_print(const FunctionDef& fn) {
  std::string out = "fn " + fn.name + "(";
  for (std::size_t i = 0; i < fn.params.size(); ++i) {
    if (i) out += ", ";
    out += fn.params[i].name;
    if (fn.params[i].kind == ParamKind::Scalar) out += "::scalar";
    if (fn.params[i].kind == ParamKind::Array) out += "::array";
  }
  out += ")\n";
  print_block(fn.body, 1, out);
  return out + "end\n";
}

std::string pretty_print(const Program& program) {
  std::string out;
  for (std::size_t i = 0; i < program.functions.size(); ++i) {
    if (i) out += "\n";
    out += pretty_print(program.functions[i]);
  }
  return out;
}

}  // namespace revlang
