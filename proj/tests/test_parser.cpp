#include <doctest.h>

#include <filesystem>
#include <random>

#include "revlang/stdlib.hpp"
#include "support.hpp"

using namespace revlang;

namespace {

const Statement& first(const Program& p) { return p.functions.at(0).body.at(0); }

// Random statement text over variables x, y, z (Float) and array a.
class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  std::string program() {
    std::string out = "fn g(x, y, z, a::array, n)\n";
    int count = pick(1, 5);
    for (int i = 0; i < count; ++i) out += statement(1, 2);
    return out + "end\n";
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  std::string pad(int depth) { return std::string(4 * depth, ' '); }

  std::string target() {
    static const char* ts[] = {"x", "y", "a[1]", "a[n + 1]", "z"};
    return ts[pick(0, 4)];
  }

  std::string operand() {
    static const char* os[] = {"z", "2.5", "a[2]", "n", "0.5", "3"};
    return os[pick(0, 5)];
  }

  std::string rhs() {
    switch (pick(0, 6)) {
      case 0: return operand();
      case 1: return operand() + " * " + operand();
      case 2: return "sin(" + operand() + ")";
      case 3: return operand() + " / " + operand();
      case 4: return operand() + " ^ 2";
      case 5: return "atan2(" + operand() + ", " + operand() + ")";
      default: return "-(" + operand() + ")";
    }
  }

  std::string cond() {
    static const char* cs[] = {"n > 0", "z < 1.0 && n != 2", "!(n >= 3)", "n == 1 || z > 2.0"};
    return cs[pick(0, 3)];
  }

  std::string statement(int depth, int budget) {
    const std::string p = pad(depth);
    int kind = budget > 0 ? pick(0, 7) : pick(0, 2);
    switch (kind) {
      case 0: return p + "x += " + rhs() + "\n";
      case 1: return p + target() + (pick(0, 1) ? " -= " : " += ") + rhs() + "\n";
      case 2: return p + "SWAP(x, y)\n";
      case 3: {
        std::string s = p + "if (" + cond() + ", " + (pick(0, 1) ? std::string("~") : cond()) + ")\n";
        s += statement(depth + 1, budget - 1);
        if (pick(0, 1)) s += p + "else\n" + statement(depth + 1, budget - 1);
        return s + p + "end\n";
      }
      case 4:
        return p + "for i = 1:" + std::to_string(pick(1, 3)) + ":n\n" + statement(depth + 1, budget - 1) + p + "end\n";
      case 5: return p + "t ← 0.0\n" + p + "t += " + rhs() + "\n" + p + "t -= " + rhs() + "\n" + p + "t → 0.0\n";
      case 6:
        return p + "@routine begin\n" + statement(depth + 1, budget - 1) + p + "end\n" + p + "y += z\n" + p +
               "~@routine\n";
      default: return p + "@invcheckoff " + statement(depth, budget - 1).substr(p.size());
    }
  }

  std::mt19937_64 rng_;
};

}  // namespace

TEST_CASE("instruction statement") {
  Program p = test::program_text("fn multiplier(y!, a, b)\n    y! += a * b\nend\n");
  const auto& c = std::get<InstrCall>(first(p).node);
  CHECK(c.op == InstrOp::PlusEq);
  CHECK(c.fname == "mul");
  CHECK(c.target == DataView::var("y!"));
  REQUIRE(c.operands.size() == 2);
  CHECK(*c.operands[0].as_view() == DataView::var("a"));
  CHECK(*c.operands[1].as_view() == DataView::var("b"));
}

TEST_CASE("if with the same-as-precondition marker") {
  Program p = test::program_text("fn f(out, n)\n    if (n >= 1, ~)\n        out += 1\n    end\nend\n");
  const auto& s = std::get<IfStmt>(first(p).node);
  CHECK_FALSE(s.post.has_value());
  CHECK(s.else_block.empty());
}

TEST_CASE("duplicate allocation parses and is left to later stages") {
  CHECK_NOTHROW(test::program_text("fn f(y)\n    x ← 0\n    x ← 0\n    x → 0\n    x → 0\nend\n"));
}

TEST_CASE("ASCII aliases match the Unicode forms") {
  Program u = test::program_text("fn f(y, t)\n    x ← 0\n    t ⊻= y\n    x → 0\nend\n");
  Program a = test::program_text("fn f(y, t)\n    x <- 0\n    t xor= y\n    x -> 0\nend\n");
  CHECK(u == a);
}

TEST_CASE("literal kinds") {
  CHECK(parse_expression("5").as_literal()->value == Value(std::int64_t{5}));
  CHECK(parse_expression("2.0").as_literal()->value == Value(2.0));
  CHECK(parse_expression("3fx").as_literal()->value == Value(Fixed::from_int(3)));
  CHECK(parse_expression("2im").as_literal()->value == Value(Complex(0, 2)));
  CHECK(parse_expression("true").as_literal()->value == Value(true));
}

TEST_CASE("syntax errors carry a span") {
  try {
    test::program_text("fn f(y)\n    y += )\nend\n");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.span().line == 2);
  }
  CHECK_THROWS_AS(test::program_text("fn end(y)\n    y += 1\nend\n"), SyntaxError);
  CHECK_THROWS_AS(test::program_text("fn f(y)\n    y += 1\n"), SyntaxError);
}

TEST_CASE("pretty printing") {
  CHECK(pretty_print(Program{}) == "");
  Program p = test::program_text("fn f(x, n)\n    for i = 1:n\n        x += i\n    end\nend\n");
  CHECK(pretty_print(p).find("for i = 1:1:n") != std::string::npos);
}

TEST_CASE("round trip on shipped and test programs") {
  std::vector<std::string> texts;
  for (const auto& e : example_catalog()) texts.push_back(example_source(e.name));
  for (const auto& entry : std::filesystem::directory_iterator(test::source_path("tests/programs"))) {
    texts.push_back(test::read_file("tests/programs/" + entry.path().filename().string()));
  }
  for (const auto& t : texts) {
    Program p = test::program_text(t);
    std::string once = pretty_print(p);
    CAPTURE(once);
    Program q = test::program_text(once);
    CHECK(q == p);
    CHECK(pretty_print(q) == once);
  }
}

TEST_CASE("round trip on generated programs") {
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    std::string text = Generator(seed).program();
    CAPTURE(text);
    Program p = test::program_text(text);
    CHECK(test::program_text(pretty_print(p)) == p);
  }
}
