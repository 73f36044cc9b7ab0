#include <doctest.h>

#include <filesystem>
#include <random>

#include "revlang/reverser.hpp"
#include "revlang/stdlib.hpp"
#include "support.hpp"

using namespace revlang;

namespace {

Statement stmt(const std::string& line, const std::string& params = "x, y, a, b, n") {
  return test::program_text("fn f(" + params + ")\n    " + line + "\nend\n").functions.at(0).body.at(0);
}

std::string inverted_text(const std::string& line) { return pretty_print(invert_statement(stmt(line))); }

std::vector<Program> corpus() {
  std::vector<Program> out;
  for (const auto& e : example_catalog()) out.push_back(load_example(e.name));
  for (const auto& entry : std::filesystem::directory_iterator(test::source_path("tests/programs"))) {
    out.push_back(test::program_file("tests/programs/" + entry.path().filename().string()));
  }
  return out;
}

}  // namespace

TEST_CASE("instruction inversion") {
  CHECK(inverted_text("y += log(x)") == "y -= log(x)\n");
  CHECK(inverted_text("y -= a * b") == "y += a * b\n");
  CHECK(inverted_text("y *= x") == "y /= x\n");
  CHECK(inverted_text("y ⊻= x") == "y xor= x\n");
  CHECK(inverted_text("SWAP(a, b)") == "SWAP(a, b)\n");
  CHECK(inverted_text("INC(n)") == "DEC(n)\n");
  CHECK(inverted_text("ROT(a, b, x)") == "IROT(a, b, x)\n");
  CHECK(inverted_text("~f(a, b)") == "f(a, b)\n");
}

TEST_CASE("ancilla and control flow inversion") {
  CHECK(inverted_text("t ← 0.0") == "t -> 0.0\n");
  CHECK(pretty_print(invert_statement(stmt("for i = 1:1:10\n        x += i\n    end"))) ==
        "for i = 10:-1:1\n    x -= i\nend\n");
  CHECK(pretty_print(invert_statement(stmt("while (n > 0, n < 5)\n        x += 1\n    end"))) ==
        "while (n < 5, n > 0)\n    x -= 1\nend\n");
  CHECK(pretty_print(invert_statement(stmt("if (n > 0, x > 1.0)\n        x += 1\n    else\n        y += 1\n    end"))) ==
        "if (x > 1.0, n > 0)\n    x -= 1\nelse\n    y -= 1\nend\n");
  CHECK(pretty_print(invert_statement(stmt("if (n > 0, ~)\n        x += 1\n    end"))) ==
        "if (n > 0, ~)\n    x -= 1\nend\n");
  CHECK(pretty_print(invert_statement(stmt("@safe @assert n > 0"))) == "@safe @assert n > 0\n");
  CHECK(pretty_print(invert_statement(stmt("@invcheckoff x += 1"))) == "@invcheckoff x -= 1\n");
}

TEST_CASE("blocks reverse their statement order") {
  Program p = test::program_text("fn f(x, y)\n    x += 1\n    y += x\n    SWAP(x, y)\nend\n");
  Block inv = invert_block(p.functions[0].body);
  REQUIRE(inv.size() == 3);
  CHECK(pretty_print(inv[0]) == "SWAP(x, y)\n");
  CHECK(pretty_print(inv[1]) == "y -= x\n");
  CHECK(pretty_print(inv[2]) == "x -= 1\n");
}

TEST_CASE("routine expansion reproduces the explicit complex log") {
  Program p = load_example("complex_log");
  FunctionDef routine = expand_routines(*p.find("complex_log"));
  const FunctionDef& explicit_form = *p.find("complex_log_explicit");
  CHECK(routine.body == explicit_form.body);
}

TEST_CASE("routine expansion leaves routine-free code alone and is idempotent") {
  Program p = load_example("multiplier");
  CHECK(expand_routines(p.functions[0]) == p.functions[0]);
  Program nested = test::program_text(
      "fn f(y, x)\n    @routine begin\n        a ← 0.0\n        @routine begin\n            b ← 0.0\n"
      "            b += x\n        end\n        a += b\n        ~@routine\n    end\n    y += a\n    ~@routine\nend\n");
  FunctionDef once = expand_routines(nested.functions[0]);
  CHECK(expand_routines(once) == once);
  CHECK(pretty_print(once).find("@routine") == std::string::npos);
  CHECK(validate(Program{{once}}).empty());
}

TEST_CASE("unmatched routines are rejected") {
  Program p = test::program_text("fn f(y)\n    y += 1\nend\n");
  p.functions[0].body.push_back(Statement{RoutineEnd{}, {}});
  try {
    expand_routines(p.functions[0]);
    FAIL("expected UnmatchedRoutine");
  } catch (const RevError& e) {
    CHECK(e.kind() == ErrorKind::UnmatchedRoutine);
  }
}

TEST_CASE("invert is an involution on the corpus") {
  for (const Program& p : corpus()) {
    for (const auto& f : p.functions) {
      CAPTURE(f.name);
      FunctionDef expanded = expand_routines(f);
      CHECK(invert_function(invert_function(f)) == expanded);
    }
  }
}

TEST_CASE("the inverted multiplier undoes the multiplier") {
  Program p = load_example("multiplier");
  Program inv = invert_program(p);
  CHECK(pretty_print(inv).find("y! -= a * b") != std::string::npos);
  auto out = run(inv, "multiplier", {std::int64_t{17}, std::int64_t{3}, std::int64_t{5}});
  CHECK(out == std::vector<Value>{std::int64_t{2}, std::int64_t{3}, std::int64_t{5}});
}

TEST_CASE("the inverse complex log subtracts the logarithm") {
  Program inv = invert_program(load_example("complex_log"));
  const Complex y(0.5, -0.25), x(1.0, 1.2);
  auto out = run(inv, "complex_log", {Value(y), Value(x)});
  const Complex want = y - std::log(x);
  CHECK(std::abs(out[0].as<Complex>() - want) < 1e-12);
  CHECK(out[1] == Value(x));
}

TEST_CASE("routine expansion preserves results exactly") {
  std::mt19937_64 rng(7);
  for (const auto& e : example_catalog()) {
    Program p = load_example(e.name);
    Program expanded = p;
    for (auto& f : expanded.functions) f = expand_routines(f);
    for (int t = 0; t < 3; ++t) {
      auto args = sample_inputs(e.name, rng);
      CAPTURE(e.name);
      CHECK(run(p, e.entry, args) == run(expanded, e.entry, args));
    }
  }
}
