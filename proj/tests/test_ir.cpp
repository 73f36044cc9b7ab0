#include <doctest.h>

#include <random>

#include "revlang/stdlib.hpp"
#include "support.hpp"

using namespace revlang;

namespace {

std::vector<std::string> rules(const Program& p) {
  std::vector<std::string> out;
  for (const auto& d : validate(p)) out.push_back(d.rule);
  return out;
}

DataView var(const std::string& n) { return DataView::var(n); }
DataView idx(const std::string& n, std::int64_t i) { return DataView::index(var(n), {Expr::literal(Value(i))}); }

Env sample_env() {
  Env env;
  env.bind("x", 3.0);
  env.bind("a", test::vec({1, 2, 3}));
  env.bind("p", Value(Complex(1.0, 2.0)));
  env.bind("i", std::int64_t{2});
  return env;
}

}  // namespace

TEST_CASE("validate accepts the shipped programs") {
  for (const auto& e : example_catalog()) {
    CAPTURE(e.name);
    Program p = parse_program(example_source(e.name), e.file);
    CHECK(validate(p).empty());
  }
}

TEST_CASE("validate reports unbalanced ancillas and stray routine ends") {
  CHECK(rules(test::program_text("fn f(y)\n    x ← 0\n    y += x\nend\n")) == std::vector<std::string>{"UnbalancedAncilla"});
  CHECK(rules(test::program_text("fn f(y)\n    ~@routine\nend\n")) == std::vector<std::string>{"UnmatchedRoutine"});
}

TEST_CASE("validate checks names, arities and bijectors") {
  auto r = rules(test::program_text("fn f(y, y)\n    y += 1\nend\n"));
  CHECK(std::count(r.begin(), r.end(), "DuplicateParameter") == 1);
  CHECK(rules(test::program_text("fn f(y)\n    g(y)\nend\n")) == std::vector<std::string>{"UnknownFunction"});
  CHECK(rules(test::program_text("fn f(y)\n    SWAP(y)\nend\n")) == std::vector<std::string>{"ArityMismatch"});
  CHECK(rules(test::program_text("fn f(y)\n    y += 1\nend\nfn f(y)\n    y -= 1\nend\n")) ==
        std::vector<std::string>{"DuplicateFunction"});
  CHECK(rules(test::program_text("fn g(y)\n    y += 1\nend\nfn f(y)\n    g(y |> wobble)\nend\n")) ==
        std::vector<std::string>{"UnknownBijector"});
}

TEST_CASE("validate is pure and idempotent") {
  Program p = test::program_text("fn f(y)\n    x ← 0\n    ~@routine\nend\n");
  Program copy = p;
  auto first = rules(p);
  CHECK(rules(p) == first);
  CHECK(p == copy);
}

TEST_CASE("storage identity ignores bijectors and separates cells") {
  Env env = sample_env();
  CHECK(canonical_view_identity(env, var("x")) == canonical_view_identity(env, DataView::bijector(var("x"), "neg", {})));
  CHECK_FALSE(canonical_view_identity(env, idx("a", 1)) == canonical_view_identity(env, idx("a", 2)));
  CHECK_FALSE(canonical_view_identity(env, DataView::field(var("p"), "re")) ==
              canonical_view_identity(env, DataView::field(var("p"), "im")));
  // a[i] with i = 2 resolves to the same cell as a[2].
  DataView ai = DataView::index(var("a"), {Expr::view(var("i"))});
  CHECK(canonical_view_identity(env, ai) == canonical_view_identity(env, idx("a", 2)));
  CHECK(canonical_view_identity(env, var("a")).overlaps(canonical_view_identity(env, idx("a", 3))));
}

TEST_CASE("storage identity of an unbound root is an error") {
  Env env = sample_env();
  try {
    canonical_view_identity(env, var("nope"));
    FAIL("expected UnboundVariable");
  } catch (const RevError& e) {
    CHECK(e.kind() == ErrorKind::UnboundVariable);
  }
}

TEST_CASE("storage identity is an equivalence relation") {
  Env env = sample_env();
  std::vector<DataView> views = {var("x"), DataView::bijector(var("x"), "addconst", {Expr::literal(Value(1.0))}),
                                 idx("a", 1), idx("a", 2), DataView::index(var("a"), {Expr::view(var("i"))}),
                                 DataView::field(var("p"), "re"), DataView::field(var("p"), "im"), var("p")};
  std::vector<StorageId> ids;
  for (const auto& v : views) ids.push_back(canonical_view_identity(env, v));
  for (const auto& a : ids) {
    CHECK(a == a);
    for (const auto& b : ids) {
      CHECK((a == b) == (b == a));
      for (const auto& c : ids) {
        if (a == b && b == c) CHECK(a == c);
      }
    }
  }
}

TEST_CASE("affine index forms") {
  CHECK(is_affine_index(parse_expression("i + 1")));
  CHECK(is_affine_index(parse_expression("2 * i - j + 3")));
  CHECK_FALSE(is_affine_index(parse_expression("i * j")));
  CHECK_FALSE(is_affine_index(parse_expression("sqrt(i)")));
  CHECK_THROWS_AS(parse_program("fn f(a, i, j)\n    a[i * j] += 1\nend\n"), SyntaxError);
}

TEST_CASE("values keep shape and kind") {
  Value m = Array::matrix(2, 2, {1.0, 2.0, 3.0, 4.0});
  CHECK(m.as<Array>().shape == std::vector<std::size_t>{2, 2});
  CHECK(same_structure(m, Array::matrix(2, 2, {0.0, 0.0, 0.0, 0.0})));
  CHECK_FALSE(same_structure(m, test::vec({1, 2, 3, 4})));
  Value g = Value::gvar(2.5, 0.0);
  CHECK(primal_of(g) == Value(2.5));
  CHECK(gradient_of(g) == Value(0.0));
  CHECK(zero_cotangent(Value(Complex(1, 1))) == Value(Complex(0, 0)));
}
