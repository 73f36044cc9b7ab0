#include <doctest.h>

#include <random>
#include <sstream>

#include "revlang/stdlib.hpp"
#include "support.hpp"

using namespace revlang;

namespace {

ErrorKind error_of(const Program& p, const std::string& fname, std::vector<Value> args, ExecOptions opts = {}) {
  try {
    run(p, fname, std::move(args), opts);
  } catch (const RevError& e) {
    return e.kind();
  }
  FAIL("expected a RevError");
  return ErrorKind::InvalidArgument;
}

// Independent Fibonacci oracle: F(1) = F(2) = 1.
std::int64_t fib(std::int64_t n) {
  std::int64_t a = 0, b = 1;
  for (std::int64_t i = 0; i < n; ++i) {
    std::int64_t t = a + b;
    a = b;
    b = t;
  }
  return a;
}

}  // namespace

TEST_CASE("multiplier runs and uncalls") {
  Program p = load_example("multiplier");
  std::vector<Value> in = {std::int64_t{2}, std::int64_t{3}, std::int64_t{5}};
  auto out = run(p, "multiplier", in);
  CHECK(out == std::vector<Value>{std::int64_t{17}, std::int64_t{3}, std::int64_t{5}});
  CHECK(uncall(p, "multiplier", out) == in);
}

TEST_CASE("rrfib follows the Fibonacci numbers") {
  Program p = load_example("rrfib_corrected");
  for (std::int64_t n = 0; n <= 15; ++n) {
    CAPTURE(n);
    auto out = run(p, "rrfib", {std::int64_t{0}, n});
    CHECK(out[0] == Value(fib(n + 1)));
    CHECK(out[1] == Value(n));
    CHECK(uncall(p, "rrfib", out) == std::vector<Value>{std::int64_t{0}, n});
  }
  CHECK(run(p, "rrfib", {std::int64_t{0}, std::int64_t{5}})[0] == Value(std::int64_t{8}));
}

TEST_CASE("mypower_log computes a power") {
  Program p = load_example("mypower_log");
  auto out = run(p, "mypower_log", {0.0, 2.0, std::int64_t{10}});
  CHECK(test::num(out[0]) == doctest::Approx(1024.0).epsilon(1e-12));
  CHECK(out[1] == Value(2.0));
}

TEST_CASE("while postcondition is checked on entry") {
  Program p = test::program_file("tests/programs/while_count.rnl");
  auto out = run(p, "count_up", {0.0, std::int64_t{4}});
  CHECK(out[0] == Value(4.0));
  CHECK(run(p, "count_up", {0.0, std::int64_t{0}})[0] == Value(0.0));
  Program entry = test::program_text("fn f(x, i)\n    while (i < 3, i > 0)\n        INC(i)\n    end\nend\n");
  CHECK(run(entry, "f", {0.0, std::int64_t{0}})[1] == Value(std::int64_t{3}));
  CHECK(error_of(entry, "f", {0.0, std::int64_t{1}}) == ErrorKind::PostconditionMismatch);
}

TEST_CASE("negative programs raise their error kinds") {
  CHECK(error_of(test::program_file("tests/programs/while_wrong_post.rnl"), "count_wrong", {0.0, std::int64_t{3}}) ==
        ErrorKind::PostconditionMismatch);
  CHECK(error_of(test::program_file("tests/programs/dirty_ancilla.rnl"), "dirty", {0.0, 2.0}) ==
        ErrorKind::DirtyAncilla);
  CHECK(error_of(test::program_file("tests/programs/mutated_for.rnl"), "grow", {0.0, std::int64_t{3}}) ==
        ErrorKind::LoopIteratorMutated);
  CHECK(error_of(test::program_file("tests/programs/aliased_call.rnl"), "self_accumulate", {1.0}) ==
        ErrorKind::AliasedArguments);
  auto clean = run(test::program_file("tests/programs/clean_ancilla.rnl"), "clean", {0.0, 2.0});
  CHECK(clean == std::vector<Value>{2.0, 2.0});
}

TEST_CASE("if postcondition mismatch") {
  Program p = test::program_text("fn f(x)\n    if (x > 0.0, x > 5.0)\n        x += 1.0\n    end\nend\n");
  CHECK(run(p, "f", {5.0})[0] == Value(6.0));
  CHECK(error_of(p, "f", {1.0}) == ErrorKind::PostconditionMismatch);
  ExecOptions off;
  off.invcheck = false;
  CHECK(run(p, "f", {1.0}, off)[0] == Value(2.0));
}

TEST_CASE("views read through bijectors and write their inverses") {
  Env env;
  env.bind("x", 3.0);
  env.bind("a", test::vec({1, 2, 3}));
  env.bind("z", Value(Complex(1.0, 2.0)));
  DataView shifted = DataView::bijector(DataView::var("x"), "addconst", {Expr::literal(Value(1.0))});
  CHECK(read_view(env, shifted) == Value(4.0));
  write_view(env, shifted, Value(7.0));
  CHECK(env.at("x") == Value(6.0));
  DataView a2 = DataView::index(DataView::var("a"), {Expr::literal(Value(std::int64_t{2}))});
  CHECK(read_view(env, a2) == Value(2.0));
  write_view(env, a2, Value(9.0));
  CHECK(env.at("a") == test::vec({1, 9, 3}));
  DataView im = DataView::field(DataView::var("z"), "im");
  CHECK(read_view(env, im) == Value(2.0));
  write_view(env, im, Value(-1.0));
  CHECK(env.at("z") == Value(Complex(1.0, -1.0)));
  DataView a9 = DataView::index(DataView::var("a"), {Expr::literal(Value(std::int64_t{9}))});
  try {
    read_view(env, a9);
    FAIL("expected IndexOutOfBounds");
  } catch (const RevError& e) {
    CHECK(e.kind() == ErrorKind::IndexOutOfBounds);
  }
}

TEST_CASE("calls through bijector views") {
  Program p = test::program_file("tests/programs/bijector_call.rnl");
  CHECK(run(p, "bump_shifted", {3.0})[0] == Value(4.0));
  CHECK(uncall(p, "bump_shifted", {4.0})[0] == Value(3.0));
}

TEST_CASE("check_reversibility reports success and captures failures") {
  Program p = load_example("multiplier");
  auto ok = check_reversibility(p, "multiplier", {2.0, 3.0, 5.0});
  CHECK(ok.ok);
  CHECK(ok.max_deviation == 0.0);
  auto bad = check_reversibility(test::program_file("tests/programs/dirty_ancilla.rnl"), "dirty", {0.0, 1.0});
  CHECK_FALSE(bad.ok);
  REQUIRE(bad.error.has_value());
  CHECK(*bad.error == ErrorKind::DirtyAncilla);
}

TEST_CASE("catalog programs are reversible, deterministic and check-independent") {
  std::mt19937_64 rng(17);
  ExecOptions off;
  off.invcheck = false;
  for (const auto& e : example_catalog()) {
    Program p = load_example(e.name);
    for (int t = 0; t < 10; ++t) {
      auto args = sample_inputs(e.name, rng);
      CAPTURE(e.name);
      auto report = check_reversibility(p, e.entry, args);
      CHECK(report.ok);
      auto once = run(p, e.entry, args);
      CHECK(run(p, e.entry, args) == once);
      CHECK(run(p, e.entry, args, off) == once);
      CHECK(once.size() == args.size());
      for (std::size_t i = 0; i < args.size(); ++i) CHECK(same_structure(once[i], args[i]));
    }
  }
}

TEST_CASE("safe assertions always run") {
  Program p = test::program_text("fn f(x)\n    @safe @assert x > 0.0\n    x += 1.0\nend\n");
  CHECK(run(p, "f", {1.0})[0] == Value(2.0));
  ExecOptions off;
  off.invcheck = false;
  CHECK(error_of(p, "f", {-1.0}, off) == ErrorKind::AssertFailed);
  CHECK(error_of(p, "f", {-1.0}) == ErrorKind::AssertFailed);
}

TEST_CASE("fuel bounds execution") {
  Program p = load_example("rrfib_corrected");
  ExecOptions tight;
  tight.max_steps = 50;
  CHECK(error_of(p, "rrfib", {std::int64_t{0}, std::int64_t{20}}, tight) == ErrorKind::FuelExhausted);
}

TEST_CASE("trace writes one line per statement") {
  Program p = load_example("multiplier");
  std::ostringstream os;
  ExecOptions opts;
  opts.trace = true;
  opts.trace_out = &os;
  run(p, "multiplier", {2.0, 3.0, 5.0}, opts);
  CHECK(os.str().find("y!") != std::string::npos);
}

TEST_CASE("runtime lookup errors") {
  Program p = load_example("multiplier");
  CHECK(error_of(p, "nope", {}) == ErrorKind::UnknownFunction);
  CHECK(error_of(p, "multiplier", {1.0}) == ErrorKind::ArityMismatch);
}
