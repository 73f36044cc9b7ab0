// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "revlang/autodiff.hpp"
#include "revlang/reverser.hpp"
#include "revlang/stdlib.hpp"
#include "revlang/tradeoff.hpp"
#include "support.hpp"

using namespace revlang;

namespace {

struct Failure {
  std::string what;
};

void expect(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

double rel(double got, double want) { return std::fabs(got - want) / std::max(1e-3, std::fabs(want)); }

std::vector<Program> corpus() {
  std::vector<Program> out;
  for (const auto& e : example_catalog()) out.push_back(parse_program(example_source(e.name), e.file));
  for (const auto& entry : std::filesystem::directory_iterator(test::source_path("tests/programs"))) {
    out.push_back(test::program_file("tests/programs/" + entry.path().filename().string()));
  }
  return out;
}

Value wrap(const Value& v, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  switch (v.kind()) {
    case Kind::Float: return Value::gvar(v, u(rng));
    case Kind::Complex: return Value::gvar(v, Complex(u(rng), u(rng)));
    case Kind::Array: {
      Array a = v.as<Array>();
      for (auto& e : a.data) e = wrap(e, rng);
      return a;
    }
    default: return v;
  }
}

std::optional<ErrorKind> error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const RevError& e) {
    return e.kind();
  }
  return std::nullopt;
}

void bennett() {
  StepProgram<double> dbl{256, [](std::int64_t, const double& s) { return 2.0 * s; }, 1.0};
  auto [s, c] = bennett_run(dbl, 4, 1, 256, true);
  expect(c.forward_steps + c.inverse_steps == 2401, "k=4 n=4 steps");
  expect(c.peak_states == 14, "k=4 n=4 peak");
  const double want = std::ldexp(1.0, 256);
  expect(std::fabs(s - want) <= 10 * (std::nextafter(want, INFINITY) - want), "final state");
  for (std::int64_t k = 2; k <= 5; ++k) {
    std::int64_t len = 1;
    for (std::int64_t n = 0; n <= 4; ++n, len *= k) {
      StepProgram<double> p{len, [](std::int64_t i, const double& x) { return x + static_cast<double>(i); }, 0.0};
      auto [fin, cc] = bennett_run(p, k, 1, len, true);
      auto [steps, peak] = bennett_counts(k, n);
      expect(cc.forward_steps + cc.inverse_steps == steps && cc.peak_states == peak,
             "sweep k=" + std::to_string(k) + " n=" + std::to_string(n));
      expect(fin == static_cast<double>(len * (len + 1) / 2), "sweep final state");
    }
  }
}

void treeverse() {
  for (std::int64_t t = 1; t <= 5; ++t) {
    const std::int64_t T = eta(t, 3);
    StepProgram<std::int64_t> p{T, [](std::int64_t i, const std::int64_t& s) { return (s * 131 + i) % 999983; }, 5};
    std::vector<std::int64_t> ref = {0, p.initial};
    for (std::int64_t i = 1; i <= T; ++i) ref.push_back(p.step(i, ref.back()));
    using Seen = std::vector<std::pair<std::int64_t, std::int64_t>>;
    auto [seen, c] = treeverse_run<std::int64_t, Seen>(p, 3, [](std::int64_t i, const std::int64_t& s, Seen acc) {
      acc.emplace_back(i, s);
      return acc;
    });
    expect(c.snapshots_peak <= 3, "snapshots for T=" + std::to_string(T));
    expect(c.forward_steps <= t * T, "forward steps for T=" + std::to_string(T));
    expect(seen.size() == static_cast<std::size_t>(T), "visit count");
    for (std::int64_t k = 0; k < T; ++k) {
      expect(seen[k].first == T - k && seen[k].second == ref[T - k], "visit order for T=" + std::to_string(T));
    }
  }
}

void round_trip() {
  std::mt19937_64 rng(2024);
  for (const auto& e : example_catalog()) {
    Program p = load_example(e.name);
    for (int t = 0; t < 20; ++t) {
      auto args = sample_inputs(e.name, rng);
      auto back = uncall(p, e.entry, run(p, e.entry, args));
      for (std::size_t i = 0; i < args.size(); ++i) {
        expect(values_match(back[i], args[i], 1e-9), e.name + " argument " + std::to_string(i + 1));
      }
    }
  }
  // Discrete kinds are bit-exact.
  std::uniform_real_distribution<double> u(0.5, 1.5);
  std::uniform_int_distribution<std::int64_t> ui(-1000, 1000);
  Program mul = load_example("multiplier");
  Program pw = load_example("mypower_log");
  for (int t = 0; t < 20; ++t) {
    std::vector<Value> ints = {ui(rng), ui(rng), ui(rng)};
    expect(uncall(mul, "multiplier", run(mul, "multiplier", ints)) == ints, "multiplier Int");
    std::vector<Value> fx = {Fixed::from_double(u(rng)), Fixed::from_double(u(rng)), Fixed::from_double(u(rng))};
    expect(uncall(mul, "multiplier", run(mul, "multiplier", fx)) == fx, "multiplier Fixed");
    std::vector<Value> fp = {Fixed::from_double(u(rng)), Fixed::from_double(u(rng)), std::int64_t{1 + t % 6}};
    expect(uncall(pw, "mypower_log", run(pw, "mypower_log", fp)) == fp, "mypower_log Fixed");
    std::vector<Value> ul = {ULog::from_double(u(rng)), ULog::from_double(u(rng))};
    Program scale = test::program_text("fn scale(y, x)\n    y *= x\nend\n");
    expect(uncall(scale, "scale", run(scale, "scale", ul)) == ul, "ULog scaling");
  }
}

void gradients(bool restoration_only) {
  std::mt19937_64 rng(77);
  for (const char* name : {"multiplier", "complex_log", "i_affine", "i_umm", "r_norm", "mypower_log"}) {
    Program p = load_example(name);
    const std::string n = name;
    for (int t = 0; t < 20; ++t) {
      auto args = sample_inputs(name, rng);
      GradRequest req{example_info(name).entry, args, {}, {}};
      if (n == "i_umm") req.wrt = {1};
      if (n == "mypower_log") req.wrt = {0, 1};
      auto g = gradient(p, req);
      expect(g.restoration_error <= 1e-9, n + " primal restoration");
      if (restoration_only) continue;
      auto fd = finite_difference(p, req, 1e-6);
      expect(fd.size() == g.flat.size(), n + " component count");
      for (std::size_t i = 0; i < fd.size(); ++i) {
        expect(rel(g.flat[i], fd[i]) < 1e-5, n + " component " + std::to_string(i));
      }
    }
  }
}

void adjoint_identity() {
  std::mt19937_64 rng(5);
  for (const auto& e : example_catalog()) {
    Program p = load_example(e.name);
    for (int t = 0; t < 5; ++t) {
      std::vector<Value> gv;
      for (const auto& a : sample_inputs(e.name, rng)) gv.push_back(wrap(a, rng));
      auto back = adjoint_pass(p, e.entry, adjoint_pass(p, e.entry, gv, false), true);
      for (std::size_t i = 0; i < gv.size(); ++i) {
        expect(max_deviation(back[i], gv[i]) <= 1e-9, e.name + " values");
        auto want = flatten_gradient(primal_of(gv[i]), gradient_of(gv[i]));
        auto got = flatten_gradient(primal_of(back[i]), gradient_of(back[i]));
        expect(want.size() == got.size(), e.name + " gradient shape");
        for (std::size_t k = 0; k < want.size(); ++k) expect(std::fabs(got[k] - want[k]) <= 1e-9, e.name + " gradients");
      }
    }
  }
}

void hessian_norm() {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> xs(10);
  double n2 = 0.0;
  for (auto& x : xs) {
    x = nd(rng);
    n2 += x * x;
  }
  auto h = hessian(load_example("r_norm"), GradRequest{"r_norm", {0.0, 0.0, test::vec(xs)}, {}, {2}});
  expect(h.asymmetry < 1e-6, "symmetry");
  expect(h.h.size() == 10, "shape");
  for (std::size_t i = 0; i < 10; ++i) {
    for (std::size_t j = 0; j < 10; ++j) {
      const double want = ((i == j) - xs[i] * xs[j] / n2) / std::sqrt(n2);
      expect(std::fabs(h.h[i][j] - want) < 1e-6, "entry");
    }
  }
}

void roundoff() {
  auto cfg = SolarSystemConfig::two_body();
  cfg.steps = 10'000;
  for (auto prec : {Precision::Binary32, Precision::Binary64}) {
    const char* tag = prec == Precision::Binary32 ? "binary32" : "binary64";
    ExecOptions strict;
    strict.float_tolerance = 1e-9;
    auto clean = leapfrog_simulate(cfg, LeapfrogVariant::Clean, prec, strict);
    auto cum = leapfrog_simulate(cfg, LeapfrogVariant::Cumulative, prec);
    std::cout << "  " << tag << ": clean " << clean.reversal_error << ", cumulative " << cum.reversal_error << "\n";
    expect(cum.reversal_error > clean.reversal_error, std::string("ordering in ") + tag);
  }
}

void check_semantics() {
  auto file = [](const char* n) { return test::program_file(std::string("tests/programs/") + n + ".rnl"); };
  expect(error_of([&] { run(file("while_wrong_post"), "count_wrong", {0.0, std::int64_t{3}}); }) ==
             ErrorKind::PostconditionMismatch,
         "wrong while postcondition");
  expect(error_of([&] { run(file("dirty_ancilla"), "dirty", {0.0, 1.0}); }) == ErrorKind::DirtyAncilla,
         "dirty ancilla");
  expect(error_of([&] { run(file("mutated_for"), "grow", {0.0, std::int64_t{3}}); }) ==
             ErrorKind::LoopIteratorMutated,
         "mutated for iterator");
  expect(error_of([&] { run(file("aliased_call"), "self_accumulate", {1.0}); }) == ErrorKind::AliasedArguments,
         "aliased write arguments");
  expect(error_of([&] { gradient(file("square"), GradRequest{"square", {0.0, 3.0}, {}, {}}); }) ==
             ErrorKind::AliasedArguments,
         "shared read in gradient mode");
  ExecOptions off;
  off.invcheck = false;
  std::mt19937_64 rng(3);
  for (const auto& e : example_catalog()) {
    Program p = load_example(e.name);
    for (int t = 0; t < 5; ++t) {
      auto args = sample_inputs(e.name, rng);
      expect(run(p, e.entry, args) == run(p, e.entry, args, off), e.name + " invcheck on/off");
    }
  }
  Program clean = file("clean_ancilla");
  expect(run(clean, "clean", {0.5, 2.0}) == run(clean, "clean", {0.5, 2.0}, off), "clean_ancilla on/off");
}

void structure() {
  for (const Program& p : corpus()) {
    for (const auto& f : p.functions) {
      expect(invert_function(invert_function(f)) == expand_routines(f), f.name + " involution");
    }
    std::string text = pretty_print(p);
    expect(parse_program(text, "<pretty>") == p, "parse of pretty text");
  }
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<void()> body;
  };
  const std::vector<Criterion> criteria = {
      {1, "bennett exact counts", bennett},
      {2, "treeverse bounds", treeverse},
      {3, "round-trip reversibility", round_trip},
      {4, "gradient oracle agreement", [] { gradients(false); }},
      {5, "adjoint-inverse identity", adjoint_identity},
      {6, "hessian of the norm", hessian_norm},
      {7, "primal restoration", [] { gradients(true); }},
      {8, "round-off ordering", roundoff},
      {9, "reversibility-check semantics", check_semantics},
      {10, "structural properties", structure},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      c.body();
    } catch (const Failure& f) {
      ok = false;
      detail = f.what;
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream line;
    line << (ok ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name << " (" << secs << " s)";
    if (!ok) line << " - " << detail;
    std::cout << line.str() << std::endl;
    failed += ok ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
