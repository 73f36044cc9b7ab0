#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "revlang/stdlib.hpp"
#include "support.hpp"

using namespace revlang;

namespace {

std::vector<double> column_norms(const Value& m) {
  const Array& a = m.as<Array>();
  const std::size_t rows = a.shape.at(0), cols = a.shape.at(1);
  std::vector<double> out;
  for (std::size_t j = 0; j < cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) s += std::pow(test::num(a.data[j * rows + i]), 2);
    out.push_back(std::sqrt(s));
  }
  return out;
}

}  // namespace

TEST_CASE("catalog loads") {
  CHECK(example_catalog().size() == 9);
  for (const auto& e : example_catalog()) {
    CAPTURE(e.name);
    Program p = load_example(e.name);
    CHECK(p.find(e.entry) != nullptr);
    CHECK(example_info(e.name).file == e.file);
  }
  try {
    load_example("nope");
    FAIL("expected UnknownExample");
  } catch (const RevError& e) {
    CHECK(e.kind() == ErrorKind::UnknownExample);
  }
}

TEST_CASE("shipped examples compute their documented results") {
  CHECK(run(load_example("multiplier"), "multiplier", {std::int64_t{2}, std::int64_t{3}, std::int64_t{5}}) ==
        std::vector<Value>{std::int64_t{17}, std::int64_t{3}, std::int64_t{5}});
  auto pw = run(load_example("mypower_log"), "mypower_log", {0.0, 2.0, std::int64_t{10}});
  CHECK(std::fabs(test::num(pw[0]) - 1024.0) <= 1e-9);
  CHECK(pw[1] == Value(2.0));
  CHECK(pw[2] == Value(std::int64_t{10}));
}

TEST_CASE("mypower_log leaves fixed-point inputs bit-identical") {
  Program p = load_example("mypower_log");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for (int t = 0; t < 20; ++t) {
    std::vector<Value> args = {Fixed::from_double(0.25), Fixed::from_double(u(rng)), std::int64_t{1 + t % 6}};
    auto out = run(p, "mypower_log", args);
    CHECK(out[1] == args[1]);
    CHECK(out[2] == args[2]);
    CHECK(uncall(p, "mypower_log", out) == args);
  }
}

TEST_CASE("unitary decomposition preserves column norms and inverts") {
  Program p = load_example("i_umm");
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    auto args = sample_inputs("i_umm", rng);
    auto out = run(p, "i_umm", args);
    auto before = column_norms(args[0]), after = column_norms(out[0]);
    for (std::size_t j = 0; j < before.size(); ++j) CHECK(std::fabs(before[j] - after[j]) <= 1e-9);
    CHECK(out[1] == args[1]);
    auto back = uncall(p, "i_umm", out);
    CHECK(max_deviation(back[0], args[0]) <= 1e-9);
    CHECK(back[1] == args[1]);
  }
}

TEST_CASE("every catalog program passes the reversibility check") {
  std::mt19937_64 rng(4);
  for (const auto& e : example_catalog()) {
    Program p = load_example(e.name);
    for (int t = 0; t < 20; ++t) {
      auto r = check_reversibility(p, e.entry, sample_inputs(e.name, rng));
      CAPTURE(e.name);
      CAPTURE(r.message);
      CHECK(r.ok);
      CHECK(r.ancilla_balanced);
      CHECK(r.max_deviation <= 1e-9);
    }
  }
}

TEST_CASE("sample inputs are reproducible") {
  std::mt19937_64 a(99), b(99);
  for (const auto& e : example_catalog()) CHECK(sample_inputs(e.name, a) == sample_inputs(e.name, b));
  std::mt19937_64 c(1);
  CHECK_THROWS_AS(sample_inputs("nope", c), RevError);
}

TEST_CASE("solar system config validation") {
  auto cfg = SolarSystemConfig::two_body();
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.bodies.size() == 2);
  auto bad = cfg;
  bad.dt = 0.0;
  CHECK_THROWS_AS(bad.validate(), RevError);
  bad = cfg;
  bad.bodies[0].mass = -1.0;
  CHECK_THROWS_AS(bad.validate(), RevError);
}

TEST_CASE("leapfrog with no steps is exact") {
  auto cfg = SolarSystemConfig::two_body();
  cfg.steps = 0;
  for (auto prec : {Precision::Binary32, Precision::Binary64}) {
    CHECK(leapfrog_simulate(cfg, LeapfrogVariant::Clean, prec).reversal_error == 0.0);
    CHECK(leapfrog_simulate(cfg, LeapfrogVariant::Cumulative, prec).reversal_error == 0.0);
  }
}

TEST_CASE("leapfrog clean variant reverses better than the cumulative one") {
  auto cfg = SolarSystemConfig::two_body();
  cfg.steps = 2000;
  for (auto prec : {Precision::Binary32, Precision::Binary64}) {
    auto clean = leapfrog_simulate(cfg, LeapfrogVariant::Clean, prec);
    auto cum = leapfrog_simulate(cfg, LeapfrogVariant::Cumulative, prec);
    CHECK(clean.reversal_error < cum.reversal_error);
  }
}

TEST_CASE("leapfrog agrees with an extended-precision integration") {
  auto cfg = SolarSystemConfig::two_body();
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::int64_t steps : {100, 1000, 3000}) {
    cfg.steps = steps;
    auto r = leapfrog_simulate(cfg, LeapfrogVariant::Clean, Precision::Binary64);
    double scale = 0.0;
    for (const auto& e : r.x.as<Array>().data) scale = std::max(scale, std::fabs(test::num(e)));
    CAPTURE(steps);
    CHECK(r.reference_error <= 1e3 * eps * scale * static_cast<double>(steps));
  }
}

TEST_CASE("round-off experiment rows") {
  auto cfg = SolarSystemConfig::two_body();
  auto rows = roundoff_experiment(cfg, 400, Precision::Binary64, 4);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].steps == 100);
  CHECK(rows[3].steps == 400);
  for (const auto& r : rows) CHECK(r.precision == 64);
  std::string csv = roundoff_csv(rows);
  CHECK(csv.rfind("steps,error_clean,error_cumulative,precision\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}
