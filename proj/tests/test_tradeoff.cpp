#include <doctest.h>

#include <cmath>
#include <vector>

#include "revlang/tradeoff.hpp"

using namespace revlang;

namespace {

StepProgram<double> doubling(std::int64_t len) {
  return {len, [](std::int64_t, const double& s) { return 2.0 * s; }, 1.0};
}

// Step depends on i so that visiting a state at the wrong index shows up.
StepProgram<std::int64_t> mixing(std::int64_t len) {
  return {len, [](std::int64_t i, const std::int64_t& s) { return (s * 31 + i * 7 + 3) % 1000003; }, 17};
}

std::int64_t ipow(std::int64_t b, std::int64_t e) {
  std::int64_t out = 1;
  while (e-- > 0) out *= b;
  return out;
}

// States s_1 .. s_{T+1} of a full forward run.
std::vector<std::int64_t> all_states(const StepProgram<std::int64_t>& p) {
  std::vector<std::int64_t> s = {0, p.initial};
  for (std::int64_t i = 1; i <= p.length; ++i) s.push_back(p.step(i, s.back()));
  return s;
}

struct Visit {
  std::vector<std::int64_t> index;
  std::vector<std::int64_t> state;
};

std::pair<Visit, ScheduleCounters> reverse_sweep(const StepProgram<std::int64_t>& p, std::int64_t d) {
  return treeverse_run<std::int64_t, Visit>(p, d, [](std::int64_t i, const std::int64_t& s, Visit v) {
    v.index.push_back(i);
    v.state.push_back(s);
    return v;
  });
}

// Forward steps of the store-nothing reversal: replay from s_1 for every
// visited state, plus the one step producing s_{T+1}.
std::int64_t replay_count(std::int64_t T) {
  std::int64_t steps = 1;
  for (std::int64_t i = T; i >= 1; --i) {
    for (std::int64_t j = 1; j < i; ++j) ++steps;
  }
  return steps;
}

void check_treeverse(std::int64_t T, std::int64_t d) {
  auto p = mixing(T);
  auto ref = all_states(p);
  auto [v, c] = reverse_sweep(p, d);
  REQUIRE(v.index.size() == static_cast<std::size_t>(T));
  for (std::int64_t k = 0; k < T; ++k) {
    CHECK(v.index[k] == T - k);
    CHECK(v.state[k] == ref[T - k]);
  }
  CHECK(c.snapshots_peak <= d);
  CHECK(c.forward_steps <= treeverse_sweeps(T, d) * T);
  CHECK(c.inverse_steps == T);
}

}  // namespace

TEST_CASE("bennett closed-form counts") {
  CHECK(bennett_counts(4, 4) == std::pair<std::int64_t, std::int64_t>{2401, 14});
  CHECK(bennett_counts(7, 0) == std::pair<std::int64_t, std::int64_t>{1, 2});
  CHECK(bennett_counts(3, 2) == std::pair<std::int64_t, std::int64_t>{25, 6});
  CHECK_THROWS_AS(bennett_counts(3, 200), RevError);
}

TEST_CASE("bennett schedule on 256 doublings") {
  auto [s, c] = bennett_run(doubling(256), 4, 1, 256);
  CHECK(s == std::ldexp(1.0, 256));
  CHECK(c.forward_steps + c.inverse_steps == 2401);
  CHECK(c.peak_states == 14);
}

TEST_CASE("bennett measured counts match the closed form") {
  for (std::int64_t k = 2; k <= 5; ++k) {
    for (std::int64_t n = 0; n <= 4; ++n) {
      const std::int64_t len = ipow(k, n);
      auto p = mixing(len);
      auto [s, c] = bennett_run(p, k, 1, len, true);
      auto [steps, peak] = bennett_counts(k, n);
      CAPTURE(k);
      CAPTURE(n);
      CHECK(c.forward_steps + c.inverse_steps == steps);
      CHECK(c.peak_states == peak);
      CHECK(s == all_states(p).back());
    }
  }
}

TEST_CASE("bennett small cases") {
  auto [s1, c1] = bennett_run(doubling(1), 3, 1, 1);
  CHECK(s1 == 2.0);
  CHECK(c1.forward_steps == 1);
  CHECK(c1.inverse_steps == 0);
  CHECK(c1.peak_states == 2);
  auto [s8, c8] = bennett_run(doubling(8), 2, 1, 8);
  CHECK(s8 == 256.0);
  CHECK(c8.forward_steps + c8.inverse_steps == 27);
  CHECK(c8.peak_states == 5);
}

TEST_CASE("bennett non-conforming lengths and errors") {
  for (std::int64_t len : {5, 7, 10, 13, 100}) {
    auto p = mixing(len);
    auto [s, c] = bennett_run(p, 3, 1, len);
    CHECK(s == all_states(p).back());
    CHECK(c.forward_steps - c.inverse_steps == 1);
  }
  CHECK_THROWS_AS(bennett_run(mixing(4), 1, 1, 4), RevError);
  try {
    bennett_run(mixing(10), 3, 1, 10, true);
    FAIL("expected NonConformingLength");
  } catch (const RevError& e) {
    CHECK(std::string(e.what()).find("NonConformingLength") != std::string::npos);
  }
}

TEST_CASE("eta values") {
  CHECK(eta(3, 3) == 20);
  for (std::int64_t d = 0; d < 10; ++d) CHECK(eta(0, d) == 1);
  for (std::int64_t t = 0; t < 10; ++t) CHECK(eta(t, 1) == t + 1);
  CHECK(eta(10, 5) == eta(5, 10));
  CHECK(eta(30, 30) == 118264581564861424LL);
  CHECK_THROWS_AS(eta(100, 100), RevError);
  CHECK(treeverse_sweeps(20, 3) == 3);
  CHECK(treeverse_sweeps(21, 3) == 4);
  CHECK(treeverse_sweeps(1, 5) == 1);
}

TEST_CASE("treeverse on binomial lengths") {
  for (std::int64_t t = 1; t <= 5; ++t) {
    const std::int64_t T = eta(t, 3);
    CAPTURE(T);
    check_treeverse(T, 3);
    auto [v, c] = reverse_sweep(mixing(T), 3);
    CHECK(c.forward_steps <= t * T);
  }
}

TEST_CASE("treeverse order and bounds over a grid") {
  for (std::int64_t T = 1; T <= 500; T += (T < 40 ? 1 : 23)) {
    for (std::int64_t d = 1; d <= 8; ++d) {
      CAPTURE(T);
      CAPTURE(d);
      check_treeverse(T, d);
    }
  }
}

TEST_CASE("treeverse degenerate budgets") {
  for (std::int64_t T : {1, 2, 5, 17}) {
    auto [v, c] = reverse_sweep(mixing(T), T);
    CHECK(c.forward_steps == T);
    auto [v1, c1] = reverse_sweep(mixing(T), T + 3);
    CHECK(c1.forward_steps == T);
    auto [v2, c2] = reverse_sweep(mixing(T), 1);
    CHECK(c2.forward_steps == replay_count(T));
    CHECK(c2.snapshots_peak == 1);
  }
  CHECK_THROWS_AS(reverse_sweep(mixing(5), 0), RevError);
  CHECK_THROWS_AS(reverse_sweep(mixing(0), 2), RevError);
}

TEST_CASE("analytic cost") {
  auto [tr, sr] = analytic_rev_cost(100.0, 100.0, 3.0);
  CHECK(tr == doctest::Approx(100.0));
  CHECK(sr == doctest::Approx(0.0));

  const long double T = 1000.0L, S = 500.0L;
  const long double want_t = T * std::pow(T / S, std::log(1.5L) / std::log(2.0L));
  const long double want_s = (1.0L / std::log(2.0L)) * S * std::log(T / S);
  auto [t2, s2] = analytic_rev_cost(1000.0, 500.0, 2.0);
  CHECK(std::fabs(t2 - static_cast<double>(want_t)) <= 1e-12 * static_cast<double>(want_t));
  CHECK(std::fabs(s2 - static_cast<double>(want_s)) <= 1e-12 * static_cast<double>(want_s));
  CHECK(t2 == doctest::Approx(1500.0));

  // Perfect powers reproduce the recursion counts.
  auto [t44, s44] = analytic_rev_cost(256.0, 1.0, 4.0);
  CHECK(t44 == doctest::Approx(2401.0).epsilon(1e-12));
  CHECK(s44 == doctest::Approx(12.0).epsilon(1e-12));

  double prev = analytic_rev_cost(1e6, 10.0, 2.0).first;
  for (int k = 3; k <= 64; ++k) {
    double cur = analytic_rev_cost(1e6, 10.0, k).first;
    CHECK(cur <= prev);
    prev = cur;
  }
  CHECK_THROWS_AS(analytic_rev_cost(0.0, 1.0, 2.0), RevError);
  CHECK_THROWS_AS(analytic_rev_cost(10.0, -1.0, 2.0), RevError);
}
