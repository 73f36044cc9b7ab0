#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>

#include "revlang/errors.hpp"

namespace revlang {

/// T-step process s_{i+1} = step(i, s_i), i = 1..T, starting from s_1.
template <class S>
struct StepProgram {
  std::int64_t length = 0;
  std::function<S(std::int64_t, const S&)> step;
  S initial{};
};

struct ScheduleCounters {
  std::int64_t forward_steps = 0;
  std::int64_t inverse_steps = 0;
  std::int64_t peak_states = 0;     // live states, including s_1 and the last one
  std::int64_t snapshots_peak = 0;  // stored checkpoints, excluding the working state
};

/// ((2k-1)^n, n(k-1)+2). Throws OverflowError past 64 bits.
std::pair<std::int64_t, std::int64_t> bennett_counts(std::int64_t k, std::int64_t n);

/// binomial(t + d, d), exact. Throws OverflowError past 64 bits.
std::int64_t eta(std::int64_t t, std::int64_t d);

/// Smallest t >= 1 with eta(t, d) >= T.
std::int64_t treeverse_sweeps(std::int64_t T, std::int64_t d);

/// Closed-form time and space of the k-way reversible schedule for a T-step
/// process with S units of memory per state.
std::pair<double, double> analytic_rev_cost(double T, double S, double k);

/// Whether len is a non-negative power of k; sets n.
bool is_power_of(std::int64_t len, std::int64_t k, std::int64_t& n);

namespace detail {

template <class S>
class Bennett {
 public:
  Bennett(const StepProgram<S>& p, std::int64_t k) : p_(p), k_(k) {}

  // One sector; `inverse` runs its uncomputation.
  void sector(std::int64_t base, std::int64_t len, bool inverse) {
    if (len == 1) {
      if (!inverse) {
        states_.emplace(base + 1, p_.step(base, states_.at(base)));
        ++c.forward_steps;
        touch();
      } else {
        touch();
        auto it = states_.find(base + 1);
        if (it == states_.end() || !(p_.step(base, states_.at(base)) == it->second)) {
          throw RevError(ErrorKind::DirtyAncilla, "state " + std::to_string(base + 1) + " does not uncompute to zero");
        }
        states_.erase(it);
        ++c.inverse_steps;
      }
      return;
    }
    const std::int64_t size = (len + k_ - 1) / k_;
    const std::int64_t parts = (len + size - 1) / size;
    auto part_len = [&](std::int64_t j) { return std::min(size, len - size * (j - 1)); };
    auto start = [&](std::int64_t j) { return base + size * (j - 1); };
    if (!inverse) {
      for (std::int64_t j = 1; j <= parts; ++j) sector(start(j), part_len(j), false);
      for (std::int64_t j = parts - 1; j >= 1; --j) sector(start(j), part_len(j), true);
    } else {
      for (std::int64_t j = 1; j <= parts - 1; ++j) sector(start(j), part_len(j), false);
      for (std::int64_t j = parts; j >= 1; --j) sector(start(j), part_len(j), true);
    }
  }

  void touch() {
    c.peak_states = std::max<std::int64_t>(c.peak_states, static_cast<std::int64_t>(states_.size()));
  }

  std::map<std::int64_t, S> states_;
  ScheduleCounters c;

 private:
  const StepProgram<S>& p_;
  std::int64_t k_;
};

template <class S, class Acc>
class Treeverse {
 public:
  using BackStep = std::function<Acc(std::int64_t, const S&, Acc)>;
  Treeverse(const StepProgram<S>& p, BackStep back, Acc init) : acc(std::move(init)), p_(p), back_(std::move(back)) {}

  // Reverse steps i .. i+len-1 given s_i, with `c` checkpoints (one of them
  // holding s_i) and each step run at most `r` more times.
  void reverse(std::int64_t i, const S& s, std::int64_t len, std::int64_t c, std::int64_t r) {
    if (len == 1) {
      visit(i, s);
      return;
    }
    if (c == 1) {
      for (std::int64_t j = len - 1; j >= 0; --j) visit(i + j, advance(i, s, j));
      return;
    }
    const std::int64_t m = std::max<std::int64_t>(1, std::min(beta(c, r - 1), len - 1));
    S mid = advance(i, s, m);
    ++live_;
    counters.snapshots_peak = std::max(counters.snapshots_peak, live_);
    reverse(i + m, mid, len - m, c - 1, r);
    --live_;
    reverse(i, s, m, c, r - 1);
  }

  S final_state{};
  ScheduleCounters counters;
  Acc acc;

  void start(const S& s1, std::int64_t d, std::int64_t t) {
    live_ = 1;
    counters.snapshots_peak = 1;
    reverse(1, s1, p_.length, d, t);
    counters.peak_states = counters.snapshots_peak + 1;
  }

 private:
  static std::int64_t beta(std::int64_t c, std::int64_t r) {
    if (r < 0) return 0;
    std::int64_t out = 0;
    try {
      out = eta(r, c);
    } catch (const RevError&) {
      out = INT64_MAX;
    }
    return out;
  }

  S advance(std::int64_t i, S s, std::int64_t steps) {
    for (std::int64_t j = 0; j < steps; ++j) {
      s = p_.step(i + j, s);
      ++counters.forward_steps;
    }
    return s;
  }

  void visit(std::int64_t i, const S& s) {
    if (i == p_.length && !have_final_) {
      final_state = p_.step(i, s);
      ++counters.forward_steps;
      have_final_ = true;
    }
    acc = back_(i, s, std::move(acc));
    ++counters.inverse_steps;
  }

  const StepProgram<S>& p_;
  BackStep back_;
  std::int64_t live_ = 0;
  bool have_final_ = false;
};

}  // namespace detail

/// Bennett's compute-copy-uncompute recursion over s_base .. s_{base+len}.
/// Leaves only s_base and s_{base+len} live. With `strict`, len must be a
/// power of k; otherwise sectors have ceil(len/k) steps and the last takes
/// the remainder.
template <class S>
std::pair<S, ScheduleCounters> bennett_run(const StepProgram<S>& prog, std::int64_t k, std::int64_t base,
                                           std::int64_t len, bool strict = false) {
  if (k < 2) throw RevError(ErrorKind::InvalidArgument, "InvalidPartition: k must be at least 2");
  if (len < 1) throw RevError(ErrorKind::InvalidArgument, "sector length must be positive");
  std::int64_t n = 0;
  if (strict && !is_power_of(len, k, n)) {
    throw RevError(ErrorKind::InvalidArgument,
                   "NonConformingLength: " + std::to_string(len) + " is not a power of " + std::to_string(k));
  }
  detail::Bennett<S> b(prog, k);
  b.states_.emplace(base, prog.initial);
  b.touch();
  b.sector(base, len, false);
  return {b.states_.at(base + len), b.c};
}

/// Binomial checkpointing: visits s_T, ..., s_1 in that order through
/// `backstep`, storing at most d checkpoints. forward_steps includes the
/// step that produces the final state s_{T+1}.
template <class S, class Acc>
std::pair<Acc, ScheduleCounters> treeverse_run(const StepProgram<S>& prog, std::int64_t d,
                                               std::function<Acc(std::int64_t, const S&, Acc)> backstep,
                                               Acc acc = {}) {
  if (d < 1) throw RevError(ErrorKind::InvalidArgument, "InvalidBudget: at least one snapshot is needed");
  if (prog.length < 1) throw RevError(ErrorKind::InvalidArgument, "InvalidBudget: empty process");
  detail::Treeverse<S, Acc> tv(prog, std::move(backstep), std::move(acc));
  tv.start(prog.initial, d, treeverse_sweeps(prog.length, d));
  return {std::move(tv.acc), tv.counters};
}

}  // namespace revlang
