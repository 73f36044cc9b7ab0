#include "revlang/tradeoff.hpp"

#include <cmath>
#include <limits>

namespace revlang {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b, const char* what) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw RevError(ErrorKind::OverflowError, std::string(what) + " exceeds 64 bits");
  return out;
}

}  // namespace

std::pair<std::int64_t, std::int64_t> bennett_counts(std::int64_t k, std::int64_t n) {
  if (k < 2) throw RevError(ErrorKind::InvalidArgument, "InvalidPartition: k must be at least 2");
  if (n < 0) throw RevError(ErrorKind::InvalidArgument, "recursion depth must be non-negative");
  std::int64_t steps = 1;
  for (std::int64_t i = 0; i < n; ++i) steps = checked_mul(steps, 2 * k - 1, "step count");
  std::int64_t peak = 0;
  if (__builtin_add_overflow(checked_mul(n, k - 1, "peak"), 2, &peak)) {
    throw RevError(ErrorKind::OverflowError, "peak exceeds 64 bits");
  }
  return {steps, peak};
}

std::int64_t eta(std::int64_t t, std::int64_t d) {
  if (t < 0 || d < 0) throw RevError(ErrorKind::InvalidArgument, "eta needs non-negative arguments");
  // C(t+d, min(t,d)) built incrementally; each partial product is itself a binomial.
  const std::int64_t k = std::min(t, d);
  const std::int64_t n = t + d;
  unsigned __int128 acc = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    acc = acc * static_cast<unsigned __int128>(n - k + i) / static_cast<unsigned __int128>(i);
    if (acc > static_cast<unsigned __int128>(std::numeric_limits<std::int64_t>::max())) {
      throw RevError(ErrorKind::OverflowError, "binomial exceeds 64 bits");
    }
  }
  return static_cast<std::int64_t>(acc);
}

std::int64_t treeverse_sweeps(std::int64_t T, std::int64_t d) {
  if (d < 1) throw RevError(ErrorKind::InvalidArgument, "InvalidBudget: at least one snapshot is needed");
  for (std::int64_t t = 1;; ++t) {
    try {
      if (eta(t, d) >= T) return t;
    } catch (const RevError&) {
      return t;  // past 64 bits, certainly >= T
    }
  }
}

std::pair<double, double> analytic_rev_cost(double T, double S, double k) {
  if (!(T > 0) || !(S > 0)) throw RevError(ErrorKind::DomainError, "time and space must be positive");
  if (!(k >= 2)) throw RevError(ErrorKind::InvalidArgument, "InvalidPartition: k must be at least 2");
  const double ratio = T / S;
  const double tr = T * std::pow(ratio, std::log(2.0 - 1.0 / k) / std::log(k));
  const double sr = (k - 1.0) / std::log(k) * S * std::log(ratio);
  return {tr, sr};
}

bool is_power_of(std::int64_t len, std::int64_t k, std::int64_t& n) {
  n = 0;
  if (len < 1 || k < 2) return false;
  while (len % k == 0) {
    len /= k;
    ++n;
  }
  return len == 1;
}

}  // namespace revlang
