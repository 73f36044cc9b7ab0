#include "revlang/numbers.hpp"

#include <limits>

namespace revlang {

namespace {

constexpr double kTwo63 = 9223372036854775808.0;

// Wraps an integral double into int64 modulo 2^64.
std::int64_t wrap_to_int64(double r) {
  if (r >= -kTwo63 && r < kTwo63) return static_cast<std::int64_t>(r);
  double m = std::fmod(r, 2.0 * kTwo63);
  if (m >= kTwo63) m -= 2.0 * kTwo63;
  if (m < -kTwo63) m += 2.0 * kTwo63;
  return static_cast<std::int64_t>(m);
}

}  // namespace

Fixed Fixed::from_double(double v) {
  if (!std::isfinite(v)) return Fixed{};
  return from_raw(wrap_to_int64(std::round(v * kScale)));
}

std::optional<Fixed> Fixed::from_double_checked(double v) {
  double r = std::round(v * kScale);
  if (!std::isfinite(r) || r < -kTwo63 || r >= kTwo63) return std::nullopt;
  return from_raw(static_cast<std::int64_t>(r));
}

Fixed operator*(Fixed a, Fixed b) {
  __int128 p = static_cast<__int128>(a.raw_) * static_cast<__int128>(b.raw_);
  const __int128 half = static_cast<__int128>(1) << (Fixed::kFractionBits - 1);
  __int128 q = p >= 0 ? (p + half) >> Fixed::kFractionBits : -((-p + half) >> Fixed::kFractionBits);
  return Fixed::from_raw(static_cast<std::int64_t>(static_cast<std::uint64_t>(static_cast<unsigned __int128>(q))));
}

ULog ULog::from_exponent(double log_value) {
  return from_raw_exponent(static_cast<std::int64_t>(std::llround(log_value * kScale)));
}

Dual pow(Dual a, Dual b) {
  double p = std::pow(a.v, b.v);
  double d = 0.0;
  if (a.d != 0.0) {
    d += b.v * std::pow(a.v, b.v - 1.0) * a.d;
  }
  if (b.d != 0.0) {
    d += p * std::log(a.v) * b.d;
  }
  return {p, d};
}

}  // namespace revlang
