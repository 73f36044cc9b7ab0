#pragma once

#include <cmath>
#include <cstdint>
#include <complex>
#include <optional>

namespace revlang {

/// Q31.32 two's-complement fixed point. Addition and subtraction wrap, so
/// `a + b - b == a` holds bit-exactly for every pair of values.
class Fixed {
 public:
  static constexpr int kFractionBits = 32;
  static constexpr double kScale = 4294967296.0;  // 2^32

  constexpr Fixed() = default;

  static constexpr Fixed from_raw(std::int64_t raw) {
    Fixed f;
    f.raw_ = raw;
    return f;
  }
  /// Round to nearest representable value; out-of-range inputs wrap.
  static Fixed from_double(double v);
  /// Like from_double but reports values outside the Q31.32 range.
  static std::optional<Fixed> from_double_checked(double v);
  static constexpr Fixed from_int(std::int64_t v) {
    return from_raw(static_cast<std::int64_t>(static_cast<std::uint64_t>(v) << kFractionBits));
  }

  constexpr std::int64_t raw() const { return raw_; }
  double to_double() const { return static_cast<double>(raw_) / kScale; }

  friend constexpr Fixed operator+(Fixed a, Fixed b) {
    return from_raw(static_cast<std::int64_t>(static_cast<std::uint64_t>(a.raw_) +
                                              static_cast<std::uint64_t>(b.raw_)));
  }
  friend constexpr Fixed operator-(Fixed a, Fixed b) {
    return from_raw(static_cast<std::int64_t>(static_cast<std::uint64_t>(a.raw_) -
                                              static_cast<std::uint64_t>(b.raw_)));
  }
  friend constexpr Fixed operator-(Fixed a) { return Fixed{} - a; }
  /// Product rounded to nearest (ties away from zero), wrapping.
  friend Fixed operator*(Fixed a, Fixed b);

  friend constexpr bool operator==(Fixed a, Fixed b) { return a.raw_ == b.raw_; }
  friend constexpr auto operator<=>(Fixed a, Fixed b) { return a.raw_ <=> b.raw_; }

 private:
  std::int64_t raw_ = 0;
};

/// Unsigned logarithmic number: value = exp(exponent) > 0. The exponent is
/// held as Q11.52 fixed point so that `*=` and `/=` are exact integer
/// additions on the exponent.
class ULog {
 public:
  static constexpr int kFractionBits = 52;
  static constexpr double kScale = 4503599627370496.0;  // 2^52

  constexpr ULog() = default;  // exp(0) == 1

  static constexpr ULog from_raw_exponent(std::int64_t raw) {
    ULog u;
    u.raw_ = raw;
    return u;
  }
  /// exp(log_value), log_value quantized to the exponent grid.
  static ULog from_exponent(double log_value);
  /// Requires v > 0 and finite.
  static ULog from_double(double v) { return from_exponent(std::log(v)); }

  constexpr std::int64_t raw_exponent() const { return raw_; }
  double exponent() const { return static_cast<double>(raw_) / kScale; }
  double to_double() const { return std::exp(exponent()); }

  friend constexpr ULog operator*(ULog a, ULog b) {
    return from_raw_exponent(static_cast<std::int64_t>(static_cast<std::uint64_t>(a.raw_) +
                                                       static_cast<std::uint64_t>(b.raw_)));
  }
  friend constexpr ULog operator/(ULog a, ULog b) {
    return from_raw_exponent(static_cast<std::int64_t>(static_cast<std::uint64_t>(a.raw_) -
                                                       static_cast<std::uint64_t>(b.raw_)));
  }
  friend constexpr bool operator==(ULog a, ULog b) { return a.raw_ == b.raw_; }
  friend constexpr auto operator<=>(ULog a, ULog b) { return a.raw_ <=> b.raw_; }

 private:
  std::int64_t raw_ = 0;
};

/// First-order dual number used for forward-over-reverse Hessians.
struct Dual {
  double v = 0.0;
  double d = 0.0;

  constexpr Dual() = default;
  constexpr Dual(double value, double tangent = 0.0) : v(value), d(tangent) {}

  friend constexpr Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
  friend constexpr Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
  friend constexpr Dual operator-(Dual a) { return {-a.v, -a.d}; }
  friend constexpr Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
  friend constexpr Dual operator/(Dual a, Dual b) {
    return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
  }
  Dual& operator+=(Dual o) { return *this = *this + o; }
  Dual& operator-=(Dual o) { return *this = *this - o; }
  Dual& operator*=(Dual o) { return *this = *this * o; }

  friend constexpr bool operator==(Dual a, Dual b) { return a.v == b.v && a.d == b.d; }
};

inline Dual sqrt(Dual a) {
  double s = std::sqrt(a.v);
  return {s, a.d / (2.0 * s)};
}
inline Dual exp(Dual a) {
  double e = std::exp(a.v);
  return {e, a.d * e};
}
inline Dual log(Dual a) { return {std::log(a.v), a.d / a.v}; }
inline Dual sin(Dual a) { return {std::sin(a.v), a.d * std::cos(a.v)}; }
inline Dual cos(Dual a) { return {std::cos(a.v), -a.d * std::sin(a.v)}; }
inline Dual abs(Dual a) { return a.v < 0 ? -a : a; }
inline Dual atan2(Dual y, Dual x) {
  double r2 = x.v * x.v + y.v * y.v;
  return {std::atan2(y.v, x.v), (x.v * y.d - y.v * x.d) / r2};
}
/// a^b for a > 0 or integral constant b.
Dual pow(Dual a, Dual b);

using Complex = std::complex<double>;

/// Round a binary64 value to the nearest binary32 and widen back. The
/// volatile store keeps GCC 11's SLP vectorizer from eliding the narrowing.
inline double round_to_float32(double v) {
  volatile float f = static_cast<float>(v);
  return static_cast<double>(f);
}

}  // namespace revlang
