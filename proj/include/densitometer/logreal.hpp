#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <limits>

namespace densitometer {

/// A nonnegative real stored as its natural logarithm. Zero is -inf.
///
/// Weights at schedule indices like n = 9^9 of a geometric sequence are far
/// below the double range, so every magnitude in the library travels in this
/// form and is materialized with linear() only where it is known to fit.
class LogReal {
 public:
  constexpr LogReal() = default;

  static constexpr LogReal from_log(double log_value) { return LogReal(log_value); }
  static LogReal from_linear(double value) {
    return LogReal(value > 0.0 ? std::log(value) : -std::numeric_limits<double>::infinity());
  }
  static constexpr LogReal zero() { return LogReal(-std::numeric_limits<double>::infinity()); }
  static constexpr LogReal one() { return LogReal(0.0); }

  constexpr double log() const { return log_; }
  double linear() const { return std::exp(log_); }
  constexpr bool is_zero() const { return log_ == -std::numeric_limits<double>::infinity(); }

  friend constexpr LogReal operator*(LogReal a, LogReal b) { return LogReal(a.log_ + b.log_); }
  friend constexpr LogReal operator/(LogReal a, LogReal b) { return LogReal(a.log_ - b.log_); }
  friend LogReal operator+(LogReal a, LogReal b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    double hi = std::max(a.log_, b.log_);
    double lo = std::min(a.log_, b.log_);
    return LogReal(hi + std::log1p(std::exp(lo - hi)));
  }
  /// Requires a >= b.
  friend LogReal operator-(LogReal a, LogReal b) {
    if (b.is_zero()) return a;
    if (b.log_ >= a.log_) return zero();
    return LogReal(a.log_ + std::log1p(-std::exp(b.log_ - a.log_)));
  }

  constexpr LogReal pow(double exponent) const {
    return exponent == 0.0 ? one() : LogReal(log_ * exponent);
  }
  constexpr LogReal sqrt() const { return pow(0.5); }

  friend constexpr auto operator<=>(LogReal a, LogReal b) { return a.log_ <=> b.log_; }
  friend constexpr bool operator==(LogReal a, LogReal b) { return a.log_ == b.log_; }

 private:
  constexpr explicit LogReal(double log_value) : log_(log_value) {}

  double log_ = -std::numeric_limits<double>::infinity();
};

}  // namespace densitometer
