#pragma once

#include <compare>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>

namespace prioq {

/// A real number or +infinity.
///
/// Quantities such as expected sojourn time are infinite for priority levels
/// below the bifurcation point. Carrying that case as an explicit state keeps
/// it from leaking into arithmetic as an IEEE infinity or NaN.
class ExtendedReal {
public:
  constexpr ExtendedReal() = default;

  static constexpr ExtendedReal finite(double value) { return ExtendedReal(value, false); }
  static constexpr ExtendedReal infinity() { return ExtendedReal(0.0, true); }

  constexpr bool is_finite() const { return !infinite_; }
  constexpr bool is_infinite() const { return infinite_; }

  /// Throws std::logic_error when infinite.
  double value() const {
    if (infinite_) throw std::logic_error("ExtendedReal::value() called on +inf");
    return value_;
  }

  /// IEEE view, for plotting and reporting only.
  constexpr double to_double() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  friend constexpr bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }

  friend constexpr std::partial_ordering operator<=>(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.infinite_ && b.infinite_) return std::partial_ordering::equivalent;
    if (a.infinite_) return std::partial_ordering::greater;
    if (b.infinite_) return std::partial_ordering::less;
    return a.value_ <=> b.value_;
  }

  friend constexpr ExtendedReal operator+(const ExtendedReal& a, double b) {
    return a.infinite_ ? a : finite(a.value_ + b);
  }
  friend constexpr ExtendedReal operator-(const ExtendedReal& a, double b) {
    return a.infinite_ ? a : finite(a.value_ - b);
  }
  /// Scaling by a positive factor.
  friend constexpr ExtendedReal operator*(const ExtendedReal& a, double b) {
    return a.infinite_ ? a : finite(a.value_ * b);
  }
  friend constexpr ExtendedReal operator/(const ExtendedReal& a, double b) {
    return a.infinite_ ? a : finite(a.value_ / b);
  }

  friend std::ostream& operator<<(std::ostream& os, const ExtendedReal& x) {
    if (x.infinite_) return os << "inf";
    return os << x.value_;
  }

private:
  constexpr ExtendedReal(double value, bool infinite) : value_(value), infinite_(infinite) {}

  double value_ = 0.0;
  bool infinite_ = false;
};

/// A per-bin estimate: a value, +inf, or undefined (no data).
using CurveValue = std::optional<ExtendedReal>;

}  // namespace prioq
