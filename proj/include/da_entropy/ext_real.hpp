#pragma once

#include <cmath>
#include <compare>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace daent {

/// A real number or positive infinity.
///
/// Divergences are always produced as nonnegative values; differences of
/// divergences (gaps, slacks) reuse the same type and may carry
/// rounding-level negative values. NaN is never representable.
class ExtReal {
 public:
  constexpr ExtReal() = default;

  static ExtReal finite(double v) {
    if (std::isnan(v) || std::isinf(v)) {
      throw std::invalid_argument("ExtReal::finite: value must be finite");
    }
    return ExtReal(v, false);
  }
  static constexpr ExtReal infinity() { return ExtReal(0.0, true); }

  // +inf maps to infinity(); NaN and -inf are rejected.
  static ExtReal from_double(double v) {
    if (std::isinf(v) && v > 0) return infinity();
    return finite(v);
  }

  constexpr bool is_finite() const { return !infinite_; }
  constexpr bool is_infinite() const { return infinite_; }

  double value() const {
    if (infinite_) throw std::logic_error("ExtReal::value on infinity");
    return value_;
  }
  // Lossy view for reporting; infinity becomes +HUGE_VAL.
  constexpr double as_double() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  friend ExtReal operator+(ExtReal a, ExtReal b) {
    if (a.infinite_ || b.infinite_) return infinity();
    return ExtReal(a.value_ + b.value_, false);
  }
  // inf - finite = inf. Subtracting an infinity is undefined and throws.
  friend ExtReal operator-(ExtReal a, ExtReal b) {
    if (b.infinite_) throw std::domain_error("ExtReal: subtracting infinity");
    if (a.infinite_) return infinity();
    return ExtReal(a.value_ - b.value_, false);
  }

  friend constexpr bool operator==(ExtReal a, ExtReal b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }
  friend constexpr std::partial_ordering operator<=>(ExtReal a, ExtReal b) {
    return a.as_double() <=> b.as_double();
  }

  std::string to_string() const;

 private:
  constexpr ExtReal(double v, bool inf) : value_(v), infinite_(inf) {}

  double value_ = 0.0;
  bool infinite_ = false;
};

// Shortest round-trip-safe rendering; infinity is the literal "inf".
inline std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string ExtReal::to_string() const {
  return infinite_ ? std::string("inf") : format_real(value_);
}

inline std::ostream& operator<<(std::ostream& os, ExtReal x) {
  return os << x.to_string();
}

}  // namespace daent
