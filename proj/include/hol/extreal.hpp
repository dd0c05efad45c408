#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace hol {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Raised when an input violates an operation's precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numeric procedure cannot reach its target accuracy.
class DiagnosticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Arithmetic on [0, +inf] with the conventions 0*inf = 0, inf/inf = 0 and
// 0/0 = 0. These helpers work on raw doubles so hot loops can use them.
inline double mul0(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  return a * b;
}

inline double div0(double a, double b) {
  if (a == 0.0) return 0.0;
  if (std::isinf(a) && std::isinf(b)) return 0.0;
  if (b == 0.0) return kInf;
  return a / b;
}

/// x^e for x in [0, inf] with 0^0 = 1, 0^(negative) = inf, inf^(negative) = 0.
inline double pow0(double x, double e) {
  if (e == 0.0) return 1.0;
  if (x == 0.0) return e > 0.0 ? 0.0 : kInf;
  if (std::isinf(x)) return e > 0.0 ? kInf : 0.0;
  return std::pow(x, e);
}

/// Nonnegative extended real.
class ExtReal {
 public:
  constexpr ExtReal() = default;
  ExtReal(double v) : v_(v) {  // NOLINT(google-explicit-constructor)
    if (std::isnan(v) || v < 0.0) {
      throw PreconditionError("ExtReal must be a nonnegative real or +inf, got " + std::to_string(v));
    }
  }

  static ExtReal infinity() { return ExtReal(kInf); }

  [[nodiscard]] double value() const { return v_; }
  [[nodiscard]] bool is_inf() const { return std::isinf(v_); }
  [[nodiscard]] bool is_zero() const { return v_ == 0.0; }

  friend ExtReal operator+(ExtReal a, ExtReal b) { return ExtReal(a.v_ + b.v_); }
  friend ExtReal operator*(ExtReal a, ExtReal b) { return ExtReal(mul0(a.v_, b.v_)); }
  friend ExtReal operator/(ExtReal a, ExtReal b) { return ExtReal(div0(a.v_, b.v_)); }
  ExtReal& operator+=(ExtReal o) { return *this = *this + o; }
  ExtReal& operator*=(ExtReal o) { return *this = *this * o; }

  friend ExtReal pow(ExtReal a, double e) { return ExtReal(pow0(a.v_, e)); }

  friend bool operator==(ExtReal a, ExtReal b) { return a.v_ == b.v_; }
  friend std::partial_ordering operator<=>(ExtReal a, ExtReal b) { return a.v_ <=> b.v_; }

  friend std::ostream& operator<<(std::ostream& os, ExtReal x) {
    if (x.is_inf()) return os << "inf";
    return os << x.v_;
  }

 private:
  double v_ = 0.0;
};

/// Parses "inf", "infinity" or a decimal number.
inline double parse_extended(const std::string& s) {
  if (s == "inf" || s == "Inf" || s == "infinity" || s == "+inf") return kInf;
  std::size_t pos = 0;
  double v = std::stod(s, &pos);
  if (pos != s.size()) throw PreconditionError("cannot parse number '" + s + "'");
  return v;
}

}  // namespace hol
