#pragma once

#include <string>
#include <string_view>

namespace ssgm {

/// A real number or negative infinity.
///
/// Used for the canonical family's second parameter, where c = -inf denotes
/// the white-noise limit. Arithmetic must branch on is_finite() first; the
/// infinite value is never fed through floating-point formulas.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  constexpr explicit ExtendedReal(double value) : value_(value) {}

  static constexpr ExtendedReal negative_infinity() {
    ExtendedReal r;
    r.finite_ = false;
    return r;
  }

  constexpr bool is_finite() const { return finite_; }

  /// Throws DomainError when called on -inf.
  double value() const;

  /// "-inf" or the shortest round-trip decimal form.
  std::string to_string() const;

  /// Accepts "-inf", "-infinity" (any case) or a decimal number.
  static ExtendedReal parse(std::string_view text);

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.finite_ != b.finite_) return false;
    return !a.finite_ || a.value_ == b.value_;
  }

 private:
  double value_ = 0.0;
  bool finite_ = true;
};

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

/// Strict double parsing: the whole string must be consumed.
double parse_double(std::string_view text);

}  // namespace ssgm
