#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <string>
#include <string_view>

namespace pgcl {

using Rational = mpq_class;

// Accepts integers, decimals ("0.001") and fractions ("-3/4").
Rational parse_rational(std::string_view text);

// "p" for integers, "p/q" otherwise.
std::string to_string(const Rational& q);

// Decimal expansion truncated toward zero after `digits` fractional digits.
std::string to_decimal(const Rational& q, int digits = 20);

bool is_integer(const Rational& q);
double to_double(const Rational& q);
std::size_t hash_value(const Rational& q);

// Largest multiple of 2^-bits that is <= x.
Rational floor_dyadic(double x, int bits);
Rational floor_dyadic(const Rational& x, int bits);

// Nonnegative extended rational: a finite value >= 0 or infinity.
class ExtRat {
 public:
  ExtRat() = default;
  ExtRat(const Rational& value);  // NOLINT: implicit on purpose
  ExtRat(long value);             // NOLINT

  static ExtRat infinity();

  bool is_infinite() const { return infinite_; }
  bool is_finite() const { return !infinite_; }
  bool is_zero() const { return !infinite_ && sgn(value_) == 0; }
  // Only meaningful for finite values.
  const Rational& value() const { return value_; }

  friend ExtRat operator+(const ExtRat& a, const ExtRat& b);
  friend ExtRat operator*(const ExtRat& a, const ExtRat& b);
  friend bool operator==(const ExtRat& a, const ExtRat& b);
  friend bool operator<(const ExtRat& a, const ExtRat& b);
  friend bool operator<=(const ExtRat& a, const ExtRat& b) { return !(b < a); }
  friend bool operator>(const ExtRat& a, const ExtRat& b) { return b < a; }
  friend bool operator>=(const ExtRat& a, const ExtRat& b) { return !(a < b); }

  ExtRat& operator+=(const ExtRat& other) { return *this = *this + other; }

  std::string str() const;
  std::string decimal(int digits = 20) const;

 private:
  bool infinite_ = false;
  Rational value_ = 0;
};

ExtRat min(const ExtRat& a, const ExtRat& b);
ExtRat max(const ExtRat& a, const ExtRat& b);
// max(a - b, 0), with inf - inf taken as 0 so that x monus x is always 0.
ExtRat monus(const ExtRat& a, const ExtRat& b);
ExtRat parse_extrat(std::string_view text);

}  // namespace pgcl
