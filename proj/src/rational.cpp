#include "pgcl/rational.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "pgcl/errors.hpp"

namespace pgcl {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

Rational parse_unsigned_decimal(std::string_view s) {
  auto dot = s.find('.');
  if (dot == std::string_view::npos) {
    if (!all_digits(s)) throw Error("malformed number '" + std::string(s) + "'");
    return Rational(mpz_class(std::string(s), 10));
  }
  std::string_view whole = s.substr(0, dot);
  std::string_view frac = s.substr(dot + 1);
  if ((!whole.empty() && !all_digits(whole)) || !all_digits(frac)) {
    throw Error("malformed number '" + std::string(s) + "'");
  }
  mpz_class num(std::string(whole.empty() ? "0" : whole) + std::string(frac), 10);
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
  Rational q(num, den);
  q.canonicalize();
  return q;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  Rational q;
  auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    q = parse_unsigned_decimal(text);
  } else {
    Rational num = parse_unsigned_decimal(text.substr(0, slash));
    Rational den = parse_unsigned_decimal(text.substr(slash + 1));
    if (sgn(den) == 0) throw Error("zero denominator in '" + std::string(text) + "'");
    q = num / den;
  }
  return negative ? Rational(-q) : q;
}

std::string to_string(const Rational& q) { return q.get_str(); }

std::string to_decimal(const Rational& q, int digits) {
  mpz_class num = q.get_num();
  const mpz_class& den = q.get_den();
  bool negative = sgn(num) < 0;
  if (negative) num = -num;
  mpz_class whole = num / den;
  mpz_class rest = num % den;
  std::string out = negative ? "-" : "";
  out += whole.get_str();
  if (digits > 0) {
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(digits));
    mpz_class frac = rest * scale / den;
    std::string f = frac.get_str();
    out += '.';
    out += std::string(static_cast<std::size_t>(digits) - f.size(), '0');
    out += f;
  }
  return out;
}

bool is_integer(const Rational& q) { return q.get_den() == 1; }

double to_double(const Rational& q) { return q.get_d(); }

std::size_t hash_value(const Rational& q) {
  std::size_t h = 0;
  auto mix = [&h](const mpz_class& z) {
    std::size_t n = mpz_size(z.get_mpz_t());
    h ^= std::hash<int>{}(sgn(z)) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    for (std::size_t i = 0; i < n; ++i) {
      auto limb = static_cast<std::size_t>(mpz_getlimbn(z.get_mpz_t(), static_cast<mp_size_t>(i)));
      h ^= limb + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
  };
  mix(q.get_num());
  mix(q.get_den());
  return h;
}

Rational floor_dyadic(double x, int bits) {
  if (!std::isfinite(x)) throw Error("non-finite value in floor_dyadic");
  double scaled = std::floor(std::ldexp(x, bits));
  mpz_class num(scaled);
  mpz_class den = 1;
  den <<= bits;
  Rational q(num, den);
  q.canonicalize();
  return q;
}

Rational floor_dyadic(const Rational& x, int bits) {
  mpz_class scale = 1;
  scale <<= bits;
  mpz_class num = x.get_num() * scale;
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), num.get_mpz_t(), x.get_den().get_mpz_t());
  Rational q(fl, scale);
  q.canonicalize();
  return q;
}

ExtRat::ExtRat(const Rational& value) : value_(value) {
  if (sgn(value_) < 0) throw NegativeValue("negative value " + value_.get_str() + " in nonnegative arithmetic");
}

ExtRat::ExtRat(long value) : ExtRat(Rational(value)) {}

ExtRat ExtRat::infinity() {
  ExtRat r;
  r.infinite_ = true;
  return r;
}

ExtRat operator+(const ExtRat& a, const ExtRat& b) {
  if (a.infinite_ || b.infinite_) return ExtRat::infinity();
  ExtRat r;
  r.value_ = a.value_ + b.value_;
  return r;
}

ExtRat operator*(const ExtRat& a, const ExtRat& b) {
  if (a.is_zero() || b.is_zero()) return ExtRat();
  if (a.infinite_ || b.infinite_) return ExtRat::infinity();
  ExtRat r;
  r.value_ = a.value_ * b.value_;
  return r;
}

bool operator==(const ExtRat& a, const ExtRat& b) {
  if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
  return a.value_ == b.value_;
}

bool operator<(const ExtRat& a, const ExtRat& b) {
  if (a.infinite_) return false;
  if (b.infinite_) return true;
  return a.value_ < b.value_;
}

std::string ExtRat::str() const { return infinite_ ? "inf" : to_string(value_); }

std::string ExtRat::decimal(int digits) const { return infinite_ ? "inf" : to_decimal(value_, digits); }

ExtRat min(const ExtRat& a, const ExtRat& b) { return b < a ? b : a; }

ExtRat max(const ExtRat& a, const ExtRat& b) { return a < b ? b : a; }

ExtRat monus(const ExtRat& a, const ExtRat& b) {
  if (a <= b) return ExtRat();
  if (a.is_infinite()) return ExtRat::infinity();
  return ExtRat(Rational(a.value() - b.value()));
}

ExtRat parse_extrat(std::string_view text) {
  if (text == "inf" || text == "infinity") return ExtRat::infinity();
  return ExtRat(parse_rational(text));
}

}  // namespace pgcl
