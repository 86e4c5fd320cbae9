#pragma once

#include <compare>
#include <concepts>
#include <cstddef>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>

#include <gmpxx.h>

#include "upsilon/errors.hpp"

namespace upsilon {

/// Exact rational number, always in lowest terms with a positive denominator.
/// Serializes as "p" or "p/q".
class Rat {
 public:
  Rat() = default;

  template <std::integral I>
  Rat(I value) : value_(static_cast<long>(value)) {}  // NOLINT(google-explicit-constructor)

  Rat(long numerator, long denominator) {
    if (denominator == 0) throw InvalidArgument("zero denominator");
    value_ = mpq_class(mpz_class(numerator), mpz_class(denominator));
    value_.canonicalize();
  }

  explicit Rat(mpq_class value) : value_(std::move(value)) { value_.canonicalize(); }

  /// Accepts `-?[0-9]+(/[0-9]+)?`; the denominator must be nonzero.
  static Rat parse(std::string_view text) {
    auto digits = [](std::string_view s) {
      if (s.empty()) return false;
      for (char c : s)
        if (c < '0' || c > '9') return false;
      return true;
    };
    bool negative = !text.empty() && text.front() == '-';
    std::string_view body = negative ? text.substr(1) : text;
    auto slash = body.find('/');
    std::string_view num = body.substr(0, slash);
    std::string_view den = slash == std::string_view::npos ? std::string_view("1") : body.substr(slash + 1);
    if (!digits(num) || !digits(den))
      throw ParseError("invalid rational literal \"" + std::string(text) + "\"");
    mpz_class n(std::string(num), 10);
    mpz_class d(std::string(den), 10);
    if (d == 0) throw ParseError("zero denominator in rational literal \"" + std::string(text) + "\"");
    if (negative) n = -n;
    return Rat(mpq_class(n, d));
  }

  std::string to_string() const { return value_.get_str(); }
  double to_double() const { return value_.get_d(); }
  const mpq_class& value() const noexcept { return value_; }
  mpz_class numerator() const { return value_.get_num(); }
  mpz_class denominator() const { return value_.get_den(); }

  int sign() const { return sgn(value_); }
  bool is_zero() const { return sgn(value_) == 0; }

  Rat& operator+=(const Rat& o) { value_ += o.value_; return *this; }
  Rat& operator-=(const Rat& o) { value_ -= o.value_; return *this; }
  Rat& operator*=(const Rat& o) { value_ *= o.value_; return *this; }
  Rat& operator/=(const Rat& o) {
    if (o.is_zero()) throw InvalidArgument("division by zero");
    value_ /= o.value_;
    return *this;
  }

  friend Rat operator+(Rat a, const Rat& b) { return a += b; }
  friend Rat operator-(Rat a, const Rat& b) { return a -= b; }
  friend Rat operator*(Rat a, const Rat& b) { return a *= b; }
  friend Rat operator/(Rat a, const Rat& b) { return a /= b; }
  friend Rat operator-(Rat a) {
    a.value_ = -a.value_;
    return a;
  }

  friend bool operator==(const Rat& a, const Rat& b) { return cmp(a.value_, b.value_) == 0; }
  friend std::strong_ordering operator<=>(const Rat& a, const Rat& b) {
    int c = cmp(a.value_, b.value_);
    if (c < 0) return std::strong_ordering::less;
    if (c > 0) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  friend std::ostream& operator<<(std::ostream& os, const Rat& r) { return os << r.to_string(); }

 private:
  mpq_class value_{0};
};

inline Rat abs(const Rat& r) { return r.sign() < 0 ? -r : r; }

}  // namespace upsilon

template <>
struct std::hash<upsilon::Rat> {
  std::size_t operator()(const upsilon::Rat& r) const { return std::hash<std::string>{}(r.to_string()); }
};
