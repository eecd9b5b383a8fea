#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace klab {

/// Arbitrary-precision signed integer, sign + base-1e9 magnitude.
/// Sized for exact polytope combinatorics (interpolation determinants,
/// lattice sums at desk scale), not for cryptographic workloads.
class BigInt {
 public:
  BigInt() = default;
  BigInt(long long v);  // NOLINT: implicit by design, mirrors int literals
  explicit BigInt(const std::string& decimal);

  static BigInt zero() { return BigInt(0); }
  static BigInt one() { return BigInt(1); }

  bool is_zero() const { return limbs_.empty(); }
  int sign() const { return limbs_.empty() ? 0 : (negative_ ? -1 : 1); }

  BigInt operator-() const;
  BigInt operator+(const BigInt& o) const;
  BigInt operator-(const BigInt& o) const;
  BigInt operator*(const BigInt& o) const;
  /// Truncated quotient (rounds toward zero), matching C++ integer division.
  BigInt operator/(const BigInt& o) const;
  BigInt operator%(const BigInt& o) const;

  BigInt& operator+=(const BigInt& o) { return *this = *this + o; }
  BigInt& operator-=(const BigInt& o) { return *this = *this - o; }
  BigInt& operator*=(const BigInt& o) { return *this = *this * o; }

  bool operator==(const BigInt& o) const;
  bool operator!=(const BigInt& o) const { return !(*this == o); }
  bool operator<(const BigInt& o) const;
  bool operator<=(const BigInt& o) const { return *this < o || *this == o; }
  bool operator>(const BigInt& o) const { return o < *this; }
  bool operator>=(const BigInt& o) const { return o <= *this; }

  BigInt abs() const;
  static BigInt gcd(BigInt a, BigInt b);

  std::string to_string() const;
  double to_double() const;
  /// Throws if the value does not fit in int64.
  long long to_int64() const;

 private:
  static constexpr uint32_t kBase = 1000000000u;
  bool negative_ = false;
  std::vector<uint32_t> limbs_;  // little-endian, no leading zeros

  void trim();
  static int cmp_mag(const BigInt& a, const BigInt& b);
  static BigInt add_mag(const BigInt& a, const BigInt& b);
  static BigInt sub_mag(const BigInt& a, const BigInt& b);  // |a| >= |b|
  static void divmod(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r);
};

std::ostream& operator<<(std::ostream& os, const BigInt& v);

/// Exact rational with reduced form and positive denominator.
class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(long long v) : num_(v), den_(1) {}  // NOLINT
  Rational(BigInt num, BigInt den);
  /// Parses "p/q" or "p".
  static Rational parse(const std::string& text);

  const BigInt& num() const { return num_; }
  const BigInt& den() const { return den_; }

  bool is_zero() const { return num_.is_zero(); }
  int sign() const { return num_.sign(); }

  Rational operator-() const;
  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  Rational operator/(const Rational& o) const;

  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  bool operator==(const Rational& o) const;
  bool operator!=(const Rational& o) const { return !(*this == o); }
  bool operator<(const Rational& o) const;
  bool operator<=(const Rational& o) const { return *this < o || *this == o; }
  bool operator>(const Rational& o) const { return o < *this; }
  bool operator>=(const Rational& o) const { return o <= *this; }

  /// "p/q", or "p" when the denominator is 1.
  std::string to_string() const;
  double to_double() const;

 private:
  BigInt num_;
  BigInt den_;  // > 0
  void normalize();
};

std::ostream& operator<<(std::ostream& os, const Rational& v);

}  // namespace klab
