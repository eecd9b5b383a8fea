#include "kahlerlab/rational.hpp"

#include <algorithm>
#include <cctype>
#include <ostream>

namespace klab {

BigInt::BigInt(long long v) {
  negative_ = v < 0;
  unsigned long long m = negative_ ? -static_cast<unsigned long long>(v)
                                   : static_cast<unsigned long long>(v);
  while (m > 0) {
    limbs_.push_back(static_cast<uint32_t>(m % kBase));
    m /= kBase;
  }
}

BigInt::BigInt(const std::string& decimal) {
  size_t start = 0;
  if (start < decimal.size() && (decimal[start] == '+' || decimal[start] == '-')) {
    negative_ = decimal[start] == '-';
    ++start;
  }
  if (start == decimal.size())
    throw std::invalid_argument("BigInt: empty digit string");
  for (size_t i = start; i < decimal.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(decimal[i])))
      throw std::invalid_argument("BigInt: bad digit in '" + decimal + "'");
  // consume 9 decimal digits per limb, most significant first
  for (size_t i = decimal.size(); i > start;) {
    size_t lo = i >= start + 9 ? i - 9 : start;
    limbs_.push_back(static_cast<uint32_t>(std::stoul(decimal.substr(lo, i - lo))));
    i = lo;
  }
  trim();
}

void BigInt::trim() {
  while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
  if (limbs_.empty()) negative_ = false;
}

int BigInt::cmp_mag(const BigInt& a, const BigInt& b) {
  if (a.limbs_.size() != b.limbs_.size())
    return a.limbs_.size() < b.limbs_.size() ? -1 : 1;
  for (size_t i = a.limbs_.size(); i-- > 0;)
    if (a.limbs_[i] != b.limbs_[i]) return a.limbs_[i] < b.limbs_[i] ? -1 : 1;
  return 0;
}

BigInt BigInt::add_mag(const BigInt& a, const BigInt& b) {
  BigInt r;
  r.limbs_.resize(std::max(a.limbs_.size(), b.limbs_.size()) + 1, 0);
  uint64_t carry = 0;
  for (size_t i = 0; i < r.limbs_.size(); ++i) {
    uint64_t s = carry;
    if (i < a.limbs_.size()) s += a.limbs_[i];
    if (i < b.limbs_.size()) s += b.limbs_[i];
    r.limbs_[i] = static_cast<uint32_t>(s % kBase);
    carry = s / kBase;
  }
  r.trim();
  return r;
}

BigInt BigInt::sub_mag(const BigInt& a, const BigInt& b) {
  BigInt r;
  r.limbs_.resize(a.limbs_.size(), 0);
  int64_t borrow = 0;
  for (size_t i = 0; i < a.limbs_.size(); ++i) {
    int64_t s = static_cast<int64_t>(a.limbs_[i]) - borrow -
                (i < b.limbs_.size() ? b.limbs_[i] : 0);
    if (s < 0) {
      s += kBase;
      borrow = 1;
    } else {
      borrow = 0;
    }
    r.limbs_[i] = static_cast<uint32_t>(s);
  }
  r.trim();
  return r;
}

BigInt BigInt::operator-() const {
  BigInt r = *this;
  if (!r.limbs_.empty()) r.negative_ = !r.negative_;
  return r;
}

BigInt BigInt::operator+(const BigInt& o) const {
  if (negative_ == o.negative_) {
    BigInt r = add_mag(*this, o);
    r.negative_ = negative_ && !r.limbs_.empty();
    return r;
  }
  int c = cmp_mag(*this, o);
  if (c == 0) return BigInt(0);
  BigInt r = c > 0 ? sub_mag(*this, o) : sub_mag(o, *this);
  r.negative_ = (c > 0 ? negative_ : o.negative_) && !r.limbs_.empty();
  return r;
}

BigInt BigInt::operator-(const BigInt& o) const { return *this + (-o); }

BigInt BigInt::operator*(const BigInt& o) const {
  if (is_zero() || o.is_zero()) return BigInt(0);
  BigInt r;
  r.limbs_.assign(limbs_.size() + o.limbs_.size(), 0);
  for (size_t i = 0; i < limbs_.size(); ++i) {
    uint64_t carry = 0;
    for (size_t j = 0; j < o.limbs_.size() || carry; ++j) {
      uint64_t cur = r.limbs_[i + j] + carry;
      if (j < o.limbs_.size())
        cur += static_cast<uint64_t>(limbs_[i]) * o.limbs_[j];
      r.limbs_[i + j] = static_cast<uint32_t>(cur % kBase);
      carry = cur / kBase;
    }
  }
  r.negative_ = negative_ != o.negative_;
  r.trim();
  return r;
}

void BigInt::divmod(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r) {
  if (b.is_zero()) throw std::domain_error("BigInt: division by zero");
  q = BigInt(0);
  r = BigInt(0);
  q.limbs_.assign(a.limbs_.size(), 0);
  // schoolbook: scan magnitude digits of a from most significant
  for (size_t i = a.limbs_.size(); i-- > 0;) {
    // r = r * base + digit
    r.limbs_.insert(r.limbs_.begin(), a.limbs_[i]);
    r.trim();
    // binary search the quotient digit in [0, base)
    uint32_t lo = 0, hi = kBase - 1, d = 0;
    while (lo <= hi) {
      uint32_t mid = lo + (hi - lo) / 2;
      BigInt t = b.abs() * BigInt(static_cast<long long>(mid));
      if (cmp_mag(t, r) <= 0) {
        d = mid;
        lo = mid + 1;
      } else {
        if (mid == 0) break;
        hi = mid - 1;
      }
    }
    q.limbs_[i] = d;
    r = sub_mag(r, b.abs() * BigInt(static_cast<long long>(d)));
  }
  q.negative_ = (a.negative_ != b.negative_);
  q.trim();
  r.negative_ = a.negative_;  // remainder keeps dividend's sign (truncation)
  r.trim();
}

BigInt BigInt::operator/(const BigInt& o) const {
  BigInt q, r;
  divmod(*this, o, q, r);
  return q;
}

BigInt BigInt::operator%(const BigInt& o) const {
  BigInt q, r;
  divmod(*this, o, q, r);
  return r;
}

bool BigInt::operator==(const BigInt& o) const {
  return negative_ == o.negative_ && limbs_ == o.limbs_;
}

bool BigInt::operator<(const BigInt& o) const {
  if (negative_ != o.negative_) return negative_;
  int c = cmp_mag(*this, o);
  return negative_ ? c > 0 : c < 0;
}

BigInt BigInt::abs() const {
  BigInt r = *this;
  r.negative_ = false;
  return r;
}

BigInt BigInt::gcd(BigInt a, BigInt b) {
  a = a.abs();
  b = b.abs();
  while (!b.is_zero()) {
    BigInt t = a % b;
    a = b;
    b = t;
  }
  return a;
}

std::string BigInt::to_string() const {
  if (limbs_.empty()) return "0";
  std::string s = negative_ ? "-" : "";
  s += std::to_string(limbs_.back());
  char buf[16];
  for (size_t i = limbs_.size() - 1; i-- > 0;) {
    std::snprintf(buf, sizeof buf, "%09u", limbs_[i]);
    s += buf;
  }
  return s;
}

double BigInt::to_double() const {
  double v = 0;
  for (size_t i = limbs_.size(); i-- > 0;) v = v * kBase + limbs_[i];
  return negative_ ? -v : v;
}

long long BigInt::to_int64() const {
  constexpr long long kMax = 9223372036854775807LL;
  long long v = 0;
  for (size_t i = limbs_.size(); i-- > 0;) {
    if (v > (kMax - static_cast<long long>(limbs_[i])) / kBase)
      throw std::overflow_error("BigInt: does not fit in int64");
    v = v * kBase + limbs_[i];
  }
  return negative_ ? -v : v;
}

std::ostream& operator<<(std::ostream& os, const BigInt& v) {
  return os << v.to_string();
}

Rational::Rational(BigInt num, BigInt den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) throw std::domain_error("Rational: zero denominator");
  normalize();
}

void Rational::normalize() {
  if (den_.sign() < 0) {
    num_ = -num_;
    den_ = -den_;
  }
  if (num_.is_zero()) {
    den_ = BigInt(1);
    return;
  }
  BigInt g = BigInt::gcd(num_, den_);
  num_ = num_ / g;
  den_ = den_ / g;
}

Rational Rational::parse(const std::string& text) {
  auto slash = text.find('/');
  if (slash == std::string::npos) return Rational(BigInt(text), BigInt(1));
  return Rational(BigInt(text.substr(0, slash)), BigInt(text.substr(slash + 1)));
}

Rational Rational::operator-() const { return Rational(-num_, den_); }

Rational Rational::operator+(const Rational& o) const {
  return Rational(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}

Rational Rational::operator-(const Rational& o) const { return *this + (-o); }

Rational Rational::operator*(const Rational& o) const {
  return Rational(num_ * o.num_, den_ * o.den_);
}

Rational Rational::operator/(const Rational& o) const {
  if (o.is_zero()) throw std::domain_error("Rational: division by zero");
  return Rational(num_ * o.den_, den_ * o.num_);
}

bool Rational::operator==(const Rational& o) const {
  return num_ == o.num_ && den_ == o.den_;
}

bool Rational::operator<(const Rational& o) const {
  return num_ * o.den_ < o.num_ * den_;
}

std::string Rational::to_string() const {
  if (den_ == BigInt(1)) return num_.to_string();
  return num_.to_string() + "/" + den_.to_string();
}

double Rational::to_double() const { return num_.to_double() / den_.to_double(); }

std::ostream& operator<<(std::ostream& os, const Rational& v) {
  return os << v.to_string();
}

}  // namespace klab
