#include <doctest.h>

#include "kahlerlab/rational.hpp"

using klab::BigInt;
using klab::Rational;

TEST_CASE("bigint arithmetic round trips through strings") {
  BigInt a("123456789012345678901234567890");
  BigInt b("-987654321098765432109876543210");
  CHECK(a.to_string() == "123456789012345678901234567890");
  CHECK((a + b).to_string() == "-864197532086419753208641975320");
  CHECK((a * BigInt(0)).to_string() == "0");
  CHECK((b * b).sign() == 1);
  CHECK((a - a).is_zero());
}

TEST_CASE("bigint division truncates toward zero") {
  CHECK((BigInt(7) / BigInt(2)).to_string() == "3");
  CHECK((BigInt(-7) / BigInt(2)).to_string() == "-3");
  CHECK((BigInt(7) % BigInt(2)).to_string() == "1");
  CHECK((BigInt(-7) % BigInt(2)).to_string() == "-1");
  BigInt big("1000000000000000000000000");
  CHECK((big / BigInt("1000000000000")).to_string() == "1000000000000");
  CHECK((big % BigInt("999999999989")).to_string() ==
        ((big - (big / BigInt("999999999989")) * BigInt("999999999989"))).to_string());
}

TEST_CASE("bigint gcd") {
  CHECK(BigInt::gcd(BigInt(12), BigInt(-18)).to_string() == "6");
  CHECK(BigInt::gcd(BigInt(0), BigInt(5)).to_string() == "5");
}

TEST_CASE("rational normalization keeps reduced form, positive denominator") {
  Rational r(BigInt(6), BigInt(-8));
  CHECK(r.to_string() == "-3/4");
  CHECK(r.den().sign() == 1);
  CHECK(Rational(BigInt(0), BigInt(-5)).to_string() == "0");
  CHECK(Rational::parse("10/4").to_string() == "5/2");
  CHECK(Rational::parse("-7").to_string() == "-7");
}

TEST_CASE("rational field operations") {
  Rational a = Rational::parse("1/3");
  Rational b = Rational::parse("1/6");
  CHECK((a + b).to_string() == "1/2");
  CHECK((a - b).to_string() == "1/6");
  CHECK((a * b).to_string() == "1/18");
  CHECK((a / b).to_string() == "2");
  CHECK(a > b);
  CHECK(Rational(2) == Rational::parse("4/2"));
  CHECK_THROWS(a / Rational(0));
}

TEST_CASE("rational to_double") {
  CHECK(Rational::parse("1/2").to_double() == doctest::Approx(0.5));
  CHECK(Rational::parse("-22/7").to_double() == doctest::Approx(-3.142857142857));
}

TEST_CASE("bigint property: division identities over generated values") {
  unsigned long long state = 1234567ull;
  auto next = [&]() {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    return static_cast<long long>(state >> 33) - (1ll << 30);
  };
  for (int i = 0; i < 200; ++i) {
    BigInt a = BigInt(next()) * BigInt(next()) * BigInt(next());
    BigInt b = BigInt(next());
    if (b.is_zero()) continue;
    BigInt q = a / b, r = a % b;
    CHECK(q * b + r == a);
    CHECK(r.abs() < b.abs());
    CHECK((a * b) / b == a);
    BigInt g = BigInt::gcd(a, b);
    if (!a.is_zero()) {
      CHECK((a % g).is_zero());
      CHECK((b % g).is_zero());
    }
  }
}
