#include "oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace hk;
using hk::test::q;

TEST_CASE("parse_rational reads fractions, integers and decimals exactly") {
  CHECK(q("1/3") == Rational(1, 3));
  CHECK(q("6/8") == Rational(3, 4));
  CHECK(q("-2/4") == Rational(-1, 2));
  CHECK(q("7") == Rational(7));
  CHECK(q("0.1") == Rational(1, 10));
  CHECK(q(".5") == Rational(1, 2));
  CHECK(q("1e-3") == Rational(1, 1000));
  CHECK(q("2.5E2") == Rational(250));
  CHECK(q("+0.125") == Rational(1, 8));
}

TEST_CASE("parse_rational rejects malformed text") {
  for (const char* bad : {"", "abc", "1/0", "1/", "/2", "0.1.2", "1e", "--1", "0x10"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_rational(bad), UsageError);
  }
}

TEST_CASE("to_double rounds to nearest with ties to even") {
  CHECK(to_double(Rational(1, 10)) == 0.1);
  CHECK(to_double(Rational(1, 3)) == 1.0 / 3.0);
  CHECK(to_double(Rational(2, 3)) == 2.0 / 3.0);
  CHECK(to_double(q("0.45")) == 0.45);
  // 1 + 2^-53 lies halfway between 1 and the next double; ties go to the even neighbor 1.
  const Rational half_ulp = Rational(1) + to_rational(std::ldexp(1.0, -53));
  CHECK(to_double(half_ulp) == 1.0);
  const Rational three_half_ulp = Rational(1) + to_rational(3 * std::ldexp(1.0, -53));
  CHECK(to_double(three_half_ulp) == 1.0 + std::ldexp(1.0, -51));
}

TEST_CASE("to_rational is exact and round-trips through to_double") {
  for (double v : {0.1, 0.45, 1.0 / 3.0, 1e-300, 0.0, 1.0, 0.999999999}) {
    CAPTURE(v);
    CHECK(to_double(to_rational(v)) == v);
  }
  CHECK(to_rational(0.5) == Rational(1, 2));
  CHECK(to_rational(0.1) != Rational(1, 10));
}

TEST_CASE("format_decimal") {
  CHECK(format_decimal(Rational(1, 10)) == "0.1");
  CHECK(format_decimal(Rational(13, 30)) == "0.43333333333333333");
  CHECK(format_decimal(Rational(2, 3), 5) == "0.66667");
  CHECK(format_decimal(Rational(0)) == "0");
  CHECK(format_decimal(Rational(4, 5)) == "0.8");
  CHECK(format_decimal(Rational(1)) == "1");
  CHECK(format_decimal(0.1) == "0.10000000000000001");
  // 17 significant digits always round-trip a double.
  for (double v : {0.1, 1.0 / 3.0, 0.45000000000000001, 0.123456789012345678}) {
    CHECK(std::stod(format_decimal(v)) == v);
  }
}

TEST_CASE("format_exact and format_readable") {
  CHECK(format_exact(Rational(13, 30)) == "13/30");
  CHECK(format_exact(Rational(3)) == "3");
  CHECK(parse_rational(format_exact(0.1)) == to_rational(0.1));
  CHECK(format_readable(Rational(9, 20)) == "0.45");
  CHECK(format_readable(Rational(1, 3)) == "1/3");
  CHECK(format_readable(Rational(1)) == "1");
}

TEST_CASE("denominator_bits") {
  CHECK(denominator_bits(Rational(1)) == 1);
  CHECK(denominator_bits(Rational(1, 1024)) == 11);
  CHECK(denominator_bits(Rational(5, 3)) == 2);
}

TEST_CASE("engine names") {
  CHECK(parse_engine("exact") == Engine::exact);
  CHECK(parse_engine("float") == Engine::floating);
  CHECK(to_string(Engine::floating) == "float");
  CHECK_THROWS_AS(parse_engine("double"), UsageError);
}
