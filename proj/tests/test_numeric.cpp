#include <doctest.h>

#include "gclaim/numeric.hpp"

using namespace gclaim;

TEST_CASE("rational parsing covers integers, decimals and fractions") {
    CHECK(parse_rational("3") == Rational(3));
    CHECK(parse_rational("-1.25") == Rational(-5) / 4);
    CHECK(parse_rational("7/3") == Rational(7) / 3);
    CHECK(parse_rational(" -7/3 ") == Rational(-7) / 3);
    CHECK(parse_rational("0.5") == Rational(1) / 2);
    CHECK(parse_rational("+2.") == Rational(2));
    CHECK_THROWS_AS(parse_rational(""), ParseError);
    CHECK_THROWS_AS(parse_rational("1/0"), ParseError);
    CHECK_THROWS_AS(parse_rational("x"), ParseError);
    CHECK_THROWS_AS(parse_rational("1.2.3"), ParseError);
}

TEST_CASE("mode conversions and printing") {
    CHECK(num_from_string<double>("1/4") == doctest::Approx(0.25));
    CHECK(num_from_string<Rational>("0.1") == Rational(1) / 10);
    CHECK(num_to_string(Rational(-7) / 3) == "-7/3");
    CHECK(num_to_string(0.25) == "0.2500000000");
    CHECK(num_to_double(Rational(1) / 2) == doctest::Approx(0.5));
}

TEST_CASE("comparison policies") {
    CHECK(num_eq(1.0, 1.0 + 5e-10));
    CHECK_FALSE(num_eq(1.0, 1.0 + 5e-8));
    CHECK(num_le(1.0 + 5e-10, 1.0));
    CHECK(num_eq(Rational(1) / 3, Rational(2) / 6));
    CHECK_FALSE(num_eq(Rational(1) / 3, Rational(1) / 3 + Rational(1, 1000000000000)));
    CHECK(num_pow(Rational(2), 3) == Rational(8));
    CHECK(num_pow(Rational(2), -2) == Rational(1) / 4);
}
