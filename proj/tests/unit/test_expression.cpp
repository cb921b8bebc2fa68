#include <doctest.h>

#include <cmath>
#include <random>

#include "garsamp/expression.hpp"

using namespace garsamp;

TEST_CASE("exp(-x) at 0") {
    Jet j = parse_expression("exp(-x)").jet(0.0);
    CHECK(j.value == doctest::Approx(1.0));
    CHECK(j.d1 == doctest::Approx(-1.0));
    CHECK(j.d2 == doctest::Approx(1.0));
}

TEST_CASE("cosh(5 - x^2) at 0") {
    CHECK(parse_expression("cosh(5 - x^2)")(0.0) == doctest::Approx(std::cosh(5.0)));
}

TEST_CASE("unbalanced parenthesis") {
    try {
        parse_expression("(x");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset == 2);
    }
}

TEST_CASE("syntax errors") {
    CHECK_THROWS_AS(parse_expression(""), ParseError);
    CHECK_THROWS_AS(parse_expression("x +"), ParseError);
    CHECK_THROWS_AS(parse_expression("foo(x)"), ParseError);
    CHECK_THROWS_AS(parse_expression("x ^ x"), ParseError);
    CHECK_THROWS_AS(parse_expression("2 x"), ParseError);
}

TEST_CASE("precedence and associativity") {
    CHECK(parse_expression("1 + 2 * 3")(0) == doctest::Approx(7));
    CHECK(parse_expression("2 ^ 3 ^ 2")(0) == doctest::Approx(512));
    CHECK(parse_expression("-x^2")(3) == doctest::Approx(-9));
    CHECK(parse_expression("8 / 4 / 2")(0) == doctest::Approx(1));
    CHECK(parse_expression("x - 1 - 1")(5) == doctest::Approx(3));
    CHECK(parse_expression("2.5e1")(0) == doctest::Approx(25));
}

TEST_CASE("domain errors surface at evaluation") {
    Expression e = parse_expression("log(x)");
    CHECK_THROWS_AS(e(0.0), DomainError);
    CHECK_THROWS_AS(e(-1.0), DomainError);
    CHECK_THROWS_AS(parse_expression("sqrt(x)")(-1.0), DomainError);
    CHECK_THROWS_AS(parse_expression("1 / x")(0.0), DomainError);
}

TEST_CASE("abs derivative at zero is zero") {
    Jet j = parse_expression("abs(x)").jet(0.0);
    CHECK(j.value == 0.0);
    CHECK(j.d1 == 0.0);
    Jet k = parse_expression("exp(abs(x))").jet(0.0);
    CHECK(k.d1 == 0.0);
}

TEST_CASE("derivatives agree with central differences") {
    const char* texts[] = {"exp(-x)", "cosh(5 - x^2)", "exp(abs(x))", "x^3 - 2*x + 1",
                           "log(x^2 + 1)", "sqrt(x^2 + 2)", "-log(sqrt(x^2) + 1) + sqrt(x^2) + 1",
                           "sinh(x / 3) * x", "(x - 2)^2 / (1 + x^2)"};
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const double h = 1e-5;
    for (const char* t : texts) {
        Expression e = parse_expression(t);
        for (int k = 0; k < 100; ++k) {
            double x = u(rng);
            if (std::abs(x) < 1e-3) continue;
            Jet j = e.jet(x);
            double d1 = (e(x + h) - e(x - h)) / (2 * h);
            double d2 = (e(x + h) - 2 * e(x) + e(x - h)) / (h * h);
            INFO(t, " at ", x);
            CHECK(j.value == doctest::Approx(e(x)));
            CHECK(std::abs(j.d1 - d1) <= 1e-4 * std::max(1.0, std::abs(d1)));
            CHECK(std::abs(j.d2 - d2) <= 1e-2 * std::max(1.0, std::abs(d2)));
        }
    }
}
