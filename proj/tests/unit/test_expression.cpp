#include "stokolmo/expression.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

using namespace stokolmo;

namespace {

double eval(const std::string& s, std::vector<double> x = {}) { return Expression::parse(s).evaluate(x); }

// random well-formed expression text over x1..x3
std::string random_expr(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth > 0 ? 9 : 1);
    switch (pick(rng)) {
        case 0: return std::to_string(std::uniform_int_distribution<int>(0, 9)(rng)) + ".25";
        case 1: return "x" + std::to_string(std::uniform_int_distribution<int>(1, 3)(rng));
        case 2: return "(" + random_expr(rng, depth - 1) + " + " + random_expr(rng, depth - 1) + ")";
        case 3: return "(" + random_expr(rng, depth - 1) + " - " + random_expr(rng, depth - 1) + ")";
        case 4: return random_expr(rng, depth - 1) + " * " + random_expr(rng, depth - 1);
        case 5: return random_expr(rng, depth - 1) + " / (1 + x1*x1)";
        case 6: return "-" + random_expr(rng, depth - 1);
        case 7: return "exp(-" + random_expr(rng, depth - 1) + "^2)";
        case 8: return "sqrt(1 + x2^2)";
        default: return "ln(2 + x3^2)";
    }
}

}  // namespace

TEST_CASE("arithmetic and precedence") {
    CHECK(eval("1 + 2 * 3") == 7);
    CHECK(eval("(1 + 2) * 3") == 9);
    CHECK(eval("2 ^ 3 ^ 2") == 512);
    CHECK(eval("-2 ^ 2") == -4);
    CHECK(eval("8 / 4 / 2") == 1);
    CHECK(eval("1 - 2 - 3") == -4);
    CHECK(eval("x1 * x2 - x3", {2, 3, 4}) == 2);
    CHECK(eval("exp(0) + ln(1) + sqrt(16)") == 5);
    CHECK(eval("2.5e-1 * 4") == doctest::Approx(1.0));
    CHECK(eval("x2 / (1 + x1)", {1, 4}) == 2);
}

TEST_CASE("arity counts the highest variable") {
    CHECK(Expression::parse("3").arity() == 0);
    CHECK(Expression::parse("x1 + x4").arity() == 4);
}

TEST_CASE("syntax errors carry the offset") {
    auto offset_of = [](const std::string& s) {
        try {
            Expression::parse(s);
        } catch (const ExpressionSyntaxError& e) {
            return static_cast<long>(e.offset());
        }
        return -1L;
    };
    CHECK(offset_of("1 + ") == 4);
    CHECK(offset_of("(1 + 2") == 6);
    CHECK(offset_of("1 $ 2") == 2);
    CHECK(offset_of("x0") == 0);
    CHECK(offset_of("foo(1)") == 0);
    CHECK(offset_of("") == 0);
}

TEST_CASE("domain errors name the subexpression") {
    CHECK_THROWS_AS(eval("1 / (x1 - 1)", {1}), DomainError);
    CHECK_THROWS_AS(eval("ln(x1)", {0}), DomainError);
    CHECK_THROWS_AS(eval("sqrt(-1)"), DomainError);
    CHECK_THROWS_AS(eval("exp(1000)"), DomainError);
    try {
        eval("2 + ln(x1 - 3)", {1});
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        CHECK(e.subexpression().find("ln") != std::string::npos);
    }
}

TEST_CASE("print-parse round trip evaluates identically") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int k = 0; k < 300; ++k) {
        const std::string text = random_expr(rng, 4);
        const Expression e = Expression::parse(text);
        const Expression back = Expression::parse(e.to_string());
        CHECK(back.to_string() == e.to_string());
        for (int s = 0; s < 5; ++s) {
            const std::vector<double> x{u(rng), u(rng), u(rng)};
            double a = 0, b = 0;
            bool fa = false, fb = false;
            try { a = e.evaluate(x); } catch (const DomainError&) { fa = true; }
            try { b = back.evaluate(x); } catch (const DomainError&) { fb = true; }
            REQUIRE(fa == fb);
            if (!fa) CHECK(a == b);
        }
    }
}

TEST_CASE("negative literals survive printing") {
    const Expression e = Expression::constant(-1.5);
    CHECK(Expression::parse(e.to_string()).evaluate({}) == -1.5);
    const Expression p = Expression::parse("x1 ^ (-2)");
    CHECK(Expression::parse(p.to_string()).evaluate(std::vector<double>{2}) == 0.25);
}

TEST_CASE("variable remapping") {
    const Expression e = Expression::parse("x1 + 10*x2 + 100*x3");
    const std::vector<int> remap{0, -1, 1};  // x2 pinned to 0, x3 becomes x2
    const Expression r = e.remap_variables(remap);
    CHECK(r.arity() == 2);
    CHECK(r.evaluate(std::vector<double>{1, 2}) == 201);
}
