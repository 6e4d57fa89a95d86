#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "conj1d/error.hpp"
#include "conj1d/expr.hpp"

using namespace conj1d;

TEST_CASE("arithmetic semantics") {
    MapExpr e = MapExpr::parse("x + mu - x^2");
    CHECK(e.eval(0.5, 0.25) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(e.uses_mu());

    CHECK(MapExpr::parse("x/2").eval(1.0) == 0.5);
    CHECK(MapExpr::parse("2*x + 1").eval(3.0) == 7.0);
    CHECK(MapExpr::parse("(x+1)*(x-1)").eval(2.0) == 3.0);
    CHECK(MapExpr::parse("1.5e-1 * x").eval(2.0) == doctest::Approx(0.3));
    CHECK_FALSE(MapExpr::parse("x + x^3").uses_mu());
}

TEST_CASE("unary minus binds looser than the exponent") {
    CHECK(MapExpr::parse("-x^2").eval(3.0) == -9.0);
    CHECK(MapExpr::parse("(-x)^2").eval(3.0) == 9.0);
    CHECK(MapExpr::parse("-x^3").eval(2.0) == -8.0);
    CHECK(MapExpr::parse("2 - x^2").eval(3.0) == -7.0);
}

TEST_CASE("integer exponents, including negative") {
    CHECK(MapExpr::parse("x^0").eval(5.0) == 1.0);
    CHECK(MapExpr::parse("x^5").eval(2.0) == 32.0);
    CHECK(MapExpr::parse("x^-1").eval(4.0) == 0.25);
    CHECK_THROWS_AS(MapExpr::parse("x^2.5"), parse_error);
    CHECK_THROWS_AS(MapExpr::parse("x^x"), parse_error);
    CHECK_THROWS_AS(MapExpr::parse("x^mu"), parse_error);
}

TEST_CASE("syntax errors carry the offending offset") {
    try {
        MapExpr::parse("x*(1");
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.offset() == 4);
    }

    CHECK_THROWS_AS(MapExpr::parse("x +"), parse_error);
    CHECK_THROWS_AS(MapExpr::parse(""), parse_error);
    CHECK_THROWS_AS(MapExpr::parse("x y"), parse_error);
    CHECK_THROWS_AS(MapExpr::parse("foo + 1"), parse_error);
    CHECK_THROWS_AS(MapExpr::parse("1..2"), parse_error);
}

TEST_CASE("division by zero is an evaluation error") {
    MapExpr e = MapExpr::parse("1/x");
    CHECK(e.eval(2.0) == 0.5);
    CHECK_THROWS_AS(e.eval(0.0), error);
}

namespace {

// random expression trees over the full grammar, for the round-trip property
ExprPtr random_tree(std::mt19937_64& rng, int depth) {
    auto node = std::make_shared<ExprNode>();
    std::uniform_int_distribution<int> leaf(0, 2);
    std::uniform_int_distribution<int> kind(0, 5);
    std::uniform_real_distribution<double> val(0.0, 4.0);
    int k = depth <= 0 ? leaf(rng) : kind(rng);
    switch (k) {
        case 0:
            node->kind = ExprNode::Kind::Number;
            node->number = val(rng);
            break;
        case 1: node->kind = ExprNode::Kind::VarX; break;
        case 2: node->kind = ExprNode::Kind::VarMu; break;
        case 3:
            node->kind = ExprNode::Kind::Neg;
            node->lhs = random_tree(rng, depth - 1);
            break;
        case 4: {
            node->kind = ExprNode::Kind::Pow;
            node->exponent = std::uniform_int_distribution<int>(-3, 5)(rng);
            node->lhs = random_tree(rng, depth - 1);
            break;
        }
        default:
            node->kind = ExprNode::Kind::Binary;
            node->bop = static_cast<BinaryOp>(std::uniform_int_distribution<int>(0, 3)(rng));
            node->lhs = random_tree(rng, depth - 1);
            node->rhs = random_tree(rng, depth - 1);
            break;
    }
    return node;
}

}  // namespace

TEST_CASE("parse(print(tree)) is the identity on trees") {
    std::mt19937_64 rng(20240817);
    for (int trial = 0; trial < 300; ++trial) {
        MapExpr e(random_tree(rng, 5));
        std::string text = e.str();
        CAPTURE(text);
        MapExpr back = MapExpr::parse(text);
        CHECK(expr_equal(e.root(), back.root()));
        CHECK(back.str() == text);
    }
}

TEST_CASE("reflected expression evaluates c - f(c - x)") {
    MapExpr f = MapExpr::parse("x + 0.25*x*(1-x)");
    MapExpr r = reflect_expr(f, 1.0);
    for (double x : {0.0, 0.25, 0.5, 0.9}) {
        CHECK(r.eval(x) == doctest::Approx(1.0 - f.eval(1.0 - x)).epsilon(1e-15));
    }
}
