#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "conj1d/expr.hpp"
#include "conj1d/kernels.hpp"

using namespace conj1d;

namespace {

std::vector<double> random_grid(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-2.5, 2.5);
    std::vector<double> xs(n);
    for (auto& x : xs) x = u(rng);
    return xs;
}

ExprPtr random_tree(std::mt19937_64& rng, int depth) {
    auto node = std::make_shared<ExprNode>();
    std::uniform_int_distribution<int> leaf(0, 2);
    std::uniform_int_distribution<int> kind(0, 5);
    std::uniform_real_distribution<double> val(0.0, 3.0);
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
        case 4:
            node->kind = ExprNode::Kind::Pow;
            node->exponent = std::uniform_int_distribution<int>(-4, 6)(rng);
            node->lhs = random_tree(rng, depth - 1);
            break;
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

TEST_CASE("scalar kernel agrees with the tree evaluator") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        MapExpr e(random_tree(rng, 4));
        std::vector<double> xs = random_grid(rng, 37);
        std::vector<double> out(xs.size());
        double mu = 0.125;
        kernels::eval_batch_scalar(e.program(), mu, xs, out);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double want = 0.0;
            bool threw = false;
            try {
                want = e.eval(xs[i], mu);
            } catch (...) {
                threw = true;  // division by zero: the kernel yields inf/nan instead
            }
            if (!threw && std::isfinite(want)) {
                CAPTURE(e.str());
                CHECK(out[i] == want);
            }
        }
    }
}

#if defined(__x86_64__) || defined(_M_X64)
TEST_CASE("avx2 kernel is bit-equal to the scalar reference") {
    if (std::string(kernels::active_kernel()) != "avx2") {
        MESSAGE("avx2 not available on this host; dispatch stays scalar");
        return;
    }
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        MapExpr e(random_tree(rng, 5));
        // deliberately awkward lengths to cover the lane tail
        int n = std::uniform_int_distribution<int>(1, 67)(rng);
        std::vector<double> xs = random_grid(rng, n);
        std::vector<double> ref(xs.size()), simd(xs.size());
        double mu = -0.375;
        kernels::eval_batch_scalar(e.program(), mu, xs, ref);
        kernels::eval_batch_avx2(e.program(), mu, xs, simd);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            CAPTURE(e.str());
            CAPTURE(xs[i]);
            if (std::isnan(ref[i])) {
                CHECK(std::isnan(simd[i]));
            } else {
                CHECK(simd[i] == ref[i]);
            }
        }
    }
}
#endif

TEST_CASE("dispatch produces the scalar answer") {
    MapExpr e = MapExpr::parse("x + mu*x - x^3");
    std::vector<double> xs(1001);
    for (int i = 0; i <= 1000; ++i) xs[static_cast<std::size_t>(i)] = -1.0 + 0.002 * i;
    std::vector<double> a(xs.size()), b(xs.size());
    kernels::eval_batch_scalar(e.program(), 0.25, xs, a);
    kernels::eval_batch(e.program(), 0.25, xs, b);
    CHECK(a == b);
}
