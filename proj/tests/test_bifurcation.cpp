#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>

#include "conj1d/bifurcation.hpp"
#include "conj1d/error.hpp"
#include "conj1d/verify.hpp"

using namespace conj1d;

namespace {

Family fam_of(const std::string& expr, Interval xw, Interval mw) {
    return Family{MapExpr::parse(expr), xw, mw};
}

Family canonical(BifurcationType t) {
    switch (t) {
        case BifurcationType::Fold:
            return fam_of("x + mu - x^2", Interval(-0.45, 0.45), Interval(-0.05, 0.05));
        case BifurcationType::Transcritical:
            return fam_of("x + mu*x - x^2", Interval(-0.45, 0.45), Interval(-0.05, 0.05));
        case BifurcationType::Pitchfork:
            return fam_of("x + mu*x - x^3", Interval(-0.5, 0.5), Interval(-0.05, 0.05));
        default:
            return fam_of("-x - mu*x + x^3", Interval(-0.5, 0.5), Interval(-0.05, 0.05));
    }
}

Family negated_mu(BifurcationType t) {
    switch (t) {
        case BifurcationType::Fold:
            return fam_of("x - mu - x^2", Interval(-0.45, 0.45), Interval(-0.05, 0.05));
        case BifurcationType::Transcritical:
            return fam_of("x - mu*x - x^2", Interval(-0.45, 0.45), Interval(-0.05, 0.05));
        case BifurcationType::Pitchfork:
            return fam_of("x - mu*x - x^3", Interval(-0.5, 0.5), Interval(-0.05, 0.05));
        default:
            return fam_of("-x + mu*x + x^3", Interval(-0.5, 0.5), Interval(-0.05, 0.05));
    }
}

}  // namespace

TEST_CASE("the four canonical families classify with sigma = +1") {
    for (BifurcationType t : {BifurcationType::Fold, BifurcationType::Transcritical,
                              BifurcationType::Pitchfork, BifurcationType::Flip}) {
        CAPTURE(to_string(t));
        BifurcationReport rep = classify_family(canonical(t));
        CHECK(rep.type == t);
        CHECK(rep.sigma == +1);
        CHECK(rep.mu_samples == 9);
    }
}

TEST_CASE("sign robustness: replacing mu by -mu negates sigma") {
    for (BifurcationType t : {BifurcationType::Fold, BifurcationType::Transcritical,
                              BifurcationType::Pitchfork, BifurcationType::Flip}) {
        CAPTURE(to_string(t));
        BifurcationReport rep = classify_family(negated_mu(t));
        CHECK(rep.type == t);
        CHECK(rep.sigma == -1);
    }
}

TEST_CASE("perturbation robustness: + eps*x^4 keeps the class") {
    struct Case {
        const char* base;
        BifurcationType want;
    };
    const Case cases[] = {
        {"x + mu - x^2", BifurcationType::Fold},
        {"x + mu*x - x^2", BifurcationType::Transcritical},
        {"x + mu*x - x^3", BifurcationType::Pitchfork},
        {"-x - mu*x + x^3", BifurcationType::Flip},
    };
    for (const auto& c : cases) {
        for (double eps : {-0.1, 0.05, 0.1}) {
            std::string expr = std::string(c.base) + (eps < 0 ? " - " : " + ") +
                               std::to_string(std::abs(eps)) + "*x^4";
            CAPTURE(expr);
            Family fam = fam_of(expr, Interval(-0.5, 0.5), Interval(-0.05, 0.05));
            BifurcationReport rep = classify_family(fam);
            CHECK(rep.type == c.want);
        }
    }
}

TEST_CASE("generalized even/odd leading terms classify like their order-2/3 kin") {
    Family quartic = fam_of("x + mu - x^4", Interval(-0.5, 0.5), Interval(-0.05, 0.05));
    CHECK(classify_family(quartic).type == BifurcationType::Fold);

    Family quintic = fam_of("x + mu*x - x^5", Interval(-0.5, 0.5), Interval(-0.05, 0.05));
    CHECK(classify_family(quintic).type == BifurcationType::Pitchfork);
}

TEST_CASE("an unrecognizable family reports the observed pattern") {
    // two tangential points on both sides of mu = 0: none of the four shapes
    Family weird = fam_of("x + x^2*(x^2 - 0.04)", Interval(-0.4, 0.4), Interval(-0.05, 0.05));
    BifurcationReport rep = classify_family(weird);
    CHECK(rep.type == BifurcationType::Unclassified);
    CHECK(!rep.detail.empty());
    nlohmann::json j = to_json(rep);
    CHECK(j["type"] == "unclassified");
    CHECK(j.contains("observed"));
}

TEST_CASE("classify input validation") {
    Family fam = canonical(BifurcationType::Fold);
    CHECK_THROWS_AS(classify_family(fam, 4), error);  // even
    CHECK_THROWS_AS(classify_family(fam, 1), error);  // too few
    Family off = fam_of("x + mu - x^2", Interval(-0.45, 0.45), Interval(0.01, 0.05));
    CHECK_THROWS_AS(classify_family(off), error);  // 0 not inside the mu window
}

TEST_CASE("normal_form reproduces the expected expressions") {
    CHECK(normal_form(BifurcationType::Fold, +1, -1).expr.str() == "x+mu-x^2");
    CHECK(normal_form(BifurcationType::Flip, -1, +1).expr.str() == "-x-mu*x+x^3");
    CHECK(normal_form(BifurcationType::Pitchfork, +1, -1).expr.str() == "x+mu*x-x^3");
    CHECK(normal_form(BifurcationType::Transcritical, -1, +1).expr.str() == "x-mu*x+x^2");
    Family nf = normal_form(BifurcationType::Fold, +1, -1);
    CHECK(nf.x_window.lo == -0.75);
    CHECK(nf.mu_window.hi == 0.1);
}

TEST_CASE("fold fiber conjugates to the truncated normal form") {
    Family fam = fam_of("x + mu - x^2 + 0.1*x^3", Interval(-0.45, 0.45), Interval(-0.05, 0.05));
    BifurcationReport rep = classify_family(fam);
    REQUIRE(rep.type == BifurcationType::Fold);
    CHECK(rep.sigma == +1);

    ConjugacyMap c = conjugate_to_normal_form(fam, 0.04, rep);
    ResidualReport res = residual_report(c, 2000, 1e-4);
    CHECK(res.sup_residual <= 1e-8);
}

TEST_CASE("the normal form conjugates to itself at float level") {
    Family fam = normal_form(BifurcationType::Fold, +1, -1);
    BifurcationReport rep = classify_family(fam);
    REQUIRE(rep.type == BifurcationType::Fold);
    ConjugacyMap c = conjugate_to_normal_form(fam, 0.04, rep);
    ResidualReport res = residual_report(c, 1000, 1e-4);
    CHECK(res.sup_residual <= 1e-10);
}

TEST_CASE("flip fiber conjugacy pins the orbit") {
    Family fam = fam_of("-(1+mu)*x + x^3", Interval(-0.5, 0.5), Interval(-0.05, 0.05));
    BifurcationReport rep = classify_family(fam);
    REQUIRE(rep.type == BifurcationType::Flip);
    CHECK(rep.sigma == +1);

    ConjugacyMap c = conjugate_to_normal_form(fam, 0.04, rep);
    CHECK(c.h(0.0) == 0.0);
    CHECK(c.h(0.2) == doctest::Approx(0.2).epsilon(1e-8));
    CHECK(c.h(-0.2) == doctest::Approx(-0.2).epsilon(1e-8));
    ResidualReport res = residual_report(c, 1000, 1e-4);
    CHECK(res.sup_residual <= 1e-7);
}

TEST_CASE("fiber conjugacy across every sampled mu of the canonical corpus") {
    for (BifurcationType t : {BifurcationType::Fold, BifurcationType::Transcritical,
                              BifurcationType::Pitchfork, BifurcationType::Flip}) {
        CAPTURE(to_string(t));
        Family fam = canonical(t);
        BifurcationReport rep = classify_family(fam, 5);
        REQUIRE(rep.type == t);
        for (const auto& s : rep.samples) {
            CAPTURE(s.mu);
            ConjugacyMap c = conjugate_to_normal_form(fam, s.mu, rep);
            // mu = 0 fibers are tangential: the step count saturates well
            // outside the default exclusion, so they are verified outside a
            // wider one (the saturation zone maps to itself on both sides)
            double exclusion = s.mu == 0.0 ? 1e-2 : 1e-4;
            ResidualReport res = residual_report(c, 500, exclusion);
            CHECK(res.sup_residual <= 1e-7);
        }
    }
}

TEST_CASE("conjugating an unclassified report is refused") {
    Family fam = canonical(BifurcationType::Fold);
    BifurcationReport rep;
    rep.type = BifurcationType::Unclassified;
    CHECK_THROWS_AS(conjugate_to_normal_form(fam, 0.01, rep), error);
}

TEST_CASE("bifurcation report serializes samples and windows") {
    Family fam = canonical(BifurcationType::Flip);
    BifurcationReport rep = classify_family(fam, 5);
    nlohmann::json j = to_json(rep);
    CHECK(j["type"] == "flip");
    CHECK(j["sigma"] == 1);
    CHECK(j["samples"].size() == 5);
    for (const auto& s : j["samples"]) {
        CHECK(s.contains("mu"));
        CHECK(s.contains("n_fixed"));
        CHECK(s.contains("signature"));
        CHECK(s.contains("period2"));
    }
    CHECK(j["windows"]["x"][1] == 0.5);
}
