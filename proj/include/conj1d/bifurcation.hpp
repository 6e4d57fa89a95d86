#pragma once

#include <optional>
#include <string>
#include <vector>

#include "conj1d/conjugacy.hpp"
#include "conj1d/fixed_points.hpp"
#include "conj1d/monotone_map.hpp"

#include "json.hpp"

namespace conj1d {

/// A one-parameter family f(x, mu) over rectangular windows in x and mu.
struct Family {
    MapExpr expr;
    Interval x_window{-0.75, 0.75};
    Interval mu_window{-0.1, 0.1};

    /// The fiber map at a fixed parameter value (monotonicity checked).
    MonotoneMap freeze(double mu) const;
    MonotoneMap freeze(double mu, Interval window) const;
};

enum class BifurcationType { Fold, Transcritical, Pitchfork, Flip, Unclassified };

struct NormalForm {
    BifurcationType type = BifurcationType::Fold;
    int sign_mu = +1;
    int sign_x = -1;
};

/// The truncated normal-form family for a type/sign combination:
///   Fold:          x +- mu +- x^2
///   Transcritical: x +- mu*x +- x^2
///   Pitchfork:     x +- mu*x +- x^3
///   Flip:          -x +- mu*x +- x^3
/// with default windows x in [-0.75, 0.75], mu in [-0.1, 0.1].
Family normal_form(const NormalForm& nf);
Family normal_form(BifurcationType type, int sign_mu, int sign_x);

/// What one frozen fiber looks like structurally.
struct FiberSample {
    double mu = 0.0;
    Orientation orientation = Orientation::Increasing;
    std::vector<FixedPoint> fixed_points;
    std::vector<PeriodTwoOrbit> orbits;  // decreasing fibers only
};

struct BifurcationReport {
    BifurcationType type = BifurcationType::Unclassified;
    int sigma = +1;  // parameter correspondence p(mu) = sigma * mu
    std::vector<FiberSample> samples;
    int mu_samples = 0;
    std::string detail;  // observed pattern when Unclassified
    Interval x_window{-0.75, 0.75};
    Interval mu_window{-0.1, 0.1};
};

/// Samples fibers on both sides of mu = 0 and at 0 (n_mu odd, >= 3; values
/// log-spaced toward 0) and matches the per-side structure against the four
/// bifurcation patterns. sigma = +1 when the structurally rich side is mu > 0.
BifurcationReport classify_family(const Family& fam, int n_mu = 9);

/// Builds the fiber conjugacy h_mu between the family frozen at mu and the
/// matching truncated normal form frozen at sigma*mu, both restricted to the
/// smallest interval containing their fixed-point (and period-2) cluster plus
/// a margin. Increasing fibers go through build_full, decreasing through
/// build_flip.
ConjugacyMap conjugate_to_normal_form(const Family& fam, double mu,
                                      const BifurcationReport& report);

const char* to_string(BifurcationType t);
std::optional<BifurcationType> bifurcation_type_from_string(const std::string& s);

/// {type, sigma, samples: [{mu, n_fixed, signature, period2}], windows}
nlohmann::json to_json(const BifurcationReport& r);

}  // namespace conj1d
