#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "conj1d/conjugacy.hpp"

#include "json.hpp"

namespace conj1d {

struct ResidualReport {
    double sup_residual = 0.0;
    double mean_residual = 0.0;
    int n_samples = 0;   // samples actually evaluated (after exclusions)
    double exclusion_radius = 0.0;
    double worst_point = 0.0;
};

struct MonotonicityResult {
    bool pass = true;
    double x1 = 0.0;  // offending pair when pass is false
    double x2 = 0.0;
};

inline constexpr double kDefaultExclusion = 1e-4;

/// Residual of the conjugacy equation |g(h(x)) - h(f(x))| over n uniform
/// samples of f's domain, skipping points within `exclusion` of any pinned
/// fixed/periodic point and points whose image f(x) leaves the domain.
/// Near fixed points both sides of the equation saturate identically, so the
/// exclusion zone exists to keep the report interpretable, not to hide error.
ResidualReport residual_report(const ConjugacyMap& c, int n, double exclusion = kDefaultExclusion);

/// Same scan against an arbitrary candidate h; used for closed-form candidates
/// and fault-injection checks, so the verifier stays independent of how h was
/// produced.
ResidualReport residual_report_fn(const MonotoneMap& f, const MonotoneMap& g,
                                  const std::function<double(double)>& h, Interval domain_f,
                                  const std::vector<double>& exclude_points, int n,
                                  double exclusion = kDefaultExclusion);

/// Strict monotonicity of h over n sorted samples, in the orientation recorded
/// on c (decreasing when the build reversed the signature).
MonotonicityResult monotonicity_check(const ConjugacyMap& c, int n);

/// max over j <= k of |h(f^j(x0)) - g^j(h(x0))|. Repelling directions amplify
/// float error, so the acceptable deviation is caller policy.
double orbit_check(const ConjugacyMap& c, double x0, int k);

/// {sup, mean, n, exclusion, worst_x, pass}
nlohmann::json to_json(const ResidualReport& r, double tol);

}  // namespace conj1d
