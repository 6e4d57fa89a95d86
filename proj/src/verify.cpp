#include "conj1d/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "conj1d/error.hpp"

namespace conj1d {

namespace {

ResidualReport residual_scan(const MonotoneMap& f, const Interval& domain_f,
                             const Interval& domain_g, const MonotoneMap& g,
                             const std::function<double(double)>& h,
                             const std::vector<double>& exclude, int n, double exclusion) {
    if (n < 100) throw error(errc::domain, "residual_report requires n >= 100");

    ResidualReport rep;
    rep.exclusion_radius = exclusion;
    double sum = 0.0;
    int used = 0;

    std::vector<double> xs = linspace(domain_f, n);
    for (double x : xs) {
        bool excluded = false;
        for (double p : exclude) {
            if (std::abs(x - p) < exclusion) {
                excluded = true;
                break;
            }
        }
        if (excluded) continue;
        double fx = f.eval_unchecked(x);
        if (!domain_f.contains(fx, kDomainSlack)) continue;

        double hx = h(x);
        if (!domain_g.contains(hx, kDomainSlack)) {
            // a candidate h that leaves g's domain is maximally wrong
            rep.sup_residual = std::numeric_limits<double>::infinity();
            rep.worst_point = x;
            ++used;
            continue;
        }
        double lhs = g.eval_unchecked(domain_g.clamp(hx));
        double rhs = h(domain_f.clamp(fx));
        double r = std::abs(lhs - rhs);
        sum += r;
        ++used;
        if (r > rep.sup_residual) {
            rep.sup_residual = r;
            rep.worst_point = x;
        }
    }
    if (used == 0)
        throw error(errc::domain,
                    "residual_report: every sample fell in an exclusion zone or left the domain");
    rep.mean_residual = sum / used;
    rep.n_samples = used;
    return rep;
}

}  // namespace

ResidualReport residual_report(const ConjugacyMap& c, int n, double exclusion) {
    std::vector<double> exclude;
    for (const auto& p : c.pins()) exclude.push_back(p.x_f);
    return residual_scan(c.f(), c.domain_f(), c.domain_g(), c.g(),
                         [&](double x) { return c.h(x); }, exclude, n, exclusion);
}

ResidualReport residual_report_fn(const MonotoneMap& f, const MonotoneMap& g,
                                  const std::function<double(double)>& h, Interval domain_f,
                                  const std::vector<double>& exclude_points, int n,
                                  double exclusion) {
    return residual_scan(f, domain_f, g.domain(), g, h, exclude_points, n, exclusion);
}

MonotonicityResult monotonicity_check(const ConjugacyMap& c, int n) {
    if (n < 2) throw error(errc::domain, "monotonicity_check requires n >= 2");
    std::vector<double> xs = linspace(c.domain_f(), n);
    std::vector<double> hs(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) hs[i] = c.h(xs[i]);

    const bool want_increasing = c.orientation() == Orientation::Increasing;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        bool ok = want_increasing ? hs[i + 1] > hs[i] : hs[i + 1] < hs[i];
        if (!ok) return {false, xs[i], xs[i + 1]};
    }
    return {true, 0.0, 0.0};
}

double orbit_check(const ConjugacyMap& c, double x0, int k) {
    if (!c.domain_f().contains(x0, kDomainSlack))
        throw error(errc::domain, "orbit_check: x0 outside the domain");
    double max_dev = 0.0;
    double xf = x0;
    double yg = c.h(x0);
    for (int j = 1; j <= k; ++j) {
        double next = c.f().eval_unchecked(c.domain_f().clamp(xf));
        if (!c.domain_f().contains(next, kDomainSlack))
            throw error(errc::domain, "orbit_check: orbit escaped the domain at step " +
                                          std::to_string(j));
        xf = next;
        yg = c.g().eval_unchecked(c.domain_g().clamp(yg));
        max_dev = std::max(max_dev, std::abs(c.h(xf) - yg));
    }
    return max_dev;
}

nlohmann::json to_json(const ResidualReport& r, double tol) {
    nlohmann::json j;
    j["sup"] = r.sup_residual;
    j["mean"] = r.mean_residual;
    j["n"] = r.n_samples;
    j["exclusion"] = r.exclusion_radius;
    j["worst_x"] = r.worst_point;
    j["pass"] = r.sup_residual <= tol;
    return j;
}

}  // namespace conj1d
