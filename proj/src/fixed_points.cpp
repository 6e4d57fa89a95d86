#include "conj1d/fixed_points.hpp"

#include <algorithm>
#include <cmath>

#include "conj1d/error.hpp"

namespace conj1d {

namespace {

double diag_dist(const MonotoneMap& m, double x) { return m.eval_unchecked(x) - x; }

int sgn(double v) { return v > 0 ? +1 : (v < 0 ? -1 : 0); }

// Near a root the computed d(x) = f(x) - x can evaluate to exactly zero on a
// whole plateau of floats (f(x) rounds to x). The midpoint of that plateau is
// a grid-independent location, so every refinement path lands on it. Guards
// march outward by doubling until they leave the plateau, which keeps the
// result independent of where inside the plateau the search started.
double plateau_mid(const MonotoneMap& m, double x0, double lo_limit, double hi_limit) {
    auto zero = [&](double x) { return diag_dist(m, x) == 0.0; };

    auto edge = [&](double from_zero, double limit, bool leftward) {
        double span = std::max(1e-15, 1e-15 * std::abs(from_zero));
        double guard = leftward ? std::max(limit, from_zero - span)
                                : std::min(limit, from_zero + span);
        for (int it = 0; it < 200 && zero(guard) && guard != limit; ++it) {
            span *= 2.0;
            guard = leftward ? std::max(limit, from_zero - span)
                             : std::min(limit, from_zero + span);
        }
        if (zero(guard)) return guard;  // plateau reaches the domain edge
        double lo = leftward ? guard : from_zero;
        double hi = leftward ? from_zero : guard;
        // invariant: the side toward from_zero stays on the plateau
        for (int it = 0; it < 1200; ++it) {
            double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            bool z = zero(mid);
            if (leftward ? z : !z)
                hi = mid;
            else
                lo = mid;
        }
        return leftward ? hi : lo;
    };

    double a = edge(x0, lo_limit, true);
    double b = edge(x0, hi_limit, false);
    return 0.5 * (a + b);
}

// Root of d(x) = f(x) - x inside a sign-change bracket, refined to float
// resolution (monotone d is not assumed; the sign bracket is enough).
double bisect_root(const MonotoneMap& m, double lo, double hi, double dlo) {
    const double lo0 = lo, hi0 = hi;
    int slo = sgn(dlo);
    for (int it = 0; it < 1200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double dm = diag_dist(m, mid);
        if (sgn(dm) == slo)
            lo = mid;
        else
            hi = mid;
    }
    double x = 0.5 * (lo + hi);
    if (diag_dist(m, x) == 0.0) return plateau_mid(m, x, lo0, hi0);
    return x;
}

// Minimum of |d| inside [lo, hi] for a tangential touch (no sign change seen
// on the grid). If d changes sign between probe points, the grid missed a
// crossing pair, which is a detection failure rather than a touch.
double ternary_touch(const MonotoneMap& m, double lo, double hi, double noise_tol,
                     double* dmin_out) {
    const double lo0 = lo, hi0 = hi;
    int seen_sign = 0;
    auto probe = [&](double x) {
        double d = diag_dist(m, x);
        // values inside the noise band are indistinguishable from zero and
        // carry no sign information
        int s = std::abs(d) <= noise_tol ? 0 : sgn(d);
        if (s != 0) {
            if (seen_sign == 0)
                seen_sign = s;
            else if (s != seen_sign)
                throw error(errc::structure,
                            "grid too coarse: sign change hidden inside touch cell near x=" +
                                std::to_string(x));
        }
        return std::abs(d);
    };
    for (int it = 0; it < 200 && (hi - lo) > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        double m1 = lo + (hi - lo) / 3.0;
        double m2 = hi - (hi - lo) / 3.0;
        if (probe(m1) < probe(m2))
            hi = m2;
        else
            lo = m1;
    }
    double x = 0.5 * (lo + hi);
    if (diag_dist(m, x) == 0.0) x = plateau_mid(m, x, lo0, hi0);
    *dmin_out = std::abs(diag_dist(m, x));
    return x;
}

SignatureEntry entry_of(const FixedPoint& fp) { return {fp.left, fp.right}; }

std::optional<SideBehavior> behavior_from_sign(int s, bool left_side) {
    // For increasing maps: f > x left of the point pushes orbits toward it;
    // f > x right of the point pushes them away.
    if (s == 0) return std::nullopt;
    bool attracting = left_side ? (s > 0) : (s < 0);
    return attracting ? SideBehavior::Attracting : SideBehavior::Repelling;
}

}  // namespace

StabilitySignature reversed(const StabilitySignature& sig) {
    StabilitySignature out;
    out.entries.reserve(sig.entries.size());
    for (auto it = sig.entries.rbegin(); it != sig.entries.rend(); ++it)
        out.entries.push_back({it->right, it->left});
    auto flip = [](const std::optional<int>& s) -> std::optional<int> {
        if (!s) return std::nullopt;
        return -*s;
    };
    out.left_outer_sign = flip(sig.right_outer_sign);
    out.right_outer_sign = flip(sig.left_outer_sign);
    return out;
}

FixedPoint classify_fixed_point(const MonotoneMap& m, double x_star, double probe) {
    if (probe <= 0.0) throw error(errc::domain, "classify_fixed_point: probe must be positive");
    const Interval& dom = m.domain();
    FixedPoint fp;
    fp.location = x_star;

    if (m.orientation() == Orientation::Increasing) {
        auto side = [&](bool left) -> std::optional<SideBehavior> {
            double q = left ? x_star - probe / 2.0 : x_star + probe / 2.0;
            if (!dom.contains(q, kDomainSlack)) return std::nullopt;
            double p = probe;
            for (int shrink = 0; shrink < 8; ++shrink) {
                int s = sgn(diag_dist(m, q));
                if (s != 0) return behavior_from_sign(s, left);
                p *= 0.5;
                q = left ? x_star - p / 2.0 : x_star + p / 2.0;
            }
            throw error(errc::structure, "classify_fixed_point: f(x)-x vanishes on probes near " +
                                             std::to_string(x_star));
        };
        fp.left = side(true);
        fp.right = side(false);
    } else {
        // Decreasing homeomorphisms admit only attracting or repelling fixed
        // points; the second iterate decides which.
        auto moved_closer = [&](double q) -> std::optional<bool> {
            if (!dom.contains(q, kDomainSlack)) return std::nullopt;
            double f1 = m.eval_unchecked(dom.clamp(q));
            if (!dom.contains(f1, kDomainSlack)) return std::nullopt;
            double f2 = m.eval_unchecked(dom.clamp(f1));
            return std::abs(f2 - x_star) < std::abs(q - x_star);
        };
        std::optional<bool> l, r;
        for (double p = probe; p > 16 * kDomainSlack && !l && !r; p *= 0.5) {
            l = moved_closer(x_star - p);
            r = moved_closer(x_star + p);
        }
        if (!l && !r)
            throw error(errc::structure,
                        "classify_fixed_point: no usable probe near " + std::to_string(x_star));
        bool attracting = (l && r) ? (*l && *r) : (l ? *l : *r);
        SideBehavior b = attracting ? SideBehavior::Attracting : SideBehavior::Repelling;
        if (dom.contains(x_star - probe / 2.0, kDomainSlack)) fp.left = b;
        if (dom.contains(x_star + probe / 2.0, kDomainSlack)) fp.right = b;
    }

    if (fp.left && fp.right)
        fp.kind = (*fp.left == *fp.right) ? PointKind::Transverse : PointKind::Mixed;
    else
        fp.kind = PointKind::Transverse;
    return fp;
}

std::vector<FixedPoint> find_fixed_points(const MonotoneMap& m, const DetectOptions& opt) {
    if (opt.grid_n < 64) throw error(errc::domain, "find_fixed_points requires grid_n >= 64");
    const Interval& dom = m.domain();
    std::vector<double> xs = linspace(dom, opt.grid_n + 1);
    std::vector<double> fx(xs.size());
    m.eval_many(xs, fx);
    std::vector<double> d(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) d[i] = fx[i] - xs[i];

    std::vector<double> candidates;

    // Exact hits and sign-change brackets.
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        int s0 = sgn(d[i]), s1 = sgn(d[i + 1]);
        if (s0 == 0) candidates.push_back(plateau_mid(m, xs[i], dom.lo, dom.hi));
        if (s0 != 0 && s1 != 0 && s0 != s1)
            candidates.push_back(bisect_root(m, xs[i], xs[i + 1], d[i]));
    }
    if (sgn(d.back()) == 0)
        candidates.push_back(plateau_mid(m, xs.back(), dom.lo, dom.hi));

    // Tangential touches: interior |d| minima with no sign change across the
    // neighborhood. Candidates either fall below touch_tol or show a kink:
    // at a conical or parabolic touch the discrete curvature of |d| is of the
    // order of |d| itself, while smooth minima away from roots have curvature
    // smaller by the squared grid pitch. Near-misses surviving this filter
    // are still rejected after refinement via root_tol.
    for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
        double curvature = std::abs(d[i - 1]) + std::abs(d[i + 1]) - 2 * std::abs(d[i]);
        bool below_tol = std::abs(d[i]) < opt.touch_tol;
        bool kink = curvature >= 0.5 * std::abs(d[i]);
        if (!below_tol && !kink) continue;
        if (std::abs(d[i]) > std::abs(d[i - 1]) || std::abs(d[i]) > std::abs(d[i + 1])) continue;
        if (sgn(d[i - 1]) != sgn(d[i + 1]))
            continue;  // crossing or exact neighbor hit, both handled above
        if (sgn(d[i]) == 0) continue;  // exact hit, already recorded
        double dmin = 0.0;
        double x = ternary_touch(m, xs[i - 1], xs[i + 1], opt.root_tol, &dmin);
        if (dmin <= opt.root_tol) candidates.push_back(x);
    }

    // A root sitting on a domain endpoint may round d(endpoint) to a tiny
    // nonzero value with no sign change in the boundary cell (inverse-backed
    // maps add bisection noise of the same size); refine those as touches.
    auto boundary_touch = [&](std::size_t edge, std::size_t next) {
        if (sgn(d[edge]) == 0) return;
        if (std::abs(d[edge]) >= opt.touch_tol) return;
        if (std::abs(d[edge]) > std::abs(d[next])) return;
        if (sgn(d[next]) != 0 && sgn(d[edge]) != sgn(d[next])) return;
        double dmin = 0.0;
        double x = ternary_touch(m, std::min(xs[edge], xs[next]), std::max(xs[edge], xs[next]),
                                 opt.root_tol, &dmin);
        if (dmin <= opt.root_tol) candidates.push_back(x);
    };
    boundary_touch(0, 1);
    boundary_touch(xs.size() - 1, xs.size() - 2);

    std::sort(candidates.begin(), candidates.end());

    // Dedup at spacing <= 2*root_tol, keeping the candidate with smaller |d|.
    std::vector<double> roots;
    for (double c : candidates) {
        if (!roots.empty() && c - roots.back() <= 2 * opt.root_tol) {
            if (std::abs(diag_dist(m, c)) < std::abs(diag_dist(m, roots.back())))
                roots.back() = c;
        } else {
            roots.push_back(c);
        }
    }

    std::vector<FixedPoint> out;
    out.reserve(roots.size());
    const double cell = dom.length() / opt.grid_n;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        double gap_left = i == 0 ? 2 * (roots[i] - dom.lo) : roots[i] - roots[i - 1];
        double gap_right = i + 1 == roots.size() ? 2 * (dom.hi - roots[i]) : roots[i + 1] - roots[i];
        double probe = 0.5 * std::min({gap_left, gap_right, 4 * cell});
        probe = std::max(probe, 64 * opt.root_tol);
        out.push_back(classify_fixed_point(m, roots[i], probe));
    }
    return out;
}

StabilitySignature signature(const MonotoneMap& m, const DetectOptions& opt) {
    if (m.orientation() != Orientation::Increasing)
        throw error(errc::domain, "signature is defined for increasing maps");
    std::vector<FixedPoint> fps = find_fixed_points(m, opt);

    StabilitySignature sig;
    sig.entries.reserve(fps.size());
    for (const auto& fp : fps) sig.entries.push_back(entry_of(fp));

    const Interval& dom = m.domain();
    const double edge = std::max(1e-9, 16 * opt.root_tol);
    if (fps.empty()) {
        int s = sgn(diag_dist(m, dom.mid()));
        sig.left_outer_sign = s;
        sig.right_outer_sign = s;
    } else {
        if (fps.front().location - dom.lo > edge)
            sig.left_outer_sign =
                sgn(diag_dist(m, 0.5 * (dom.lo + fps.front().location)));
        if (dom.hi - fps.back().location > edge)
            sig.right_outer_sign =
                sgn(diag_dist(m, 0.5 * (fps.back().location + dom.hi)));
    }
    return sig;
}

std::vector<PeriodTwoOrbit> find_period2(const MonotoneMap& m, const DetectOptions& opt) {
    if (m.orientation() != Orientation::Decreasing)
        throw error(errc::domain, "find_period2 is defined for decreasing maps");
    const Interval& dom = m.domain();

    // Largest sub-interval where f(f(x)) stays defined: f(x) must remain in
    // the domain, so clip both ends through the inverse when f overshoots.
    double s_lo = dom.lo, s_hi = dom.hi;
    if (m.eval_unchecked(dom.lo) > dom.hi) s_lo = m.inverse(dom.hi);
    if (m.eval_unchecked(dom.hi) < dom.lo) s_hi = m.inverse(dom.lo);
    if (!(s_lo < s_hi)) throw error(errc::domain, "find_period2: f^2 nowhere defined");
    Interval sub(s_lo, s_hi);

    auto f2 = [&](double x) { return m.eval_unchecked(dom.clamp(m.eval_unchecked(x))); };

    int n = std::max(opt.grid_n, 64);
    std::vector<double> xs = linspace(sub, n + 1);
    std::vector<double> d(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) d[i] = f2(xs[i]) - xs[i];

    std::vector<double> candidates;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        int s0 = sgn(d[i]), s1 = sgn(d[i + 1]);
        if (s0 == 0) candidates.push_back(xs[i]);
        if (s0 != 0 && s1 != 0 && s0 != s1) {
            double lo = xs[i], hi = xs[i + 1];
            for (int it = 0; it < 1200; ++it) {
                double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                double dm = f2(mid) - mid;
                if (sgn(dm) == s0)
                    lo = mid;
                else
                    hi = mid;
            }
            candidates.push_back(0.5 * (lo + hi));
        }
    }
    if (sgn(d.back()) == 0) candidates.push_back(xs.back());

    std::sort(candidates.begin(), candidates.end());
    std::vector<double> pts;
    for (double c : candidates) {
        if (!pts.empty() && c - pts.back() <= 2 * opt.root_tol) continue;
        pts.push_back(c);
    }

    // Drop fixed points of f itself.
    std::vector<double> orbit_pts;
    for (double p : pts)
        if (std::abs(m.eval_unchecked(p) - p) > 2 * opt.root_tol) orbit_pts.push_back(p);

    // Pair the remainder via x -> f(x).
    std::vector<bool> used(orbit_pts.size(), false);
    std::vector<PeriodTwoOrbit> orbits;
    const double pair_tol = std::max(1e3 * opt.root_tol, 1e-9 * dom.length());
    for (std::size_t i = 0; i < orbit_pts.size(); ++i) {
        if (used[i]) continue;
        double y = m.eval_unchecked(orbit_pts[i]);
        std::size_t partner = orbit_pts.size();
        double best = pair_tol;
        for (std::size_t j = 0; j < orbit_pts.size(); ++j) {
            if (j == i || used[j]) continue;
            double gap = std::abs(orbit_pts[j] - y);
            if (gap <= best) {
                best = gap;
                partner = j;
            }
        }
        if (partner == orbit_pts.size())
            throw error(errc::structure, "find_period2: unpaired period-2 candidate at x=" +
                                             std::to_string(orbit_pts[i]));
        used[i] = used[partner] = true;
        PeriodTwoOrbit orbit;
        orbit.x_left = std::min(orbit_pts[i], orbit_pts[partner]);
        orbit.x_right = std::max(orbit_pts[i], orbit_pts[partner]);

        // Stability from the behavior of f^2 beside x_right.
        double width = orbit.x_right - orbit.x_left;
        double delta = std::min({width / 8.0, (sub.hi - orbit.x_right) / 2.0,
                                 (orbit.x_right - sub.lo) / 2.0});
        delta = std::max(delta, 1e4 * opt.root_tol);
        int votes = 0, closer = 0;
        for (double q : {orbit.x_right - delta, orbit.x_right + delta}) {
            if (!sub.contains(q)) continue;
            ++votes;
            if (std::abs(f2(q) - orbit.x_right) < std::abs(q - orbit.x_right)) ++closer;
        }
        orbit.stability = (votes > 0 && closer == votes) ? SideBehavior::Attracting
                                                         : SideBehavior::Repelling;
        orbits.push_back(orbit);
    }
    std::sort(orbits.begin(), orbits.end(),
              [](const PeriodTwoOrbit& a, const PeriodTwoOrbit& b) { return a.x_left < b.x_left; });
    return orbits;
}

const char* to_string(SideBehavior b) {
    return b == SideBehavior::Attracting ? "attracting" : "repelling";
}

const char* to_string(PointKind k) { return k == PointKind::Transverse ? "transverse" : "mixed"; }

nlohmann::json to_json(const FixedPoint& fp) {
    nlohmann::json j;
    j["x"] = fp.location;
    j["left"] = fp.left ? nlohmann::json(to_string(*fp.left)) : nlohmann::json(nullptr);
    j["right"] = fp.right ? nlohmann::json(to_string(*fp.right)) : nlohmann::json(nullptr);
    j["kind"] = to_string(fp.kind);
    return j;
}

nlohmann::json to_json(const PeriodTwoOrbit& orbit) {
    return {{"xl", orbit.x_left}, {"xr", orbit.x_right}, {"stability", to_string(orbit.stability)}};
}

nlohmann::json fixed_point_report(const MonotoneMap& m, const std::vector<FixedPoint>& fps,
                                  const std::vector<PeriodTwoOrbit>& orbits) {
    nlohmann::json j;
    j["map"] = m.label();
    j["domain"] = {m.domain().lo, m.domain().hi};
    j["fixed_points"] = nlohmann::json::array();
    for (const auto& fp : fps) j["fixed_points"].push_back(to_json(fp));
    j["period2"] = nlohmann::json::array();
    for (const auto& orbit : orbits) j["period2"].push_back(to_json(orbit));
    return j;
}

}  // namespace conj1d
