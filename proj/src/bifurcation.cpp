#include "conj1d/bifurcation.hpp"

#include <algorithm>
#include <cmath>

#include "conj1d/error.hpp"

namespace conj1d {

namespace {

enum class FiberPattern {
    Empty,            // increasing, no fixed points
    OneMixed,         // increasing, single mixed-stability point
    OneTransverse,    // increasing, single transverse point
    TwoTransverse,    // increasing, two transverse points, one attracting one repelling
    ThreeAlternating, // increasing, three transverse, outer pair opposite the middle
    DecFixedOnly,     // decreasing, one fixed point, no period-2 orbit
    DecFixedOrbit,    // decreasing, one fixed point plus an orbit of opposite stability
    Other,
};

SideBehavior point_value(const FixedPoint& fp) { return fp.left ? *fp.left : *fp.right; }

FiberPattern pattern_of(const FiberSample& s) {
    if (s.orientation == Orientation::Increasing) {
        const auto& fps = s.fixed_points;
        switch (fps.size()) {
            case 0: return FiberPattern::Empty;
            case 1:
                return fps[0].kind == PointKind::Mixed ? FiberPattern::OneMixed
                                                       : FiberPattern::OneTransverse;
            case 2:
                if (fps[0].kind == PointKind::Transverse &&
                    fps[1].kind == PointKind::Transverse &&
                    point_value(fps[0]) != point_value(fps[1]))
                    return FiberPattern::TwoTransverse;
                return FiberPattern::Other;
            case 3:
                if (fps[0].kind == PointKind::Transverse &&
                    fps[1].kind == PointKind::Transverse &&
                    fps[2].kind == PointKind::Transverse &&
                    point_value(fps[0]) == point_value(fps[2]) &&
                    point_value(fps[0]) != point_value(fps[1]))
                    return FiberPattern::ThreeAlternating;
                return FiberPattern::Other;
            default: return FiberPattern::Other;
        }
    }
    if (s.fixed_points.size() != 1) return FiberPattern::Other;
    if (s.orbits.empty()) return FiberPattern::DecFixedOnly;
    if (s.orbits.size() == 1 &&
        s.orbits[0].stability != point_value(s.fixed_points[0]))
        return FiberPattern::DecFixedOrbit;
    return FiberPattern::Other;
}

const char* pattern_name(FiberPattern p) {
    switch (p) {
        case FiberPattern::Empty: return "no fixed points";
        case FiberPattern::OneMixed: return "one mixed point";
        case FiberPattern::OneTransverse: return "one transverse point";
        case FiberPattern::TwoTransverse: return "two transverse points";
        case FiberPattern::ThreeAlternating: return "three alternating points";
        case FiberPattern::DecFixedOnly: return "decreasing, fixed point only";
        case FiberPattern::DecFixedOrbit: return "decreasing, fixed point + period-2 orbit";
        case FiberPattern::Other: return "unrecognized";
    }
    return "unrecognized";
}

std::string fiber_description(const FiberSample& s) {
    return "mu=" + std::to_string(s.mu) + ": " + pattern_name(pattern_of(s));
}

// One pattern per side; disagreeing fibers within a side make the family
// unclassifiable at this window.
std::optional<FiberPattern> uniform_pattern(const std::vector<const FiberSample*>& side) {
    std::optional<FiberPattern> p;
    for (const FiberSample* s : side) {
        FiberPattern q = pattern_of(*s);
        if (!p)
            p = q;
        else if (*p != q)
            return std::nullopt;
    }
    return p;
}

MonotoneMap freeze_monotone_shrinking(const Family& fam, double mu, Interval* used_window) {
    Interval w = fam.x_window;
    for (int attempt = 0; attempt < 12; ++attempt) {
        try {
            MonotoneMap m = fam.freeze(mu, w);
            if (used_window) *used_window = w;
            return m;
        } catch (const error&) {
            double c = w.mid();
            double half = 0.35 * w.length();
            w = Interval(c - half, c + half);
        }
    }
    throw error(errc::domain, "fiber at mu=" + std::to_string(mu) +
                                  " is not monotone on any centered sub-window");
}

Interval cluster_window(const std::vector<double>& pts, const Interval& window) {
    if (pts.empty()) return window;
    double lo = *std::min_element(pts.begin(), pts.end());
    double hi = *std::max_element(pts.begin(), pts.end());
    double pad = std::max(0.1 * (hi - lo), 0.05 * window.length());
    return Interval(window.clamp(lo - pad), window.clamp(hi + pad));
}

}  // namespace

MonotoneMap Family::freeze(double mu) const { return freeze(mu, x_window); }

MonotoneMap Family::freeze(double mu, Interval window) const {
    return MonotoneMap(expr, window, mu);
}

Family normal_form(const NormalForm& nf) { return normal_form(nf.type, nf.sign_mu, nf.sign_x); }

Family normal_form(BifurcationType type, int sign_mu, int sign_x) {
    const char* mu_term = nullptr;
    const char* x_term = nullptr;
    std::string text;
    switch (type) {
        case BifurcationType::Fold:
            mu_term = sign_mu > 0 ? " + mu" : " - mu";
            x_term = sign_x > 0 ? " + x^2" : " - x^2";
            text = std::string("x") + mu_term + x_term;
            break;
        case BifurcationType::Transcritical:
            mu_term = sign_mu > 0 ? " + mu*x" : " - mu*x";
            x_term = sign_x > 0 ? " + x^2" : " - x^2";
            text = std::string("x") + mu_term + x_term;
            break;
        case BifurcationType::Pitchfork:
            mu_term = sign_mu > 0 ? " + mu*x" : " - mu*x";
            x_term = sign_x > 0 ? " + x^3" : " - x^3";
            text = std::string("x") + mu_term + x_term;
            break;
        case BifurcationType::Flip:
            mu_term = sign_mu > 0 ? " + mu*x" : " - mu*x";
            x_term = sign_x > 0 ? " + x^3" : " - x^3";
            text = std::string("-x") + mu_term + x_term;
            break;
        case BifurcationType::Unclassified:
            throw error(errc::domain, "no normal form for an unclassified family");
    }
    Family fam{MapExpr::parse(text), Interval(-0.75, 0.75), Interval(-0.1, 0.1)};
    return fam;
}

BifurcationReport classify_family(const Family& fam, int n_mu) {
    if (n_mu < 3 || n_mu % 2 == 0)
        throw error(errc::domain, "classify_family requires odd n_mu >= 3");
    if (!(fam.mu_window.lo < 0.0 && fam.mu_window.hi > 0.0))
        throw error(errc::domain, "classify_family requires 0 strictly inside the mu window");

    const int per_side = (n_mu - 1) / 2;
    std::vector<double> mus;
    for (int k = per_side - 1; k >= 0; --k)
        mus.push_back(fam.mu_window.lo / std::pow(4.0, per_side - 1 - k));
    // ascending: most negative first, log-spaced toward 0
    std::sort(mus.begin(), mus.end());
    mus.push_back(0.0);
    for (int k = per_side - 1; k >= 0; --k) mus.push_back(fam.mu_window.hi / std::pow(4.0, k));

    BifurcationReport rep;
    rep.x_window = fam.x_window;
    rep.mu_window = fam.mu_window;
    rep.mu_samples = static_cast<int>(mus.size());

    for (double mu : mus) {
        FiberSample s;
        s.mu = mu;
        // A window generous enough to leave the monotone regime is shrunk
        // toward its center first; the bifurcation structure is local. A
        // fiber that stays non-monotone aborts the classification.
        MonotoneMap m = freeze_monotone_shrinking(fam, mu, nullptr);
        s.orientation = m.orientation();
        s.fixed_points = find_fixed_points(m);
        if (s.orientation == Orientation::Decreasing) s.orbits = find_period2(m);
        rep.samples.push_back(std::move(s));
    }

    std::vector<const FiberSample*> plus, minus;
    const FiberSample* zero = nullptr;
    for (const auto& s : rep.samples) {
        if (s.mu > 0)
            plus.push_back(&s);
        else if (s.mu < 0)
            minus.push_back(&s);
        else
            zero = &s;
    }

    auto pp = uniform_pattern(plus);
    auto pm = uniform_pattern(minus);
    FiberPattern pz = pattern_of(*zero);

    auto unclassified = [&]() {
        rep.type = BifurcationType::Unclassified;
        std::string d;
        for (const auto& s : rep.samples) {
            if (!d.empty()) d += "; ";
            d += fiber_description(s);
        }
        rep.detail = d;
        return rep;
    };
    if (!pp || !pm) return unclassified();

    auto sides_are = [&](FiberPattern rich, FiberPattern poor, int* sigma) {
        if (*pp == rich && *pm == poor) {
            *sigma = +1;
            return true;
        }
        if (*pm == rich && *pp == poor) {
            *sigma = -1;
            return true;
        }
        return false;
    };

    int sigma = +1;
    if (pz == FiberPattern::OneMixed &&
        sides_are(FiberPattern::TwoTransverse, FiberPattern::Empty, &sigma)) {
        rep.type = BifurcationType::Fold;
        rep.sigma = sigma;
        return rep;
    }
    if (pz == FiberPattern::OneMixed && *pp == FiberPattern::TwoTransverse &&
        *pm == FiberPattern::TwoTransverse) {
        rep.type = BifurcationType::Transcritical;
        // Both sides carry the same ordered signature, so the sign convention
        // comes from where the two-point cluster sits relative to the mu=0
        // point: the canonical x + mu*x - x^2 pushes it to the right for
        // mu > 0, and replacing mu by -mu flips the offset.
        double xc = zero->fixed_points[0].location;
        const FiberSample* probe = plus.front();
        for (const FiberSample* s : plus)
            if (std::abs(s->mu) > std::abs(probe->mu)) probe = s;
        double offset = 0.0;
        for (const auto& fp : probe->fixed_points) offset += fp.location - xc;
        rep.sigma = offset >= 0 ? +1 : -1;
        return rep;
    }
    if (pz == FiberPattern::OneTransverse &&
        sides_are(FiberPattern::ThreeAlternating, FiberPattern::OneTransverse, &sigma)) {
        rep.type = BifurcationType::Pitchfork;
        rep.sigma = sigma;
        return rep;
    }
    if (pz == FiberPattern::DecFixedOnly &&
        sides_are(FiberPattern::DecFixedOrbit, FiberPattern::DecFixedOnly, &sigma)) {
        rep.type = BifurcationType::Flip;
        rep.sigma = sigma;
        return rep;
    }
    return unclassified();
}

ConjugacyMap conjugate_to_normal_form(const Family& fam, double mu,
                                      const BifurcationReport& report) {
    if (report.type == BifurcationType::Unclassified)
        throw error(errc::structure, "cannot conjugate an unclassified family");

    // Restrict the family fiber to its fixed-point / period-2 cluster.
    Interval fam_probe_window = fam.x_window;
    MonotoneMap probe = freeze_monotone_shrinking(fam, mu, &fam_probe_window);
    std::vector<double> pts;
    for (const auto& fp : find_fixed_points(probe)) pts.push_back(fp.location);
    if (probe.orientation() == Orientation::Decreasing) {
        for (const auto& o : find_period2(probe)) {
            pts.push_back(o.x_left);
            pts.push_back(o.x_right);
        }
    }
    Interval fam_window = cluster_window(pts, fam_probe_window);
    MonotoneMap fam_fiber = fam.freeze(mu, fam_window);

    const double mu2 = report.sigma * mu;
    const int sign_combos[4][2] = {{+1, -1}, {-1, -1}, {+1, +1}, {-1, +1}};
    std::string first_failure;

    for (const auto& combo : sign_combos) {
        try {
            Family nf = normal_form(report.type, combo[0], combo[1]);
            Interval nf_probe_window = nf.x_window;
            MonotoneMap nf_probe = freeze_monotone_shrinking(nf, mu2, &nf_probe_window);
            if (nf_probe.orientation() != fam_fiber.orientation()) continue;

            std::vector<double> nf_pts;
            for (const auto& fp : find_fixed_points(nf_probe)) nf_pts.push_back(fp.location);
            if (nf_probe.orientation() == Orientation::Decreasing) {
                for (const auto& o : find_period2(nf_probe)) {
                    nf_pts.push_back(o.x_left);
                    nf_pts.push_back(o.x_right);
                }
            }
            Interval nf_window = cluster_window(nf_pts, nf_probe_window);
            MonotoneMap nf_fiber = nf.freeze(mu2, nf_window);

            if (fam_fiber.orientation() == Orientation::Increasing)
                return build_full(fam_fiber, nf_fiber);
            return build_flip(fam_fiber, nf_fiber);
        } catch (const error& e) {
            if (e.kind() == errc::structure && first_failure.empty()) first_failure = e.what();
        }
    }

    std::string where;
    for (double p : pts) {
        if (!where.empty()) where += ", ";
        where += std::to_string(p);
    }
    throw error(errc::structure,
                "no normal-form variant matches the fiber at mu=" + std::to_string(mu) +
                    " (fixed/periodic points at [" + where + "])" +
                    (first_failure.empty() ? "" : ": " + first_failure));
}

const char* to_string(BifurcationType t) {
    switch (t) {
        case BifurcationType::Fold: return "fold";
        case BifurcationType::Transcritical: return "transcritical";
        case BifurcationType::Pitchfork: return "pitchfork";
        case BifurcationType::Flip: return "flip";
        case BifurcationType::Unclassified: return "unclassified";
    }
    return "unclassified";
}

std::optional<BifurcationType> bifurcation_type_from_string(const std::string& s) {
    if (s == "fold") return BifurcationType::Fold;
    if (s == "transcritical") return BifurcationType::Transcritical;
    if (s == "pitchfork") return BifurcationType::Pitchfork;
    if (s == "flip") return BifurcationType::Flip;
    return std::nullopt;
}

nlohmann::json to_json(const BifurcationReport& r) {
    nlohmann::json j;
    j["type"] = to_string(r.type);
    j["sigma"] = r.sigma;
    j["samples"] = nlohmann::json::array();
    for (const auto& s : r.samples) {
        nlohmann::json e;
        e["mu"] = s.mu;
        e["n_fixed"] = s.fixed_points.size();
        e["signature"] = nlohmann::json::array();
        for (const auto& fp : s.fixed_points) e["signature"].push_back(to_json(fp));
        e["period2"] = nlohmann::json::array();
        for (const auto& o : s.orbits) e["period2"].push_back(to_json(o));
        j["samples"].push_back(e);
    }
    j["windows"] = {{"x", {r.x_window.lo, r.x_window.hi}},
                    {"mu", {r.mu_window.lo, r.mu_window.hi}}};
    if (r.type == BifurcationType::Unclassified) j["observed"] = r.detail;
    return j;
}

}  // namespace conj1d
