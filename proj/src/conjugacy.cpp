#include "conj1d/conjugacy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "conj1d/error.hpp"

namespace conj1d {

namespace {

int sgn(double v) { return v > 0 ? +1 : (v < 0 ? -1 : 0); }

double fixed_end_tol(const Interval& seg) { return std::max(1e-9, 1e-9 * seg.length()); }

void require_fixed(const MonotoneMap& m, double x, const char* which) {
    double miss = std::abs(m.eval_unchecked(x) - x);
    if (miss > 1e-7)
        throw error(errc::structure, std::string(which) + " endpoint " + std::to_string(x) +
                                         " is not a fixed point (|f(x)-x|=" +
                                         std::to_string(miss) + ")");
}

// Sign of f(x)-x on the open segment; rejects interior zeros and sign flips.
int segment_sign(const MonotoneMap& m, const Interval& seg, const char* who) {
    const int kProbes = 257;
    double step = seg.length() / (kProbes + 1);
    int s = 0;
    for (int i = 1; i <= kProbes; ++i) {
        double x = seg.lo + step * i;
        double d = m.eval_unchecked(x) - x;
        int si = sgn(d);
        if (std::abs(d) <= fixed_end_tol(seg)) {
            // skip points indistinguishable from the endpoints' roots
            if (x - seg.lo > 8 * step && seg.hi - x > 8 * step)
                throw error(errc::structure, std::string(who) +
                                                 ": interior fixed point detected near x=" +
                                                 std::to_string(x));
            continue;
        }
        if (s == 0)
            s = si;
        else if (si != s)
            throw error(errc::structure, std::string(who) +
                                             ": f(x)-x changes sign inside the segment near x=" +
                                             std::to_string(x));
    }
    if (s == 0)
        throw error(errc::structure,
                    std::string(who) + ": f(x)-x vanishes on the whole segment");
    return s;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// FundamentalSeed

FundamentalSeed FundamentalSeed::make(SeedKind kind, Interval d0, Interval d0p,
                                      Orientation orient) {
    FundamentalSeed s;
    s.kind_ = kind;
    s.d0_ = d0;
    s.d0p_ = d0p;
    s.orient_ = orient;
    return s;
}

FundamentalSeed seed_linear(Interval d0, Interval d0p, Orientation orient) {
    return FundamentalSeed::make(SeedKind::Affine, d0, d0p, orient);
}

double FundamentalSeed::operator()(double x) const {
    x = d0_.clamp(x);
    // endpoint-exact in both orientations
    if (x == d0_.lo) return orient_ == Orientation::Increasing ? d0p_.lo : d0p_.hi;
    if (x == d0_.hi) return orient_ == Orientation::Increasing ? d0p_.hi : d0p_.lo;
    double t = (x - d0_.lo) / d0_.length();
    if (kind_ == SeedKind::SmoothCubic) t = t * t * (3.0 - 2.0 * t);
    double y = orient_ == Orientation::Increasing ? d0p_.lo + t * d0p_.length()
                                                  : d0p_.hi - t * d0p_.length();
    return d0p_.clamp(y);
}

double FundamentalSeed::inverse(double y) const {
    y = d0p_.clamp(y);
    if (y == d0p_.lo) return orient_ == Orientation::Increasing ? d0_.lo : d0_.hi;
    if (y == d0p_.hi) return orient_ == Orientation::Increasing ? d0_.hi : d0_.lo;
    double s = (y - d0p_.lo) / d0p_.length();
    if (orient_ == Orientation::Decreasing) s = 1.0 - s;
    double t = s;
    if (kind_ == SeedKind::SmoothCubic) {
        // invert t^2 (3 - 2t) on [0,1] by bisection; it is strictly increasing
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 80; ++it) {
            double mid = 0.5 * (lo + hi);
            if (mid * mid * (3.0 - 2.0 * mid) < s)
                lo = mid;
            else
                hi = mid;
        }
        t = 0.5 * (lo + hi);
    }
    return d0_.clamp(d0_.lo + t * d0_.length());
}

// ---------------------------------------------------------------------------
// SegmentConjugacy

bool SegmentConjugacy::contains_f(double x, double tol) const {
    if (!f_segment.contains(x, tol)) return false;
    if (f_gap && x > f_gap->lo + tol && x < f_gap->hi - tol) return false;
    return true;
}

bool SegmentConjugacy::contains_g(double y, double tol) const {
    if (!g_segment.contains(y, tol)) return false;
    if (g_gap && y > g_gap->lo + tol && y < g_gap->hi - tol) return false;
    return true;
}

// ---------------------------------------------------------------------------
// ConjugacyMap evaluation

ConjugacyMap::ConjugacyMap(MonotoneMap f_user, MonotoneMap f_build, MonotoneMap g,
                           std::vector<SegmentConjugacy> segments, bool reversed,
                           double reflect_c, int max_steps, double snap_tol)
    : f_user_(std::move(f_user)),
      f_build_(std::move(f_build)),
      g_(std::move(g)),
      segments_(std::move(segments)),
      reversed_(reversed),
      reflect_c_(reflect_c),
      domain_f_(0.0, 1.0),
      domain_g_(0.0, 1.0),
      max_steps_(max_steps),
      snap_tol_(snap_tol) {
    if (segments_.empty()) throw error(errc::internal, "conjugacy with no segments");
    double flo = segments_[0].f_segment.lo, fhi = segments_[0].f_segment.hi;
    double glo = segments_[0].g_segment.lo, ghi = segments_[0].g_segment.hi;
    for (const auto& s : segments_) {
        flo = std::min(flo, s.f_segment.lo);
        fhi = std::max(fhi, s.f_segment.hi);
        glo = std::min(glo, s.g_segment.lo);
        ghi = std::max(ghi, s.g_segment.hi);
    }
    if (reversed_)
        domain_f_ = Interval(reflect_c_ - fhi, reflect_c_ - flo);
    else
        domain_f_ = Interval(flo, fhi);
    domain_g_ = Interval(glo, ghi);
}

Orientation ConjugacyMap::orientation() const {
    bool dec_seed = segments_[0].seed.orientation() == Orientation::Decreasing;
    return (reversed_ != dec_seed) ? Orientation::Decreasing : Orientation::Increasing;
}

std::vector<PinnedPair> ConjugacyMap::pins() const {
    std::vector<PinnedPair> out;
    for (const auto& seg : segments_)
        for (const auto& p : seg.pins)
            out.push_back({reversed_ ? reflect_c_ - p.x_f : p.x_f, p.x_g});
    std::sort(out.begin(), out.end(),
              [](const PinnedPair& a, const PinnedPair& b) { return a.x_f < b.x_f; });
    out.erase(std::unique(out.begin(), out.end(),
                          [](const PinnedPair& a, const PinnedPair& b) {
                              return a.x_f == b.x_f && a.x_g == b.x_g;
                          }),
              out.end());
    return out;
}

double ConjugacyMap::h(double x) const {
    if (!domain_f_.contains(x, kDomainSlack))
        throw error(errc::domain, "h: x=" + std::to_string(x) + " outside [" +
                                      std::to_string(domain_f_.lo) + ", " +
                                      std::to_string(domain_f_.hi) + "]");
    double xb = reversed_ ? reflect_c_ - domain_f_.clamp(x) : domain_f_.clamp(x);
    return eval_dir(xb, true);
}

double ConjugacyMap::h_inverse(double y) const {
    if (!domain_g_.contains(y, kDomainSlack))
        throw error(errc::domain, "h_inverse: y=" + std::to_string(y) + " outside [" +
                                      std::to_string(domain_g_.lo) + ", " +
                                      std::to_string(domain_g_.hi) + "]");
    double r = eval_dir(domain_g_.clamp(y), false);
    return reversed_ ? reflect_c_ - r : r;
}

double ConjugacyMap::eval_dir(double x, bool forward) const {
    // Pinned points map exactly, including segment boundaries.
    for (const auto& seg : segments_) {
        for (const auto& p : seg.pins) {
            double key = forward ? p.x_f : p.x_g;
            if (std::abs(x - key) <= snap_tol_) return forward ? p.x_g : p.x_f;
        }
    }
    for (const auto& seg : segments_) {
        bool inside = forward ? seg.contains_f(x, snap_tol_) : seg.contains_g(x, snap_tol_);
        if (!inside) continue;
        bool flip = seg.rule == DirectionRule::FlipTwoSided ||
                    seg.rule == DirectionRule::FlipOutside ||
                    seg.rule == DirectionRule::FlipCollapsed;
        return flip ? eval_flip_segment(seg, x, forward) : eval_segment(seg, x, forward);
    }
    throw error(errc::domain, "point " + std::to_string(x) +
                                  " not covered by the constructed conjugacy");
}

// The generic fundamental-domain walk: bring x into D0 counting steps with
// sign, apply the seed, then play the same number of steps on the other map.
// rule OneSidedBackward swaps each map with its inverse (the construction for
// repelling ends conjugates the inverses and inverts).
double ConjugacyMap::eval_segment(const SegmentConjugacy& seg, double x, bool forward) const {
    const MonotoneMap& src = forward ? f_build_ : g_;
    const MonotoneMap& dst = forward ? g_ : f_build_;
    const bool bwd = seg.rule == DirectionRule::OneSidedBackward;
    const Interval d0 = forward ? seg.seed.domain() : seg.seed.image();
    const Interval hull = forward ? seg.f_segment : seg.g_segment;
    const int dir = forward ? seg.chain_dir_f : seg.chain_dir_g;

    auto step_fwd = [&](double v) { return bwd ? src.inverse(v) : src(v); };
    auto step_bwd = [&](double v) { return bwd ? src(v) : src.inverse(v); };

    auto saturate = [&](bool pull) -> double {
        double end = (pull == (dir > 0)) ? hull.hi : hull.lo;
        const PinnedPair* best = nullptr;
        for (const auto& p : seg.pins) {
            double key = forward ? p.x_f : p.x_g;
            if (!best || std::abs(key - end) <
                             std::abs((forward ? best->x_f : best->x_g) - end))
                best = &p;
        }
        if (!best) throw error(errc::internal, "iteration cap hit in a segment with no pins");
        return forward ? best->x_g : best->x_f;
    };

    double z = hull.clamp(x);
    long n = 0;
    for (;;) {
        if (z >= d0.lo - snap_tol_ && z <= d0.hi + snap_tol_) {
            z = d0.clamp(z);
            break;
        }
        bool pull = dir > 0 ? (z > d0.hi) : (z < d0.lo);
        z = pull ? step_bwd(z) : step_fwd(z);
        n += pull ? +1 : -1;
        if (std::labs(n) >= max_steps_) return saturate(pull);
    }

    double y = forward ? seg.seed(z) : seg.seed.inverse(z);

    auto play_fwd = [&](double v) { return bwd ? dst.inverse(v) : dst(v); };
    auto play_bwd = [&](double v) { return bwd ? dst(v) : dst.inverse(v); };
    for (; n > 0; --n) y = play_fwd(y);
    for (; n < 0; ++n) y = play_bwd(y);
    return y;
}

// Flip variant: decreasing maps swap the two branches around the fixed point,
// so the walk runs on the second iterate. A point on the non-anchor branch
// first hops across with one inverse step (parity 1); the step count played
// on the other map is then 2*n2 + parity, matching the odd/even domain chains
// of the construction.
double ConjugacyMap::eval_flip_segment(const SegmentConjugacy& seg, double x,
                                       bool forward) const {
    const MonotoneMap& src = forward ? f_build_ : g_;
    const MonotoneMap& dst = forward ? g_ : f_build_;
    const bool inv = seg.inverted_maps;
    const Interval d0 = forward ? seg.seed.domain() : seg.seed.image();
    const int dir = forward ? seg.chain_dir_f : seg.chain_dir_g;
    const double center = forward ? seg.f_center : seg.g_center;

    auto s_fwd = [&](double v) { return inv ? src.inverse(v) : src(v); };
    auto s_bwd = [&](double v) { return inv ? src(v) : src.inverse(v); };

    auto pin_at = [&](double key_location) -> double {
        const PinnedPair* best = nullptr;
        for (const auto& p : seg.pins) {
            double key = forward ? p.x_f : p.x_g;
            if (!best ||
                std::abs(key - key_location) <
                    std::abs((forward ? best->x_f : best->x_g) - key_location))
                best = &p;
        }
        if (!best) throw error(errc::internal, "flip segment without pins");
        return forward ? best->x_g : best->x_f;
    };

    const Interval hull = forward ? seg.f_segment : seg.g_segment;
    const std::optional<Interval>& gap = forward ? seg.f_gap : seg.g_gap;

    int parity = 0;
    double z = hull.clamp(x);
    if (z < center) {
        z = s_bwd(z);
        parity = 1;
    }
    double orbit_right, orbit_left;
    if (seg.rule == DirectionRule::FlipTwoSided) {
        orbit_right = hull.hi;
        orbit_left = hull.lo;
    } else if (gap) {
        orbit_right = gap->hi;
        orbit_left = gap->lo;
    } else {
        orbit_right = orbit_left = center;
    }

    long n2 = 0;
    for (;;) {
        if (z >= d0.lo - snap_tol_ && z <= d0.hi + snap_tol_) {
            z = d0.clamp(z);
            break;
        }
        bool pull = dir > 0 ? (z > d0.hi) : (z < d0.lo);
        z = pull ? s_bwd(s_bwd(z)) : s_fwd(s_fwd(z));
        n2 += pull ? +1 : -1;
        if (std::labs(n2) >= max_steps_) {
            if (pull) return pin_at(parity ? orbit_left : orbit_right);
            return pin_at(center);
        }
    }

    double y = forward ? seg.seed(z) : seg.seed.inverse(z);

    long k = 2 * n2 + parity;
    auto p_fwd = [&](double v) { return inv ? dst.inverse(v) : dst(v); };
    auto p_bwd = [&](double v) { return inv ? dst(v) : dst.inverse(v); };
    for (; k > 0; --k) y = p_fwd(y);
    for (; k < 0; ++k) y = p_bwd(y);
    return y;
}

// ---------------------------------------------------------------------------
// Builders

namespace {

SegmentConjugacy make_one_sided(const MonotoneMap& f, const MonotoneMap& g, Interval fseg,
                                Interval gseg, Side side, Anchor anchor, SeedKind kind) {
    const bool fixed_at_hi = side == Side::LeftOfFixed;
    double fixed_f = fixed_at_hi ? fseg.hi : fseg.lo;
    double fixed_g = fixed_at_hi ? gseg.hi : gseg.lo;
    require_fixed(f, fixed_f, "one-sided f");
    require_fixed(g, fixed_g, "one-sided g");

    if (!fseg.contains(anchor.a, kDomainSlack) || std::abs(anchor.a - fixed_f) < fixed_end_tol(fseg))
        throw error(errc::domain, "one-sided anchor a must lie in the free part of the segment");
    if (!gseg.contains(anchor.b, kDomainSlack) || std::abs(anchor.b - fixed_g) < fixed_end_tol(gseg))
        throw error(errc::domain, "one-sided anchor b must lie in the free part of the segment");

    Interval fcover(std::min(anchor.a, fixed_f), std::max(anchor.a, fixed_f));
    Interval gcover(std::min(anchor.b, fixed_g), std::max(anchor.b, fixed_g));
    int sf = segment_sign(f, fcover, "one-sided f");
    int sg = segment_sign(g, gcover, "one-sided g");
    if (sf != sg)
        throw error(errc::structure,
                    "one-sided: signs of f(x)-x and g(x)-x differ; not conjugable by this "
                    "construction");

    // Orbits head toward the fixed end exactly when the sign points at it.
    bool attracting = fixed_at_hi ? sf > 0 : sf < 0;

    double fa = attracting ? f(anchor.a) : f.inverse(anchor.a);
    double gb = attracting ? g(anchor.b) : g.inverse(anchor.b);

    SegmentConjugacy seg;
    seg.rule = attracting ? DirectionRule::OneSidedForward : DirectionRule::OneSidedBackward;
    seg.f_segment = fcover;
    seg.g_segment = gcover;
    seg.seed = FundamentalSeed::make(kind, Interval(std::min(anchor.a, fa), std::max(anchor.a, fa)),
                                     Interval(std::min(anchor.b, gb), std::max(anchor.b, gb)),
                                     Orientation::Increasing);
    seg.anchor = anchor;
    seg.chain_dir_f = fixed_at_hi ? +1 : -1;
    seg.chain_dir_g = seg.chain_dir_f;
    seg.pins = {{fixed_f, fixed_g}};
    return seg;
}

SegmentConjugacy make_between(const MonotoneMap& f, const MonotoneMap& g, Interval jseg,
                              Interval iseg, Anchor anchor, SeedKind kind) {
    require_fixed(f, jseg.lo, "between f left");
    require_fixed(f, jseg.hi, "between f right");
    require_fixed(g, iseg.lo, "between g left");
    require_fixed(g, iseg.hi, "between g right");

    if (!(anchor.a > jseg.lo && anchor.a < jseg.hi))
        throw error(errc::domain, "between: anchor a must be strictly interior");
    if (!(anchor.b > iseg.lo && anchor.b < iseg.hi))
        throw error(errc::domain, "between: anchor b must be strictly interior");

    int sf = segment_sign(f, jseg, "between f");
    int sg = segment_sign(g, iseg, "between g");

    double fa = f(anchor.a);
    double gb = g(anchor.b);

    SegmentConjugacy seg;
    seg.rule = DirectionRule::TwoSided;
    seg.f_segment = jseg;
    seg.g_segment = iseg;
    seg.anchor = anchor;
    seg.chain_dir_f = sf;
    seg.chain_dir_g = sg;
    Interval d0(std::min(anchor.a, fa), std::max(anchor.a, fa));
    Interval d0p(std::min(anchor.b, gb), std::max(anchor.b, gb));
    if (sf == sg) {
        seg.seed = FundamentalSeed::make(kind, d0, d0p, Orientation::Increasing);
        seg.pins = {{jseg.lo, iseg.lo}, {jseg.hi, iseg.hi}};
    } else {
        // Opposite signs: the conjugacy reverses orientation on this segment
        // and is seeded by a decreasing h0.
        seg.seed = FundamentalSeed::make(kind, d0, d0p, Orientation::Decreasing);
        seg.pins = {{jseg.lo, iseg.hi}, {jseg.hi, iseg.lo}};
    }
    return seg;
}

bool signatures_match(const StabilitySignature& a, const StabilitySignature& b) {
    return a == b;
}

std::string describe_entry(const SignatureEntry& e) {
    auto one = [](const std::optional<SideBehavior>& s) {
        return s ? std::string(to_string(*s)) : std::string("absent");
    };
    return "(" + one(e.left) + "/" + one(e.right) + ")";
}

std::string mismatch_diagnostic(const StabilitySignature& sf, const StabilitySignature& sg) {
    if (sf.count() != sg.count())
        return "signature mismatch: f has " + std::to_string(sf.count()) +
               " fixed points, g has " + std::to_string(sg.count()) +
               " (direct and reversed orders both fail)";
    for (std::size_t i = 0; i < sf.count(); ++i)
        if (!(sf.entries[i] == sg.entries[i]))
            return "signature mismatch at entry " + std::to_string(i) + ": f " +
                   describe_entry(sf.entries[i]) + " vs g " + describe_entry(sg.entries[i]) +
                   " (direct and reversed orders both fail)";
    return "signature mismatch in the exterior segment signs (direct and reversed orders both "
           "fail)";
}

// Conjugacy of two fixed-point-free maps: only finitely many fundamental
// domains fit in a compact window, so both sides are trimmed to the number of
// chain steps they can support from anchors at the upstream window ends.
SegmentConjugacy make_free_segment(const MonotoneMap& f, const MonotoneMap& g, int s,
                                   SeedKind kind, std::optional<Anchor> anchor_override,
                                   Interval* f_trim, Interval* g_trim) {
    double a = s > 0 ? f.domain().lo : f.domain().hi;
    double b = s > 0 ? g.domain().lo : g.domain().hi;
    if (anchor_override) {
        a = anchor_override->a;
        b = anchor_override->b;
    }

    auto forward_steps = [](const MonotoneMap& m, double start) {
        int k = 0;
        double z = start;
        while (k < 100000) {
            double z2 = m.eval_unchecked(z);
            if (!m.domain().contains(z2, kDomainSlack)) break;
            z = z2;
            ++k;
        }
        return k;
    };

    int steps = std::min(forward_steps(f, a), forward_steps(g, b));
    if (steps < 1)
        throw error(errc::structure,
                    "zero-fixed-point conjugacy: window too small to hold one fundamental domain");
    double f_end = f.iterate(a, steps);
    double g_end = g.iterate(b, steps);

    *f_trim = Interval(std::min(a, f_end), std::max(a, f_end));
    *g_trim = Interval(std::min(b, g_end), std::max(b, g_end));

    double fa = f(a);
    double gb = g(b);
    SegmentConjugacy seg;
    seg.rule = DirectionRule::TwoSided;
    seg.f_segment = *f_trim;
    seg.g_segment = *g_trim;
    seg.anchor = {a, b};
    seg.chain_dir_f = s;
    seg.chain_dir_g = s;
    seg.seed = FundamentalSeed::make(kind, Interval(std::min(a, fa), std::max(a, fa)),
                                     Interval(std::min(b, gb), std::max(b, gb)),
                                     Orientation::Increasing);
    return seg;
}

}  // namespace

SegmentConjugacy build_one_sided(const MonotoneMap& f, const MonotoneMap& g, Side side,
                                 Anchor anchor, SeedKind kind) {
    if (f.orientation() != Orientation::Increasing || g.orientation() != Orientation::Increasing)
        throw error(errc::domain, "build_one_sided requires increasing maps");
    return make_one_sided(f, g, f.domain(), g.domain(), side, anchor, kind);
}

SegmentConjugacy build_between(const MonotoneMap& f, const MonotoneMap& g, Interval jseg,
                               Interval iseg, Anchor anchor, SeedKind kind) {
    if (f.orientation() != Orientation::Increasing || g.orientation() != Orientation::Increasing)
        throw error(errc::domain, "build_between requires increasing maps");
    return make_between(f, g, jseg, iseg, anchor, kind);
}

ConjugacyMap assemble(const MonotoneMap& f, const MonotoneMap& g,
                      std::vector<SegmentConjugacy> segments) {
    return ConjugacyMap(f, f, g, std::move(segments), false, 0.0);
}

ConjugacyMap build_full(const MonotoneMap& f, const MonotoneMap& g, SeedKind kind,
                        std::optional<Anchor> anchor_override) {
    if (f.orientation() != Orientation::Increasing || g.orientation() != Orientation::Increasing)
        throw error(errc::domain, "build_full requires increasing maps (see build_flip)");

    StabilitySignature sig_f = signature(f);
    StabilitySignature sig_g = signature(g);

    MonotoneMap fb = f;
    bool reverse = false;
    if (!signatures_match(sig_f, sig_g)) {
        if (signatures_match(reversed(sig_f), sig_g)) {
            fb = f.reflected();
            reverse = true;
        } else {
            throw error(errc::structure, mismatch_diagnostic(sig_f, sig_g));
        }
    }
    const double reflect_c = f.domain().lo + f.domain().hi;

    std::vector<FixedPoint> fps_f = find_fixed_points(fb);
    std::vector<FixedPoint> fps_g = find_fixed_points(g);
    if (fps_f.size() != fps_g.size())
        throw error(errc::internal, "signatures matched but fixed-point counts differ");

    std::vector<SegmentConjugacy> segments;

    if (fps_f.empty()) {
        StabilitySignature sb = signature(fb);
        int s = sb.left_outer_sign.value_or(0);
        Interval f_trim(0.0, 1.0), g_trim(0.0, 1.0);
        segments.push_back(make_free_segment(fb, g, s, kind, anchor_override, &f_trim, &g_trim));
        MonotoneMap fb_r = fb.restricted(f_trim);
        MonotoneMap g_r = g.restricted(g_trim);
        return ConjugacyMap(f, fb_r, g_r, std::move(segments), reverse, reflect_c);
    }

    const double edge = 1e-9;
    bool f_left = fps_f.front().location - fb.domain().lo > edge;
    bool g_left = fps_g.front().location - g.domain().lo > edge;
    bool f_right = fb.domain().hi - fps_f.back().location > edge;
    bool g_right = g.domain().hi - fps_g.back().location > edge;
    if (f_left != g_left || f_right != g_right)
        throw error(errc::structure,
                    "signature mismatch: fixed points sit on domain endpoints for one map only");

    if (f_left)
        segments.push_back(make_one_sided(
            fb, g, Interval(fb.domain().lo, fps_f.front().location),
            Interval(g.domain().lo, fps_g.front().location), Side::LeftOfFixed,
            Anchor{fb.domain().lo, g.domain().lo}, kind));

    for (std::size_t i = 0; i + 1 < fps_f.size(); ++i) {
        Interval jseg(fps_f[i].location, fps_f[i + 1].location);
        Interval iseg(fps_g[i].location, fps_g[i + 1].location);
        segments.push_back(make_between(fb, g, jseg, iseg, Anchor{jseg.mid(), iseg.mid()}, kind));
    }

    if (f_right)
        segments.push_back(make_one_sided(
            fb, g, Interval(fps_f.back().location, fb.domain().hi),
            Interval(fps_g.back().location, g.domain().hi), Side::RightOfFixed,
            Anchor{fb.domain().hi, g.domain().hi}, kind));

    if (anchor_override) {
        if (segments.size() != 1)
            throw error(errc::domain,
                        "explicit anchors apply only to single-segment constructions");
        const SegmentConjugacy& old = segments[0];
        if (old.rule == DirectionRule::TwoSided)
            segments[0] = make_between(fb, g, old.f_segment, old.g_segment, *anchor_override, kind);
        else
            segments[0] = make_one_sided(fb, g, old.f_segment, old.g_segment,
                                         old.chain_dir_f > 0 ? Side::LeftOfFixed
                                                             : Side::RightOfFixed,
                                         *anchor_override, kind);
    }

    return ConjugacyMap(f, fb, g, std::move(segments), reverse, reflect_c);
}

// ---------------------------------------------------------------------------
// Flip builders

namespace {

struct FlipInventory {
    double fixed = 0.0;
    SideBehavior fixed_stab = SideBehavior::Attracting;
    std::vector<PeriodTwoOrbit> orbits;
};

FlipInventory flip_inventory(const MonotoneMap& m, const char* who) {
    std::vector<FixedPoint> fps = find_fixed_points(m);
    if (fps.size() != 1)
        throw error(errc::structure, std::string(who) + ": flip construction needs exactly one "
                                                        "fixed point, found " +
                                         std::to_string(fps.size()));
    FlipInventory inv;
    inv.fixed = fps[0].location;
    inv.fixed_stab = fps[0].left ? *fps[0].left : *fps[0].right;
    inv.orbits = find_period2(m);
    if (inv.orbits.size() > 1)
        throw error(errc::structure, std::string(who) +
                                         ": more than one period-2 orbit is out of scope");
    return inv;
}

// Effective one-step maps; the repelling-orbit / repelling-fixed cases run the
// whole construction on the inverses and the same h conjugates the originals.
double step(const MonotoneMap& m, bool inv, double x) { return inv ? m.inverse(x) : m(x); }
double step_back(const MonotoneMap& m, bool inv, double x) { return inv ? m(x) : m.inverse(x); }

void check_f2_side(const MonotoneMap& m, bool inv, Interval open_seg, int want_sign,
                   const char* who) {
    const int kProbes = 33;
    double stepw = open_seg.length() / (kProbes + 1);
    for (int i = 1; i <= kProbes; ++i) {
        double x = open_seg.lo + stepw * i;
        double f2 = step(m, inv, step(m, inv, x));
        if (sgn(f2 - x) != want_sign && std::abs(f2 - x) > 1e-12)
            throw error(errc::structure,
                        std::string(who) + ": second-iterate hypothesis fails at x=" +
                            std::to_string(x));
    }
}

// Trim the working window so one effective step from the outer anchor stays
// inside: a* = min(hi, F^-1(lo)) in effective-map terms.
double outer_anchor(const MonotoneMap& m, bool inv, const Interval& w) {
    double f_hi = step(m, inv, w.hi);
    if (f_hi >= w.lo - kDomainSlack) return w.hi;
    return step_back(m, inv, w.lo);
}

}  // namespace

ConjugacyMap build_flip(const MonotoneMap& f, const MonotoneMap& g, SeedKind kind) {
    if (f.orientation() != Orientation::Decreasing || g.orientation() != Orientation::Decreasing)
        throw error(errc::domain, "build_flip requires decreasing maps");

    FlipInventory inv_f = flip_inventory(f, "f");
    FlipInventory inv_g = flip_inventory(g, "g");

    if (inv_f.orbits.size() != inv_g.orbits.size())
        throw error(errc::structure,
                    "inventory mismatch: period-2 orbit present in one map only");
    if (inv_f.fixed_stab != inv_g.fixed_stab)
        throw error(errc::structure, "inventory mismatch: fixed-point stabilities differ");
    if (!inv_f.orbits.empty() && inv_f.orbits[0].stability != inv_g.orbits[0].stability)
        throw error(errc::structure, "inventory mismatch: period-2 stabilities differ");

    const bool has_orbit = !inv_f.orbits.empty();
    bool inverted;
    if (has_orbit) {
        if (inv_f.orbits[0].stability == inv_f.fixed_stab)
            throw error(errc::structure,
                        "inconsistent inventory: orbit and fixed point share stability");
        inverted = inv_f.orbits[0].stability == SideBehavior::Repelling;
    } else {
        inverted = inv_f.fixed_stab == SideBehavior::Repelling;
    }

    // Inverted constructions evaluate f^-1 everywhere, which needs the window
    // inside the image; clip to the invertible core first.
    Interval wf = f.domain(), wg = g.domain();
    if (inverted) {
        wf = Interval(std::max(wf.lo, f.image().lo), std::min(wf.hi, f.image().hi));
        wg = Interval(std::max(wg.lo, g.image().lo), std::min(wg.hi, g.image().hi));
    }

    std::vector<SegmentConjugacy> segments;
    double f_lo_cov, f_hi_cov, g_lo_cov, g_hi_cov;

    if (has_orbit) {
        const PeriodTwoOrbit& of = inv_f.orbits[0];
        const PeriodTwoOrbit& og = inv_g.orbits[0];
        double xfl = of.x_left, xfr = of.x_right, xf0 = inv_f.fixed;
        double xgl = og.x_left, xgr = og.x_right, xg0 = inv_g.fixed;
        if (!(xfl < xf0 && xf0 < xfr) || !(xgl < xg0 && xg0 < xgr))
            throw error(errc::structure, "fixed point does not sit between the orbit points");

        check_f2_side(f, inverted, Interval(xf0, xfr), +1, "flip inside f");
        check_f2_side(g, inverted, Interval(xg0, xgr), +1, "flip inside g");

        // inside: chains of the second iterate between the orbit points
        double a_in = 0.5 * (xf0 + xfr);
        double b_in = 0.5 * (xg0 + xgr);
        double f2a = step(f, inverted, step(f, inverted, a_in));
        double g2b = step(g, inverted, step(g, inverted, b_in));
        if (!(f2a > a_in) || !(g2b > b_in))
            throw error(errc::structure, "flip inside: second iterate does not advance the anchor");

        SegmentConjugacy in;
        in.rule = DirectionRule::FlipTwoSided;
        in.f_segment = Interval(xfl, xfr);
        in.g_segment = Interval(xgl, xgr);
        in.anchor = {a_in, b_in};
        in.chain_dir_f = +1;
        in.chain_dir_g = +1;
        in.inverted_maps = inverted;
        in.f_center = xf0;
        in.g_center = xg0;
        in.seed = FundamentalSeed::make(kind, Interval(a_in, f2a), Interval(b_in, g2b),
                                        Orientation::Increasing);
        in.pins = {{xfl, xgl}, {xf0, xg0}, {xfr, xgr}};
        segments.push_back(in);

        f_lo_cov = xfl;
        f_hi_cov = xfr;
        g_lo_cov = xgl;
        g_hi_cov = xgr;

        // outside: one-sided second-iterate chains from the trimmed window edge
        double a_out = outer_anchor(f, inverted, wf);
        double b_out = outer_anchor(g, inverted, wg);
        double margin_f = std::max(1e-7 * wf.length(), 16 * ConjugacyMap::kDefaultSnapTol);
        double margin_g = std::max(1e-7 * wg.length(), 16 * ConjugacyMap::kDefaultSnapTol);
        if (a_out > xfr + margin_f && b_out > xgr + margin_g) {
            check_f2_side(f, inverted, Interval(xfr, a_out), -1, "flip outside f");
            check_f2_side(g, inverted, Interval(xgr, b_out), -1, "flip outside g");
            double f2o = step(f, inverted, step(f, inverted, a_out));
            double g2o = step(g, inverted, step(g, inverted, b_out));

            SegmentConjugacy out;
            out.rule = DirectionRule::FlipOutside;
            double f_low = step(f, inverted, a_out);
            double g_low = step(g, inverted, b_out);
            out.f_segment = Interval(f_low, a_out);
            out.g_segment = Interval(g_low, b_out);
            out.f_gap = Interval(xfl, xfr);
            out.g_gap = Interval(xgl, xgr);
            out.anchor = {a_out, b_out};
            out.chain_dir_f = -1;
            out.chain_dir_g = -1;
            out.inverted_maps = inverted;
            out.f_center = xf0;
            out.g_center = xg0;
            out.seed = FundamentalSeed::make(kind, Interval(f2o, a_out), Interval(g2o, b_out),
                                             Orientation::Increasing);
            out.pins = {{xfl, xgl}, {xfr, xgr}};
            segments.push_back(out);

            f_lo_cov = f_low;
            f_hi_cov = a_out;
            g_lo_cov = g_low;
            g_hi_cov = b_out;
        }
    } else {
        double xf0 = inv_f.fixed, xg0 = inv_g.fixed;
        double a_out = outer_anchor(f, inverted, wf);
        double b_out = outer_anchor(g, inverted, wg);
        double margin_f = std::max(1e-7 * wf.length(), 16 * ConjugacyMap::kDefaultSnapTol);
        double margin_g = std::max(1e-7 * wg.length(), 16 * ConjugacyMap::kDefaultSnapTol);
        if (!(a_out > xf0 + margin_f) || !(b_out > xg0 + margin_g))
            throw error(errc::structure, "flip: window leaves no room beside the fixed point");
        check_f2_side(f, inverted, Interval(xf0, a_out), -1, "flip f");
        check_f2_side(g, inverted, Interval(xg0, b_out), -1, "flip g");
        double f2o = step(f, inverted, step(f, inverted, a_out));
        double g2o = step(g, inverted, step(g, inverted, b_out));

        SegmentConjugacy seg;
        seg.rule = DirectionRule::FlipCollapsed;
        double f_low = step(f, inverted, a_out);
        double g_low = step(g, inverted, b_out);
        seg.f_segment = Interval(f_low, a_out);
        seg.g_segment = Interval(g_low, b_out);
        seg.anchor = {a_out, b_out};
        seg.chain_dir_f = -1;
        seg.chain_dir_g = -1;
        seg.inverted_maps = inverted;
        seg.f_center = xf0;
        seg.g_center = xg0;
        seg.seed = FundamentalSeed::make(kind, Interval(f2o, a_out), Interval(g2o, b_out),
                                         Orientation::Increasing);
        seg.pins = {{xf0, xg0}};
        segments.push_back(seg);

        f_lo_cov = f_low;
        f_hi_cov = a_out;
        g_lo_cov = g_low;
        g_hi_cov = b_out;
    }

    MonotoneMap f_r = f.restricted(Interval(f_lo_cov, f_hi_cov));
    MonotoneMap g_r = g.restricted(Interval(g_lo_cov, g_hi_cov));
    return ConjugacyMap(f_r, f_r, g_r, std::move(segments), false, 0.0);
}

// ---------------------------------------------------------------------------
// Exports

std::string sampled_h_csv(const ConjugacyMap& c, int samples) {
    if (samples < 2) throw error(errc::domain, "sampled_h_csv needs at least 2 samples");
    std::string out = "x,h\n";
    std::vector<double> xs = linspace(c.domain_f(), samples);
    for (double x : xs) {
        out += fmt17(x);
        out += ',';
        out += fmt17(c.h(x));
        out += '\n';
    }
    return out;
}

nlohmann::json build_metadata(const ConjugacyMap& c) {
    nlohmann::json j;
    j["f"] = c.f().label();
    j["g"] = c.g().label();
    j["segments"] = c.segments().size();
    j["reversed"] = c.reversed();
    j["anchors"] = nlohmann::json::array();
    for (const auto& seg : c.segments()) {
        double a = c.reversed() ? c.reflect_c() - seg.anchor.a : seg.anchor.a;
        j["anchors"].push_back({{"a", a}, {"b", seg.anchor.b}});
    }
    j["max_steps"] = c.max_steps();
    j["snap_tol"] = c.snap_tol();
    return j;
}

}  // namespace conj1d
