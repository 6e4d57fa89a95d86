#pragma once

#include <optional>
#include <string>
#include <vector>

#include "conj1d/fixed_points.hpp"
#include "conj1d/monotone_map.hpp"

#include "json.hpp"

namespace conj1d {

/// Matched pair of points with h(a) = b fixed by construction.
struct Anchor {
    double a = 0.0;
    double b = 0.0;
};

/// A fixed (or periodic) point of f paired with its image fixed point of g;
/// h returns x_g exactly when evaluated within snap_tol of x_f.
struct PinnedPair {
    double x_f = 0.0;
    double x_g = 0.0;
};

enum class SeedKind { Affine, SmoothCubic };

/// The seed homeomorphism h0 on a fundamental domain D0, mapping onto D0'.
/// Affine is the default; SmoothCubic is an alternative monotone interpolant
/// through the same endpoints (the construction does not depend on the choice).
class FundamentalSeed {
  public:
    FundamentalSeed() = default;
    static FundamentalSeed make(SeedKind kind, Interval d0, Interval d0p, Orientation orient);

    double operator()(double x) const;
    double inverse(double y) const;

    const Interval& domain() const { return d0_; }
    const Interval& image() const { return d0p_; }
    Orientation orientation() const { return orient_; }

  private:
    SeedKind kind_ = SeedKind::Affine;
    Interval d0_{0.0, 1.0};
    Interval d0p_{0.0, 1.0};
    Orientation orient_ = Orientation::Increasing;
};

enum class DirectionRule {
    OneSidedForward,   // chains of f toward an attracting fixed end
    OneSidedBackward,  // chains of f^-1 toward a repelling fixed end
    TwoSided,          // between consecutive fixed points, both chain directions
    FlipTwoSided,      // decreasing maps, between the period-2 points (chains of f^2)
    FlipOutside,       // decreasing maps, outside the period-2 points
    FlipCollapsed,     // decreasing maps, single fixed point, no orbit
};

/// One self-contained piece of the conjugacy: the fundamental-domain seed plus
/// everything needed to walk x into D0 and back out on the g side.
struct SegmentConjugacy {
    DirectionRule rule = DirectionRule::TwoSided;
    Interval f_segment{0.0, 1.0};
    Interval g_segment{0.0, 1.0};
    // Flip outside regions are a union of two intervals; the gap between them
    // belongs to the inside segment.
    std::optional<Interval> f_gap;
    std::optional<Interval> g_gap;
    FundamentalSeed seed;
    Anchor anchor;
    int chain_dir_f = +1;  // direction fundamental domains advance on the f side
    int chain_dir_g = +1;
    bool inverted_maps = false;        // flip repelling-orbit case: operate on f^-1, g^-1
    double f_center = 0.0;             // flip rules: the fixed point separating the two branches
    double g_center = 0.0;
    std::vector<PinnedPair> pins;

    bool contains_f(double x, double tol) const;
    bool contains_g(double y, double tol) const;
};

/// The constructed conjugating homeomorphism h with g(h(x)) = h(f(x)).
/// Immutable; h and h_inverse are pure and safe to call concurrently.
class ConjugacyMap {
  public:
    ConjugacyMap(MonotoneMap f_user, MonotoneMap f_build, MonotoneMap g,
                 std::vector<SegmentConjugacy> segments, bool reversed, double reflect_c,
                 int max_steps = kDefaultMaxSteps, double snap_tol = kDefaultSnapTol);

    double h(double x) const;
    double h_inverse(double y) const;

    const MonotoneMap& f() const { return f_user_; }
    const MonotoneMap& g() const { return g_; }
    const MonotoneMap& f_build() const { return f_build_; }

    /// Domain of h in user coordinates (may be trimmed relative to f's window).
    const Interval& domain_f() const { return domain_f_; }
    const Interval& domain_g() const { return domain_g_; }

    bool reversed() const { return reversed_; }
    double reflect_c() const { return reflect_c_; }

    /// Orientation of h itself: reversed builds and decreasing-seed segments
    /// both flip it.
    Orientation orientation() const;

    const std::vector<SegmentConjugacy>& segments() const { return segments_; }

    /// Pinned pairs in user coordinates.
    std::vector<PinnedPair> pins() const;

    int max_steps() const { return max_steps_; }
    double snap_tol() const { return snap_tol_; }

    static constexpr int kDefaultMaxSteps = 10000;
    static constexpr double kDefaultSnapTol = 1e-11;

  private:
    double eval_dir(double x, bool forward) const;
    double eval_segment(const SegmentConjugacy& seg, double x, bool forward) const;
    double eval_flip_segment(const SegmentConjugacy& seg, double x, bool forward) const;

    MonotoneMap f_user_, f_build_, g_;
    std::vector<SegmentConjugacy> segments_;
    bool reversed_ = false;
    double reflect_c_ = 0.0;
    Interval domain_f_{0.0, 1.0};
    Interval domain_g_{0.0, 1.0};
    int max_steps_ = kDefaultMaxSteps;
    double snap_tol_ = kDefaultSnapTol;
};

enum class Side { LeftOfFixed, RightOfFixed };

/// Affine seed over D0 -> D0' matching endpoints in the given orientation.
FundamentalSeed seed_linear(Interval d0, Interval d0p, Orientation orient);

/// One-sided construction: f and g each live on a segment with the single
/// fixed point at one end. Side::LeftOfFixed means the free part of the
/// segment is left of the fixed point (fixed point at domain().hi).
/// The anchor is a point of the free part, by default the free endpoint.
SegmentConjugacy build_one_sided(const MonotoneMap& f, const MonotoneMap& g, Side side,
                                 Anchor anchor, SeedKind kind = SeedKind::Affine);

/// Between-fixed-points construction: segment endpoints are consecutive fixed
/// points. Matching signs of f-x and g-x give an increasing seed extended both
/// ways; opposite signs give a decreasing seed and a decreasing segment.
SegmentConjugacy build_between(const MonotoneMap& f, const MonotoneMap& g, Interval jseg,
                               Interval iseg, Anchor anchor, SeedKind kind = SeedKind::Affine);

/// Full-domain construction for increasing maps: requires equal signatures,
/// directly or after reversal (handled by reflecting f), then stitches
/// one-sided exterior segments and between-segments with default anchors.
ConjugacyMap build_full(const MonotoneMap& f, const MonotoneMap& g,
                        SeedKind kind = SeedKind::Affine,
                        std::optional<Anchor> anchor_override = std::nullopt);

/// Flip construction for decreasing maps with one fixed point each and
/// matching period-2 inventories (none, one attracting, or one repelling).
ConjugacyMap build_flip(const MonotoneMap& f, const MonotoneMap& g,
                        SeedKind kind = SeedKind::Affine);

/// Wraps explicitly built segments (from build_one_sided / build_between).
ConjugacyMap assemble(const MonotoneMap& f, const MonotoneMap& g,
                      std::vector<SegmentConjugacy> segments);

/// CSV text "x,h" with one full-precision row per sample.
std::string sampled_h_csv(const ConjugacyMap& c, int samples);

/// {f, g, segments, reversed, anchors, max_steps, snap_tol}
nlohmann::json build_metadata(const ConjugacyMap& c);

}  // namespace conj1d
