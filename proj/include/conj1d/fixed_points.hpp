#pragma once

#include <optional>
#include <vector>

#include "conj1d/monotone_map.hpp"

#include "json.hpp"

namespace conj1d {

enum class SideBehavior { Attracting, Repelling };
enum class PointKind { Transverse, Mixed };

/// A located fixed point with its one-sided behaviors. A side is absent when
/// the point sits on the corresponding domain endpoint.
struct FixedPoint {
    double location = 0.0;
    std::optional<SideBehavior> left;
    std::optional<SideBehavior> right;
    PointKind kind = PointKind::Transverse;
};

struct SignatureEntry {
    std::optional<SideBehavior> left;
    std::optional<SideBehavior> right;
    bool operator==(const SignatureEntry&) const = default;
};

/// Ordered left-to-right behavior list of all fixed points, plus the sign of
/// f(x)-x on the exterior segments when those are nonempty. For maps with no
/// fixed points both outer fields hold the global sign.
struct StabilitySignature {
    std::vector<SignatureEntry> entries;
    std::optional<int> left_outer_sign;
    std::optional<int> right_outer_sign;

    std::size_t count() const { return entries.size(); }
    bool operator==(const StabilitySignature&) const = default;
};

/// The mirror-image signature: order reversed, sides swapped, outer signs
/// negated and swapped.
StabilitySignature reversed(const StabilitySignature& sig);

struct PeriodTwoOrbit {
    double x_left = 0.0;
    double x_right = 0.0;
    SideBehavior stability = SideBehavior::Attracting;
};

struct DetectOptions {
    int grid_n = 4096;
    double root_tol = 1e-12;
    double touch_tol = 1e-7;  // |f(x)-x| threshold for tangential touch candidates
};

/// All fixed points on m's domain: sign changes of d(x) = f(x)-x refined by
/// bisection, plus tangential touches (grid-local |d| minima below touch_tol
/// with no sign change) refined by ternary search. Sorted, deduplicated at
/// spacing <= 2*root_tol, classified. Grid detection is a necessary-condition
/// scan; roots closer than the grid pitch can be missed or reported as a
/// grid-too-coarse error.
std::vector<FixedPoint> find_fixed_points(const MonotoneMap& m, const DetectOptions& opt = {});

/// One-sided classification at a known fixed point. Increasing maps read the
/// sign of f(x)-x at x_star -+ probe/2; decreasing maps classify through the
/// second iterate (their fixed points are always attracting or repelling).
FixedPoint classify_fixed_point(const MonotoneMap& m, double x_star, double probe);

/// Signature of an increasing map with module-default detection options.
StabilitySignature signature(const MonotoneMap& m, const DetectOptions& opt = {});

/// Period-2 orbits of a decreasing map: fixed points of f^2 on the largest
/// sub-interval where f^2 is defined, minus the fixed points of f, paired via
/// x -> f(x). An f^2-fixed candidate whose partner is missing is an error,
/// not silently dropped.
std::vector<PeriodTwoOrbit> find_period2(const MonotoneMap& m, const DetectOptions& opt = {});

const char* to_string(SideBehavior b);
const char* to_string(PointKind k);

nlohmann::json to_json(const FixedPoint& fp);
nlohmann::json to_json(const PeriodTwoOrbit& orbit);

/// {map, domain, fixed_points: [{x, left, right, kind}], period2: [{xl, xr, stability}]}
nlohmann::json fixed_point_report(const MonotoneMap& m, const std::vector<FixedPoint>& fps,
                                  const std::vector<PeriodTwoOrbit>& orbits);

}  // namespace conj1d
