#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "conj1d/expr.hpp"
#include "conj1d/interval.hpp"

namespace conj1d {

enum class Orientation { Increasing, Decreasing };

inline constexpr double kDomainSlack = 1e-12;     // absolute slack for membership checks
inline constexpr double kDefaultInverseTol = 1e-13;
inline constexpr int kMonotoneGridN = 1024;

/// Samples grid_n+1 equally spaced points and requires strict monotonicity on
/// every consecutive pair. A necessary condition only, not a proof; ties and
/// non-finite values are reported as non-monotone.
Orientation check_monotone(const MapExpr& expr, const Interval& domain, int grid_n,
                           double mu = 0.0);
Orientation check_monotone(const std::function<double(double)>& fn, const Interval& domain,
                           int grid_n);

/// A continuous strictly monotone map on a closed interval. Forward evaluation
/// comes from the expression (or a black-box callable); the inverse is always
/// numerical bisection, which only needs continuity plus monotonicity.
/// Immutable after construction; all operations are const and re-entrant.
class MonotoneMap {
  public:
    MonotoneMap(MapExpr expr, Interval domain, std::optional<double> mu = std::nullopt,
                double inverse_tol = kDefaultInverseTol, int grid_n = kMonotoneGridN);
    MonotoneMap(std::function<double(double)> fn, Interval domain, std::string label,
                double inverse_tol = kDefaultInverseTol, int grid_n = kMonotoneGridN);

    /// Forward evaluation; x must lie in the domain within kDomainSlack (clamped).
    double operator()(double x) const;

    /// Forward evaluation without the domain check.
    double eval_unchecked(double x) const;

    /// Bisection solve of f(x) = y for y in the image (within slack, clamped).
    double inverse(double y) const;

    /// n >= 0 applies the map n times, n < 0 applies the inverse |n| times;
    /// reports the step index if an intermediate iterate escapes.
    double iterate(double x, long n) const;

    const Interval& domain() const;
    const Interval& image() const;
    Orientation orientation() const;
    double inverse_tol() const;
    const std::string& label() const;

    bool expression_backed() const;
    const MapExpr* expr() const;              // nullptr for callable-backed maps
    std::optional<double> mu() const;

    /// Batch forward evaluation (SIMD kernels when expression-backed).
    void eval_many(std::span<const double> xs, std::span<double> out) const;

    /// Same map on a sub-interval of the domain.
    MonotoneMap restricted(Interval sub) const;

    /// The inverse as a map in its own right: domain = image(), roles swapped.
    MonotoneMap inverse_view() const;

    /// Conjugation by the reflection r(x) = lo + hi - x over this map's domain;
    /// the result is again monotone in the same orientation.
    MonotoneMap reflected() const;

  private:
    struct Impl;
    MonotoneMap(std::shared_ptr<const Impl> impl);
    std::shared_ptr<const Impl> impl_;
};

}  // namespace conj1d
