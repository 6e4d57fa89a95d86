#pragma once

#include <vector>

#include "conj1d/error.hpp"

namespace conj1d {

/// Closed interval [lo, hi] with lo < hi. Degenerate intervals are rejected.
struct Interval {
    double lo;
    double hi;

    Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
        if (!(lo < hi))
            throw error(errc::domain, "interval requires lo < hi, got [" +
                                          std::to_string(lo_) + ", " + std::to_string(hi_) + "]");
    }

    double length() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }

    bool contains(double x, double slack = 0.0) const {
        return x >= lo - slack && x <= hi + slack;
    }

    double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
};

/// n equally spaced points covering [iv.lo, iv.hi], endpoints included. n >= 2.
std::vector<double> linspace(const Interval& iv, int n);

}  // namespace conj1d
