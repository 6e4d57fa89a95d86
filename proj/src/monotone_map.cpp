#include "conj1d/monotone_map.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "conj1d/error.hpp"
#include "conj1d/kernels.hpp"

namespace conj1d {

std::vector<double> linspace(const Interval& iv, int n) {
    if (n < 2) throw error(errc::domain, "linspace needs at least 2 points");
    std::vector<double> xs(static_cast<std::size_t>(n));
    const double step = iv.length() / (n - 1);
    for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = iv.lo + step * i;
    xs.back() = iv.hi;
    return xs;
}

namespace {

Orientation check_samples(const std::vector<double>& xs, const std::vector<double>& ys) {
    int dir = 0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        if (!std::isfinite(ys[i]) || !std::isfinite(ys[i + 1]))
            throw error(errc::domain, "non-finite value while checking monotonicity near x=" +
                                          std::to_string(xs[i]));
        double d = ys[i + 1] - ys[i];
        int s = d > 0 ? +1 : (d < 0 ? -1 : 0);
        if (s == 0)
            throw error(errc::domain, "not strictly monotone: equal values at x=" +
                                          std::to_string(xs[i]) + " and x=" +
                                          std::to_string(xs[i + 1]));
        if (dir == 0)
            dir = s;
        else if (s != dir)
            throw error(errc::domain, "not monotone: direction flips between x=" +
                                          std::to_string(xs[i]) + " and x=" +
                                          std::to_string(xs[i + 1]));
    }
    return dir >= 0 ? Orientation::Increasing : Orientation::Decreasing;
}

}  // namespace

Orientation check_monotone(const MapExpr& expr, const Interval& domain, int grid_n, double mu) {
    if (grid_n < 16) throw error(errc::domain, "check_monotone requires grid_n >= 16");
    std::vector<double> xs = linspace(domain, grid_n + 1);
    std::vector<double> ys(xs.size());
    kernels::eval_batch(expr.program(), mu, xs, ys);
    return check_samples(xs, ys);
}

Orientation check_monotone(const std::function<double(double)>& fn, const Interval& domain,
                           int grid_n) {
    if (grid_n < 16) throw error(errc::domain, "check_monotone requires grid_n >= 16");
    std::vector<double> xs = linspace(domain, grid_n + 1);
    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = fn(xs[i]);
    return check_samples(xs, ys);
}

struct MonotoneMap::Impl {
    std::optional<MapExpr> expr;
    double mu = 0.0;
    bool has_mu = false;
    std::function<double(double)> fn;      // callable backend when expr is absent
    std::function<double(double)> inv_fn;  // direct inverse, set by inverse_view
    Interval domain{0.0, 1.0};
    Interval image{0.0, 1.0};
    Orientation orient = Orientation::Increasing;
    double inverse_tol = kDefaultInverseTol;
    std::string label;

    double raw(double x) const { return expr ? expr->eval(x, mu) : fn(x); }
};

MonotoneMap::MonotoneMap(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

MonotoneMap::MonotoneMap(MapExpr expr, Interval domain, std::optional<double> mu,
                         double inverse_tol, int grid_n) {
    if (expr.uses_mu() && !mu)
        throw error(errc::domain, "expression uses mu but no parameter value was bound");
    auto impl = std::make_shared<Impl>();
    impl->mu = mu.value_or(0.0);
    impl->has_mu = mu.has_value();
    impl->orient = check_monotone(expr, domain, grid_n, impl->mu);
    impl->label = expr.str();
    impl->expr = std::move(expr);
    impl->domain = domain;
    double flo = impl->raw(domain.lo), fhi = impl->raw(domain.hi);
    impl->image = Interval(std::min(flo, fhi), std::max(flo, fhi));
    impl->inverse_tol = inverse_tol;
    impl_ = std::move(impl);
}

MonotoneMap::MonotoneMap(std::function<double(double)> fn, Interval domain, std::string label,
                         double inverse_tol, int grid_n) {
    auto impl = std::make_shared<Impl>();
    impl->orient = check_monotone(fn, domain, grid_n);
    impl->fn = std::move(fn);
    impl->domain = domain;
    impl->label = std::move(label);
    double flo = impl->raw(domain.lo), fhi = impl->raw(domain.hi);
    impl->image = Interval(std::min(flo, fhi), std::max(flo, fhi));
    impl->inverse_tol = inverse_tol;
    impl_ = std::move(impl);
}

double MonotoneMap::operator()(double x) const {
    const Interval& d = impl_->domain;
    if (!d.contains(x, kDomainSlack))
        throw error(errc::domain, "evaluate: x=" + std::to_string(x) + " outside domain [" +
                                      std::to_string(d.lo) + ", " + std::to_string(d.hi) + "]");
    double y = impl_->raw(d.clamp(x));
    if (!std::isfinite(y))
        throw error(errc::domain, "evaluate: arithmetic failure at x=" + std::to_string(x));
    return y;
}

double MonotoneMap::eval_unchecked(double x) const { return impl_->raw(x); }

double MonotoneMap::inverse(double y) const {
    const Interval& img = impl_->image;
    if (!img.contains(y, kDomainSlack))
        throw error(errc::domain, "inverse: y=" + std::to_string(y) + " outside image [" +
                                      std::to_string(img.lo) + ", " + std::to_string(img.hi) +
                                      "]");
    y = img.clamp(y);
    if (impl_->inv_fn) return impl_->domain.clamp(impl_->inv_fn(y));

    double lo = impl_->domain.lo, hi = impl_->domain.hi;
    const bool inc = impl_->orient == Orientation::Increasing;
    const double tol = impl_->inverse_tol;
    // Bisection: monotonicity guarantees a bracket; continuity guarantees
    // convergence. No derivatives anywhere.
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) return mid <= lo ? lo : hi;
        double fm = impl_->raw(mid);
        if (std::abs(fm - y) <= tol) return mid;
        if ((fm < y) == inc)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double MonotoneMap::iterate(double x, long n) const {
    double z = x;
    if (n >= 0) {
        for (long i = 0; i < n; ++i) {
            try {
                z = (*this)(z);
            } catch (const error&) {
                throw error(errc::domain, "iterate: escaped domain at step " + std::to_string(i));
            }
        }
    } else {
        for (long i = 0; i < -n; ++i) {
            try {
                z = inverse(z);
            } catch (const error&) {
                throw error(errc::domain,
                            "iterate: escaped image at inverse step " + std::to_string(i));
            }
        }
    }
    return z;
}

const Interval& MonotoneMap::domain() const { return impl_->domain; }
const Interval& MonotoneMap::image() const { return impl_->image; }
Orientation MonotoneMap::orientation() const { return impl_->orient; }
double MonotoneMap::inverse_tol() const { return impl_->inverse_tol; }
const std::string& MonotoneMap::label() const { return impl_->label; }
bool MonotoneMap::expression_backed() const { return impl_->expr.has_value(); }
const MapExpr* MonotoneMap::expr() const { return impl_->expr ? &*impl_->expr : nullptr; }

std::optional<double> MonotoneMap::mu() const {
    if (impl_->has_mu) return impl_->mu;
    return std::nullopt;
}

void MonotoneMap::eval_many(std::span<const double> xs, std::span<double> out) const {
    if (impl_->expr) {
        kernels::eval_batch(impl_->expr->program(), impl_->mu, xs, out);
    } else {
        for (std::size_t i = 0; i < xs.size(); ++i) out[i] = impl_->fn(xs[i]);
    }
}

MonotoneMap MonotoneMap::restricted(Interval sub) const {
    if (sub.lo < impl_->domain.lo - kDomainSlack || sub.hi > impl_->domain.hi + kDomainSlack)
        throw error(errc::domain, "restricted: sub-interval exceeds domain");
    auto impl = std::make_shared<Impl>(*impl_);
    impl->domain = Interval(impl_->domain.clamp(sub.lo), impl_->domain.clamp(sub.hi));
    double flo = impl->raw(impl->domain.lo), fhi = impl->raw(impl->domain.hi);
    impl->image = Interval(std::min(flo, fhi), std::max(flo, fhi));
    return MonotoneMap(std::move(impl));
}

MonotoneMap MonotoneMap::inverse_view() const {
    MonotoneMap self(impl_);
    auto impl = std::make_shared<Impl>();
    impl->fn = [self](double y) { return self.inverse(y); };
    impl->inv_fn = [self](double x) { return self.eval_unchecked(self.domain().clamp(x)); };
    impl->domain = impl_->image;
    impl->image = impl_->domain;
    impl->orient = impl_->orient;
    impl->inverse_tol = impl_->inverse_tol;
    impl->label = "inverse(" + impl_->label + ")";
    return MonotoneMap(std::move(impl));
}

MonotoneMap MonotoneMap::reflected() const {
    const double c = impl_->domain.lo + impl_->domain.hi;
    if (impl_->expr) {
        MapExpr r = reflect_expr(*impl_->expr, c);
        std::optional<double> mu;
        if (impl_->has_mu) mu = impl_->mu;
        return MonotoneMap(std::move(r), impl_->domain, mu, impl_->inverse_tol);
    }
    auto base = impl_;
    return MonotoneMap([base, c](double x) { return c - base->raw(c - x); }, impl_->domain,
                       "reflect(" + impl_->label + ")", impl_->inverse_tol);
}

}  // namespace conj1d
