#pragma once

#include <cmath>
#include <concepts>
#include <utility>

#include "onebit/errors.hpp"

namespace onebit::roots {

// Bisection for f(x)=0 on [lo,hi] with f(lo), f(hi) of opposite sign.
template <std::invocable<double> F>
double bisect(const F& f, double lo, double hi, double x_tol = 1e-12,
              int max_iter = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) {
        throw BracketError("bisect: endpoints do not bracket a root");
    }
    for (int i = 0; i < max_iter && (hi - lo) > x_tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Newton iteration safeguarded by a maintained bracket; falls back to
// bisection whenever a step leaves [lo,hi] or stalls. f must be monotone
// enough that [lo,hi] brackets the root throughout.
template <std::invocable<double> F, std::invocable<double> DF>
double newton_bisect(const F& f, const DF& df, double lo, double hi, double x0,
                     double x_tol = 1e-13, int max_iter = 100) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) {
        throw BracketError("newton_bisect: endpoints do not bracket a root");
    }
    double x = x0;
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    for (int i = 0; i < max_iter; ++i) {
        const double fx = f(x);
        if (fx == 0.0) return x;
        if ((fx > 0.0) == (flo > 0.0)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        const double d = df(x);
        double step = (d != 0.0) ? fx / d : 0.0;
        double xn = x - step;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::fabs(xn - x) <= x_tol * (1.0 + std::fabs(x))) return xn;
        x = xn;
    }
    return x;
}

// Golden-section maximization of a unimodal f on [lo,hi].
template <std::invocable<double> F>
std::pair<double, double> golden_max(const F& f, double lo, double hi,
                                     double x_tol = 1e-11, int max_iter = 300) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < max_iter && (b - a) > x_tol; ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    const double xm = 0.5 * (a + b);
    return {xm, f(xm)};
}

}  // namespace onebit::roots
