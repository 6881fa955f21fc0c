// Test-side oracles, deliberately independent of the library's numerics:
// a recursive adaptive Simpson integrator, erf-based normal pdf/cdf, a
// Kolmogorov-Smirnov statistic, and a dense grid maximizer.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace oracles {

inline double simpson_step(const std::function<double(double)>& f, double a, double b,
                           double fa, double fm, double fb, double whole, double tol,
                           int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double simpson(const std::function<double(double)>& f, double a, double b,
                      double tol = 1e-12) {
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, tol, 60);
}

// Pre-splits wide ranges so a vanishing midpoint cannot fake convergence.
inline double simpson_segmented(const std::function<double(double)>& f, double a,
                                double b, int segments, double tol = 1e-12) {
    double sum = 0.0;
    for (int i = 0; i < segments; ++i) {
        const double lo = a + (b - a) * i / segments;
        const double hi = a + (b - a) * (i + 1) / segments;
        sum += simpson(f, lo, hi, tol / segments);
    }
    return sum;
}

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// One-sample KS statistic; samples need not be sorted.
inline double ks_statistic(std::vector<double> xs,
                           const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double F = cdf(xs[i]);
        d = std::max(d, std::fabs(F - static_cast<double>(i) / n));
        d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - F));
    }
    return d;
}

inline std::pair<double, double> grid_max(const std::function<double(double)>& f,
                                          double lo, double hi, long points) {
    double best_x = lo;
    double best_v = f(lo);
    for (long i = 1; i <= points; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / points;
        const double v = f(x);
        if (v > best_v) {
            best_v = v;
            best_x = x;
        }
    }
    return {best_x, best_v};
}

}  // namespace oracles
