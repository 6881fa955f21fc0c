#include "onebit/theory.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "onebit/errors.hpp"
#include "onebit/quadrature.hpp"
#include "onebit/roots.hpp"

namespace onebit {

namespace {

// d/dx of h = 2 phi' f: h' = 2 f (phi'' - phi'^2).
double h_derivative(const BaseDensity& d, double x) {
    const double pp = d.phi_prime(x);
    return 2.0 * d.pdf(x) * (d.phi_double_prime(x) - pp * pp);
}

// Local extrema of h on (x_star, x_end], used to pick the sup-branch root
// when h is not monotone past its maximum (the sin2 family has one shallow
// dip there). Returns interleaved segment boundaries including both ends.
std::vector<double> h_segment_bounds(const BaseDensity& d, const HStar& hs,
                                     double x_end) {
    const double step = 0.005;
    std::vector<double> bounds;
    bounds.push_back(hs.x_star);
    double prev_x = hs.x_star + step;
    double prev_h = h_function(d, prev_x);
    bool decreasing = true;
    for (double x = prev_x + step; x <= x_end; x += step) {
        const double hx = h_function(d, x);
        const bool dec = hx <= prev_h;
        if (dec != decreasing) {
            bounds.push_back(prev_x);
            decreasing = dec;
        }
        prev_x = x;
        prev_h = hx;
    }
    bounds.push_back(x_end);
    return bounds;
}

}  // namespace

double h_function(const BaseDensity& d, double x) {
    return 2.0 * d.phi_prime(x) * d.pdf(x);
}

HStar find_h_star(const BaseDensity& d) {
    const double scan_hi = 20.0;
    const double step = 0.01;
    double best_x = 0.0;
    double best_h = 0.0;
    for (double x = 0.0; x <= scan_hi; x += step) {
        const double hx = h_function(d, x);
        if (hx > best_h) {
            best_h = hx;
            best_x = x;
        }
    }
    if (best_x <= 0.0 || best_x >= scan_hi - step) {
        throw BracketError("find_h_star: no interior maximum in [0,20]");
    }
    const auto [xs, hsv] = roots::golden_max(
        [&](double x) { return h_function(d, x); }, best_x - step, best_x + step, 1e-12);
    return {xs, hsv};
}

double h_inverse_outer(const BaseDensity& d, const HStar& hs, double t) {
    if (!(t > 0.0) || t > hs.h_star * (1.0 + 1e-12)) {
        throw DomainError("h_inverse_outer: t outside (0, h_star]");
    }
    if (t >= hs.h_star) return hs.x_star;
    double hi = hs.x_star + 1.0;
    while (h_function(d, hi) >= t) {
        hi *= 2.0;
        if (hi > 1e6) throw ConvergenceError("h_inverse_outer: no decay found");
    }
    return roots::bisect([&](double x) { return h_function(d, x) - t; }, hs.x_star, hi,
                         1e-10);
}

double h_inverse_inner(const BaseDensity& d, const HStar& hs, double t) {
    if (!(t >= 0.0) || t > hs.h_star * (1.0 + 1e-12)) {
        throw DomainError("h_inverse_inner: t outside [0, h_star]");
    }
    if (t == 0.0) return 0.0;
    if (t >= hs.h_star) return hs.x_star;
    return roots::bisect([&](double x) { return h_function(d, x) - t; }, 0.0, hs.x_star,
                         1e-12);
}

double t_constant(const BaseDensity& d, const HStar& hs) {
    // x-space form over the inner branch: t = h(x), dt = h'(x) dx >= 0.
    const double t_x = quad::integrate(
        [&](double x) { return d.phi_prime(x) * x * h_derivative(d, x); }, 0.0,
        hs.x_star, 1e-12, 1e-12);
    // Direct t-space form with the inner inverse.
    const double t_t = quad::integrate(
        [&](double t) {
            const double x = h_inverse_inner(d, hs, t);
            return d.phi_prime(x) * x;
        },
        0.0, hs.h_star, 1e-9, 1e-8, 20000);
    if (std::fabs(t_t - t_x) > 1e-4 * std::fabs(t_x)) {
        std::ostringstream msg;
        msg << "t_constant: quadrature forms disagree (" << t_x << " vs " << t_t << ")";
        throw ConvergenceError(msg.str());
    }
    return t_x;
}

double hellinger_rate_constant(const BaseDensity& d, const HStar& hs) {
    // Truncate where h has fully decayed.
    double x_end = hs.x_star + 1.0;
    while (h_function(d, x_end) > 1e-16 * hs.h_star) {
        x_end += 1.0;
        if (x_end > 1e4) throw ConvergenceError("hellinger_rate_constant: no decay");
    }
    const auto bounds = h_segment_bounds(d, hs, x_end);

    // Largest root of h(x) = t beyond x_star: walk monotone segments from the
    // right and bisect in the first one whose range covers t.
    const auto sup_root = [&](double t) -> double {
        for (std::size_t i = bounds.size() - 1; i >= 1; --i) {
            const double a = bounds[i - 1];
            const double b = bounds[i];
            const double ha = h_function(d, a);
            const double hb = h_function(d, b);
            if ((ha - t) * (hb - t) <= 0.0) {
                return roots::bisect([&](double x) { return h_function(d, x) - t; }, a, b,
                                     1e-12);
            }
        }
        return hs.x_star;
    };

    const double t_sup = quad::integrate(
        [&](double t) {
            const double x = sup_root(t);
            return d.phi_prime(x) * x;
        },
        0.0, hs.h_star, 1e-9, 1e-8, 20000);

    // Signed x-space integral as a cross-check. It counts any non-monotone
    // window with signs, so it can sit slightly below the sup-branch value;
    // agreement is required only to 2%.
    const double t_signed = quad::integrate(
        [&](double x) { return -d.phi_prime(x) * x * h_derivative(d, x); }, hs.x_star,
        x_end, 1e-12, 1e-12, 20000);
    if (std::fabs(t_signed - t_sup) > 2e-2 * std::fabs(t_sup)) {
        std::ostringstream msg;
        msg << "hellinger_rate_constant: forms disagree (" << t_sup << " vs " << t_signed
            << ")";
        throw ConvergenceError(msg.str());
    }
    return t_sup;
}

AlphaStar alpha_star_constant() {
    const auto objective = [](double t) {
        return t * (1.0 - std::sqrt(1.0 - std::exp(-2.0 * t)));
    };
    double best_t = 0.0;
    double best_v = 0.0;
    for (double t = 0.0; t <= 5.0; t += 1e-4) {
        const double v = objective(t);
        if (v > best_v) {
            best_v = v;
            best_t = t;
        }
    }
    const auto [ts, vs] = roots::golden_max(objective, best_t - 1e-4, best_t + 1e-4, 1e-13);
    return {ts, vs};
}

TheoryConstants constants_for(const BaseDensity& d) {
    TheoryConstants out;
    out.dist_id = d.name();
    out.beta = d.family() == Family::kGgd ? d.beta()
                                          : std::numeric_limits<double>::quiet_NaN();
    out.z = d.normalizer();
    out.f0 = d.pdf0();
    const HStar hs = find_h_star(d);
    out.x_star = hs.x_star;
    out.h_star = hs.h_star;
    out.t_constant = t_constant(d, hs);
    out.t_hellinger = hellinger_rate_constant(d, hs);
    const AlphaStar as = alpha_star_constant();
    out.alpha_star = as.alpha_star;
    out.t_star_arg = as.t_star;
    out.c_non = as.alpha_star / out.t_constant;
    out.c_adapt = 1.0 / (4.0 * out.f0 * out.f0);
    return out;
}

double eta(const BaseDensity& d, double x) {
    const double f = d.pdf(x);
    return f * f / (d.cdf(x) * d.cdf(-x));
}

EtaCheckResult check_eta_condition(const BaseDensity& d,
                                   const std::vector<double>& grid, double tol) {
    EtaCheckResult res;
    const double eta0 = eta(d, 0.0);
    double prev_x = grid.front();
    double prev_eta = eta(d, prev_x);
    if (prev_x > 0.0 && prev_eta >= eta0) {
        res.ok = false;
        res.x_prev = 0.0;
        res.x_next = prev_x;
        return res;
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double x = grid[i];
        const double e = eta(d, x);
        if (e > prev_eta + tol || e >= eta0) {
            res.ok = false;
            res.x_prev = prev_x;
            res.x_next = x;
            return res;
        }
        prev_x = x;
        prev_eta = e;
    }
    return res;
}

EtaCheckResult check_eta_condition(const BaseDensity& d) {
    std::vector<double> grid;
    for (double x = 0.005; x <= 8.0; x += 0.005) grid.push_back(x);
    return check_eta_condition(d, grid);
}

double ggd_crossing(double lo, double hi, double x_tol) {
    const auto gap = [](double beta) {
        const BaseDensity d = BaseDensity::ggd(beta);
        const HStar hs = find_h_star(d);
        const double t = t_constant(d, hs);
        const double c_non = alpha_star_constant().alpha_star / t;
        const double f0 = d.pdf0();
        return c_non - 1.0 / (4.0 * f0 * f0);
    };
    const double glo = gap(lo);
    const double ghi = gap(hi);
    if ((glo > 0.0) == (ghi > 0.0)) {
        throw ConvergenceError("ggd_crossing: no sign change in bracket");
    }
    double a = lo, b = hi, ga = glo;
    while (b - a > x_tol) {
        const double mid = 0.5 * (a + b);
        const double gm = gap(mid);
        if ((gm > 0.0) == (ga > 0.0)) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    return 0.5 * (a + b);
}

double hellinger_sq_bernoulli(double p, double q) {
    if (!(p >= 0.0 && p <= 1.0 && q >= 0.0 && q <= 1.0)) {
        throw DomainError("hellinger_sq_bernoulli: p,q must lie in [0,1]");
    }
    const double bc = std::sqrt(p * q) + std::sqrt((1.0 - p) * (1.0 - q));
    return std::max(0.0, 1.0 - bc);
}

HellingerReport check_hellinger_bound(const BaseDensity& d,
                                      const HellingerCheckConfig& cfg) {
    if (!(cfg.epsilon > 0.0)) throw DomainError("check_hellinger_bound: epsilon > 0");
    std::vector<double> grid = cfg.theta_grid;
    if (grid.empty()) {
        for (int i = 0; i <= 1200; ++i) grid.push_back(-6.0 + 0.01 * i);
    }
    HellingerReport rep;
    rep.epsilon = cfg.epsilon;
    const HStar hs = find_h_star(d);
    rep.bound_constant = hellinger_rate_constant(d, hs);
    const double eps = cfg.epsilon;
    for (double theta : grid) {
        const double p_plus = d.cdf(theta - eps);   // encoder mean under mu = +eps
        const double p_minus = d.cdf(theta + eps);  // encoder mean under mu = -eps
        const double ratio = hellinger_sq_bernoulli(p_plus, p_minus) / (eps * eps);
        if (ratio > rep.max_ratio) {
            rep.max_ratio = ratio;
            rep.argmax_theta = theta;
        }
    }
    if (rep.max_ratio > rep.bound_constant * (1.0 + cfg.tolerance_slack)) {
        rep.ok = false;
        std::ostringstream msg;
        msg << "hellinger bound violated: ratio " << rep.max_ratio << " at theta "
            << rep.argmax_theta << " (eps " << eps << ") exceeds "
            << rep.bound_constant << " * (1+" << cfg.tolerance_slack << ")";
        throw BoundViolation(msg.str());
    }
    return rep;
}

}  // namespace onebit
