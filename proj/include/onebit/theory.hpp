#pragma once

#include <string>
#include <vector>

#include "onebit/density.hpp"

namespace onebit {

// Everything that depends only on the base density: the score-weighted
// density h(x) = 2 phi'(x) f(x), its maximum, the rate constant
// T = int_0^{h*} phi'(h^{-1}(t)) h^{-1}(t) dt taken over the inner
// (increasing) branch of h, the universal constant alpha*, and the derived
// adaptive / non-adaptive MSE constants.
struct TheoryConstants {
    std::string dist_id;
    double beta = 0.0;        // GGD shape; NaN otherwise
    double z = 0.0;           // normalizing constant
    double f0 = 0.0;          // density at the origin
    double x_star = 0.0;      // argmax of h
    double h_star = 0.0;      // max of h
    double t_constant = 0.0;  // inner-branch rate integral (the tabulated T)
    double t_hellinger = 0.0; // outer/sup-branch integral (Hellinger bound)
    double alpha_star = 0.0;
    double t_star_arg = 0.0;  // argmax of the alpha* objective
    double c_non = 0.0;       // alpha*/T
    double c_adapt = 0.0;     // 1/(4 f0^2)
};

struct HStar {
    double x_star = 0.0;
    double h_star = 0.0;
};

struct AlphaStar {
    double t_star = 0.0;
    double alpha_star = 0.0;
};

// h(x) = 2 phi'(x) f(x) for x >= 0.
double h_function(const BaseDensity& d, double x);

// Locates max_{x>=0} h(x) by a coarse scan over [0,20] (step 0.01) plus
// golden-section refinement. Throws BracketError when no interior maximum
// exists in the scan window.
HStar find_h_star(const BaseDensity& d);

// Root of h(x) = t with x >= x_star (h decreasing toward 0 out there);
// bisection on [x_star, X] with X doubled until h(X) < t.
double h_inverse_outer(const BaseDensity& d, const HStar& hs, double t);

// Root of h(x) = t with x in [0, x_star] (h strictly increasing there).
double h_inverse_inner(const BaseDensity& d, const HStar& hs, double t);

// The rate constant T. Evaluated two independent ways -- directly in t with
// the inner inverse, and in x after the change of variables t = h(x) -- and
// cross-checked to 1e-4 relative (ConvergenceError otherwise). Returns the
// x-space form.
double t_constant(const BaseDensity& d, const HStar& hs);

// The constant controlling the per-user squared Hellinger distance of 1-bit
// encoders: same integral but over the outer branch, where the inverse takes
// the largest root (this is what the bound's derivation integrates). Cross-
// checked against the signed x-space integral.
double hellinger_rate_constant(const BaseDensity& d, const HStar& hs);

// alpha* = max_{t>=0} t (1 - sqrt(1 - e^{-2t})) ~ 0.1034.
AlphaStar alpha_star_constant();

// Assembles the full constant set for one density.
TheoryConstants constants_for(const BaseDensity& d);

// eta(x) = f(x)^2 / (F(x) F(-x)); equals 4 f0^2 at x = 0.
double eta(const BaseDensity& d, double x);

struct EtaCheckResult {
    bool ok = true;
    double x_prev = 0.0;  // first violating pair when !ok
    double x_next = 0.0;
};

// Verifies eta is non-increasing along an ascending non-negative grid
// (within tol) and strictly maximized at 0. Returns the first violation.
EtaCheckResult check_eta_condition(const BaseDensity& d,
                                   const std::vector<double>& grid,
                                   double tol = 1e-10);
EtaCheckResult check_eta_condition(const BaseDensity& d);  // default grid [0,8]

// beta where c_non(beta) = c_adapt(beta) for the GGD family; bisection on
// [lo,hi] to x_tol. ConvergenceError when the bracket has no sign change.
double ggd_crossing(double lo = 1.1, double hi = 2.5, double x_tol = 1e-3);

// Squared Hellinger distance (1/2 convention) between Bernoulli(p) and
// Bernoulli(q): 1 minus the Bhattacharyya coefficient.
double hellinger_sq_bernoulli(double p, double q);

struct HellingerCheckConfig {
    double epsilon = 1e-3;
    std::vector<double> theta_grid;  // defaults to [-6,6] step 0.01 when empty
    double tolerance_slack = 0.05;
};

struct HellingerReport {
    double epsilon = 0.0;
    double max_ratio = 0.0;     // max over the grid of H^2 / eps^2
    double argmax_theta = 0.0;
    double bound_constant = 0.0;  // hellinger_rate_constant
    bool ok = true;
};

// Evaluates the threshold-encoder Hellinger ratio H^2(F(theta-eps),
// F(theta+eps))/eps^2 across the grid and checks it against the bound
// constant times (1+slack). Throws BoundViolation when exceeded.
HellingerReport check_hellinger_bound(const BaseDensity& d,
                                      const HellingerCheckConfig& cfg);

}  // namespace onebit
