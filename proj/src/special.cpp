#include "onebit/special.hpp"

#include <cmath>
#include <limits>

#include "onebit/errors.hpp"

namespace onebit::special {

namespace {

// Series expansion: P(a,x) = x^a e^-x / Gamma(a+1) * sum x^n / ((a+1)...(a+n)).
double lower_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-17) {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw ConvergenceError("incomplete gamma series did not converge");
}

// Modified Lentz continued fraction for Q(a,x).
double upper_cf(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) {
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw ConvergenceError("incomplete gamma continued fraction did not converge");
}

}  // namespace

double reg_lower_gamma(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw DomainError("reg_lower_gamma: a>0, x>=0 required");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return lower_series(a, x);
    return 1.0 - upper_cf(a, x);
}

double reg_upper_gamma(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw DomainError("reg_upper_gamma: a>0, x>=0 required");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - lower_series(a, x);
    return upper_cf(a, x);
}

}  // namespace onebit::special
