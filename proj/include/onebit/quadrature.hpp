#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>

#include "onebit/errors.hpp"

namespace onebit::quad {

// Gauss-Kronrod 7-15 nodes/weights on [-1,1]. Column layout: abscissa,
// Gauss-7 weight (zero on Kronrod-only nodes), Kronrod-15 weight.
inline constexpr double kGk15[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0,               0.204432940075298},
    {0.586087235467691, 0.0,               0.169004726639267},
    {0.864864423359769, 0.0,               0.104790010322250},
    {0.991455371120813, 0.0,               0.022935322010529},
};

template <std::invocable<double> F>
double gk15(const F& f, double a, double b, double& err) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double y0 = f(mid);
    double g7 = kGk15[0][1] * y0;
    double k15 = kGk15[0][2] * y0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * kGk15[i][0];
        const double yi = f(mid + dx) + f(mid - dx);
        g7 += kGk15[i][1] * yi;
        k15 += kGk15[i][2] * yi;
    }
    g7 *= half;
    k15 *= half;
    err = std::pow(200.0 * std::fabs(g7 - k15), 1.5);
    return k15;
}

// Adaptive Gauss-Kronrod on [a,b]. Splits the worst panel first via a simple
// depth-first stack; good enough for the smooth, at worst mildly singular
// integrands in this project.
template <std::invocable<double> F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-10,
                 double rel_tol = 1e-12, int max_panels = 4000) {
    struct Panel {
        double a, b;
    };
    constexpr int kStackCap = 256;
    Panel stack[kStackCap];
    int top = 0;
    stack[top++] = {a, b};
    const double width = std::fabs(b - a);
    double sum = 0.0;
    int used = 0;
    while (top > 0) {
        const Panel p = stack[--top];
        double err = 0.0;
        const double s = gk15(f, p.a, p.b, err);
        ++used;
        if (err <= abs_tol * (p.b - p.a) / width || err <= rel_tol * std::fabs(s) ||
            (p.b - p.a) < 1e-14 * (std::fabs(p.a) + std::fabs(p.b) + 1.0)) {
            sum += s;
            continue;
        }
        if (used >= max_panels || top + 2 > kStackCap) {
            throw ConvergenceError("adaptive quadrature did not converge");
        }
        const double mid = 0.5 * (p.a + p.b);
        stack[top++] = {p.a, mid};
        stack[top++] = {mid, p.b};
    }
    return sum;
}

}  // namespace onebit::quad
