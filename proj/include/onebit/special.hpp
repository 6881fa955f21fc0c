#pragma once

namespace onebit::special {

// Regularized lower incomplete gamma P(a,x) = gamma(a,x)/Gamma(a).
// Series for x < a+1, Lentz continued fraction for the upper tail otherwise.
// Accurate to ~1e-14 relative over the ranges used here (a in (0, 1], x up
// to a few hundred).
double reg_lower_gamma(double a, double x);

// Regularized upper incomplete gamma Q(a,x) = 1 - P(a,x), computed in its
// own scale so deep-tail values keep full relative precision.
double reg_upper_gamma(double a, double x);

}  // namespace onebit::special
