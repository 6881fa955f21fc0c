#pragma once

#include <memory>
#include <string>

#include "onebit/rng.hpp"

namespace onebit {

enum class Family { kGgd, kLogistic, kHyperbolicSecant, kSin2Custom };

// A zero-mean, unit-variance symmetric base density. Immutable after
// construction (lookup tables are built eagerly), so instances may be read
// concurrently from any number of workers.
//
// Every family is stored as f(x) = exp(-psi(x)) / Z with psi even, which
// makes phi(x) = -log f(x) = psi(x) + log Z exact by construction.
class BaseDensity {
  public:
    // Generalized Gaussian with shape beta > 0, scaled to unit variance:
    // alpha = sqrt(Gamma(1/beta)/Gamma(3/beta)).
    static BaseDensity ggd(double beta);
    // Logistic with scale s = sqrt(3)/pi (the unit-variance member).
    static BaseDensity logistic();
    // f(x) = sech(pi x / 2) / 2.
    static BaseDensity hyperbolic_secant();
    // The strictly log-concave sin^2-perturbed example density; no closed
    // form for cdf/quantile, both served from a cached panel table.
    static BaseDensity sin2_custom();

    Family family() const;
    // Shape parameter; only meaningful for the GGD family.
    double beta() const;
    // Short identifier: "ggd", "logistic", "hypsecant", "sin2".
    std::string name() const;

    double pdf(double x) const;
    double cdf(double x) const;
    // Inverse cdf; requires 0 < p < 1 (DomainError otherwise).
    double quantile(double p) const;

    // phi(x) = -log pdf(x) and its first two derivatives.
    double phi(double x) const;
    double phi_prime(double x) const;
    double phi_double_prime(double x) const;

    // Cached pdf(0) and normalizing constant Z.
    double pdf0() const;
    double normalizer() const;

    // One draw of the base variate.
    double sample(RngStream& rng) const;

    struct Impl;

  private:
    explicit BaseDensity(std::shared_ptr<const Impl> impl);
    std::shared_ptr<const Impl> impl_;
};

// A base density shifted by mu and scaled by sigma > 0.
struct ScaleLocationModel {
    BaseDensity base;
    double mu = 0.0;
    double sigma = 1.0;

    ScaleLocationModel(BaseDensity d, double mu_, double sigma_);

    double pdf(double x) const;
    double cdf(double x) const;
    double quantile(double p) const;
    double sample(RngStream& rng) const { return mu + sigma * base.sample(rng); }
};

}  // namespace onebit
