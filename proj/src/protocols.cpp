#include "onebit/protocols.hpp"

#include <cmath>
#include <sstream>

#include "onebit/errors.hpp"
#include "onebit/quadrature.hpp"
#include "onebit/roots.hpp"

namespace onebit {

namespace {

double clip_fraction(double frac, long n, bool* clipped) {
    const double lo = 1.0 / (2.0 * static_cast<double>(n));
    const double hi = 1.0 - lo;
    if (frac < lo) {
        *clipped = true;
        return lo;
    }
    if (frac > hi) {
        *clipped = true;
        return hi;
    }
    *clipped = false;
    return frac;
}

long count_ones(std::span<const std::uint8_t> bits) {
    long ones = 0;
    for (std::uint8_t b : bits) ones += b;
    return ones;
}

}  // namespace

void NonAdaptiveConfig::validate() const {
    if (!(theta1 < theta2)) throw ConfigError("NonAdaptiveConfig: need theta1 < theta2");
    if (!(k1 > 0.0 && k1 < 1.0)) throw ConfigError("NonAdaptiveConfig: k1 in (0,1)");
}

void AdaptiveConfig::validate() const {
    if (!(theta1 < theta2)) throw ConfigError("AdaptiveConfig: need theta1 < theta2");
    if (split.kind == SplitRule::Kind::kFixedFractions) {
        if (!(split.k1 > 0.0 && split.k2 > 0.0 && split.k1 + split.k2 < 1.0)) {
            throw ConfigError("AdaptiveConfig: fixed fractions need k1,k2>0, k1+k2<1");
        }
    }
}

void MultiThresholdConfig::validate() const {
    if (m < 1) throw ConfigError("MultiThresholdConfig: m >= 1 required");
    if (!(delta > 0.0)) throw ConfigError("MultiThresholdConfig: delta > 0 required");
}

EstimateResult nonadaptive_decode(long ones1, long n1, long ones2, long n2,
                                  const NonAdaptiveConfig& cfg, const BaseDensity& d) {
    if (n1 < 1 || n2 < 1) throw ConfigError("nonadaptive_decode: empty group");
    return nonadaptive_from_fractions(static_cast<double>(ones1) / n1, n1,
                                      static_cast<double>(ones2) / n2, n2, cfg, d);
}

EstimateResult nonadaptive_from_fractions(double frac1, long n1, double frac2, long n2,
                                          const NonAdaptiveConfig& cfg,
                                          const BaseDensity& d) {
    cfg.validate();
    if (n1 < 1 || n2 < 1) throw ConfigError("nonadaptive_from_fractions: empty group");
    EstimateResult res;
    res.f1 = clip_fraction(frac1, n1, &res.clipped_f1);
    res.f2 = clip_fraction(frac2, n2, &res.clipped_f2);
    const double a1 = d.quantile(res.f1);
    const double a2 = d.quantile(res.f2);
    if (std::fabs(a1 - a2) < 1e-12) {
        throw DegenerateQuantiles("nonadaptive_decode: alpha1 ~ alpha2");
    }
    const double sigma_hat = (cfg.theta1 - cfg.theta2) / (a1 - a2);
    if (!(sigma_hat > 0.0)) {
        throw DegenerateQuantiles("nonadaptive_decode: non-positive sigma estimate");
    }
    res.mu_hat = (a1 * cfg.theta2 - a2 * cfg.theta1) / (a1 - a2);
    res.sigma_hat = sigma_hat;
    return res;
}

EstimateResult nonadaptive_estimate(std::span<const std::uint8_t> bits1,
                                    std::span<const std::uint8_t> bits2,
                                    const NonAdaptiveConfig& cfg, const BaseDensity& d) {
    return nonadaptive_decode(count_ones(bits1), static_cast<long>(bits1.size()),
                              count_ones(bits2), static_cast<long>(bits2.size()), cfg, d);
}

NonAdaptiveAsymptotics mse_nonadaptive_asymptotic(const NonAdaptiveConfig& cfg,
                                                  const BaseDensity& d, double mu,
                                                  double sigma) {
    cfg.validate();
    const double a1 = (cfg.theta1 - mu) / sigma;
    const double a2 = (cfg.theta2 - mu) / sigma;
    const double f1 = d.pdf(a1);
    const double f2 = d.pdf(a2);
    const double F1 = d.cdf(a1);
    const double F2 = d.cdf(a2);
    const double v1 = F1 * (1.0 - F1);
    const double v2 = F2 * (1.0 - F2);
    const double k2 = 1.0 - cfg.k1;
    const double w1 = v1 / (cfg.k1 * f1 * f1);
    const double w2 = v2 / (k2 * f2 * f2);
    const double dth2 = (cfg.theta1 - cfg.theta2) * (cfg.theta1 - cfg.theta2);
    NonAdaptiveAsymptotics out;
    out.n_mse_mu = sigma * sigma / dth2 *
                   ((cfg.theta2 - mu) * (cfg.theta2 - mu) * w1 +
                    (cfg.theta1 - mu) * (cfg.theta1 - mu) * w2);
    out.n_mse_sigma = sigma * sigma * sigma * sigma / dth2 * (w1 + w2);
    out.divergence_warning = (f1 < 1e-12 || f2 < 1e-12);
    return out;
}

Split split_solver(long n, const SplitRule& rule) {
    if (rule.kind == SplitRule::Kind::kTheorem) {
        if (n < 30) throw DomainError("split_solver: theorem rule needs n >= 30");
        // Solve x + 2x/ln(x) = n for real x, then round to the pool size.
        const auto g = [n](double x) {
            return x + 2.0 * x / std::log(x) - static_cast<double>(n);
        };
        const double x = roots::bisect(g, 3.0, static_cast<double>(n), 1e-9);
        Split s;
        s.n3 = std::llround(x);
        const long rest = n - s.n3;
        s.n1 = rest / 2;
        s.n2 = s.n1;
        s.n3 = n - s.n1 - s.n2;  // remainder goes to the refinement pool
        if (s.n1 < 1 || s.n2 < 1 || s.n3 < 1) {
            throw DomainError("split_solver: n too small for the theorem rule");
        }
        return s;
    }
    Split s;
    s.n1 = std::llround(rule.k1 * static_cast<double>(n));
    s.n2 = std::llround(rule.k2 * static_cast<double>(n));
    s.n3 = n - s.n1 - s.n2;
    if (s.n1 < 1 || s.n2 < 1 || s.n3 < 1) {
        throw DomainError("split_solver: fixed fractions leave an empty group");
    }
    return s;
}

EstimateResult adaptive_decode_round2(const EstimateResult& coarse, long ones3, long n3,
                                      const BaseDensity& d) {
    if (n3 < 1) throw ConfigError("adaptive_decode_round2: empty pool");
    if (!coarse.sigma_hat) {
        throw ConfigError("adaptive_decode_round2: coarse result lacks sigma");
    }
    EstimateResult res = coarse;
    bool clipped = false;
    const double f3 = clip_fraction(static_cast<double>(ones3) / n3, n3, &clipped);
    res.f3 = f3;
    res.clipped_f3 = clipped;
    res.mu_hat = coarse.mu_hat - d.quantile(f3) * *coarse.sigma_hat;
    return res;
}

EstimateResult adaptive_estimate(std::span<const double> samples,
                                 const AdaptiveConfig& cfg, const BaseDensity& d) {
    cfg.validate();
    const long n = static_cast<long>(samples.size());
    const Split s = split_solver(n, cfg.split);
    long ones1 = 0, ones2 = 0;
    for (long i = 0; i < s.n1; ++i) ones1 += encode_threshold(samples[i], cfg.theta1);
    for (long i = s.n1; i < s.n1 + s.n2; ++i) {
        ones2 += encode_threshold(samples[i], cfg.theta2);
    }
    const NonAdaptiveConfig round1{cfg.theta1, cfg.theta2,
                                   static_cast<double>(s.n1) / (s.n1 + s.n2)};
    const EstimateResult coarse = nonadaptive_decode(ones1, s.n1, ones2, s.n2, round1, d);
    long ones3 = 0;
    for (long i = s.n1 + s.n2; i < n; ++i) {
        ones3 += encode_threshold(samples[i], coarse.mu_hat);
    }
    return adaptive_decode_round2(coarse, ones3, s.n3, d);
}

double mse_adaptive_asymptotic(const BaseDensity& d, double sigma) {
    const double f0 = d.pdf0();
    if (!(f0 > 0.0)) throw DomainError("mse_adaptive_asymptotic: f0 must be positive");
    return sigma * sigma / (4.0 * f0 * f0);
}

double multi_threshold_estimate(std::span<const double> samples,
                                const MultiThresholdConfig& cfg) {
    cfg.validate();
    const long n = static_cast<long>(samples.size());
    const long groups = 2L * cfg.m;
    if (n % groups != 0) {
        std::ostringstream msg;
        msg << "multi_threshold_estimate: n=" << n << " not divisible by 2m=" << groups;
        throw ConfigError(msg.str());
    }
    const long k = n / groups;
    double pos = 0.0, neg = 0.0;
    long idx = 0;
    for (int j = -cfg.m; j <= cfg.m; ++j) {
        if (j == 0) continue;
        const double mid = cfg.midpoint(j);
        long ones = 0;
        if (j < 0) {
            for (long i = 0; i < k; ++i) ones += samples[idx + i] < mid ? 1 : 0;
            neg += static_cast<double>(ones) / k;
        } else {
            for (long i = 0; i < k; ++i) ones += samples[idx + i] > mid ? 1 : 0;
            pos += static_cast<double>(ones) / k;
        }
        idx += k;
    }
    return cfg.delta * (pos - neg);
}

MultiThresholdTheory multi_threshold_theory(const MultiThresholdConfig& cfg,
                                            const BaseDensity& d, double mu,
                                            double sigma, long n) {
    cfg.validate();
    const long groups = 2L * cfg.m;
    if (n % groups != 0) throw ConfigError("multi_threshold_theory: n % 2m != 0");
    const double k = static_cast<double>(n / groups);
    MultiThresholdTheory out;
    // The model density is bounded by f0/sigma (symmetric unimodal families).
    out.bias_bound = (d.pdf0() / sigma) * cfg.m * cfg.delta * cfg.delta;
    double sum = 0.0;
    for (int j = -cfg.m; j <= cfg.m; ++j) {
        if (j == 0) continue;
        const double F = d.cdf((cfg.midpoint(j) - mu) / sigma);
        sum += F * (1.0 - F);
    }
    out.variance_exact = cfg.delta * cfg.delta / k * sum;
    // integral of F(1-F) dx over the model = sigma * integral over the base.
    const double base_integral = quad::integrate(
        [&](double z) {
            const double F = d.cdf(z);
            return F * (1.0 - F);
        },
        -20.0, 20.0, 1e-12, 1e-12);
    out.variance_integral = cfg.delta / k * sigma * base_integral;
    return out;
}

}  // namespace onebit
