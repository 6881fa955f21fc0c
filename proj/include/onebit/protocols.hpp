#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "onebit/density.hpp"

namespace onebit {

// 1-bit threshold encoder: 1 iff x < theta (strict at the boundary).
inline int encode_threshold(double x, double theta) { return x < theta ? 1 : 0; }

// --- two-threshold non-adaptive protocol -----------------------------------

struct NonAdaptiveConfig {
    double theta1 = 0.0;  // canonical ordering theta1 < theta2
    double theta2 = 0.0;
    double k1 = 0.5;  // fraction of users on theta1; k2 = 1 - k1
    void validate() const;
};

struct EstimateResult {
    double mu_hat = 0.0;
    std::optional<double> sigma_hat;
    // Empirical fractions after clipping, plus per-fraction clip flags.
    double f1 = 0.0, f2 = 0.0;
    std::optional<double> f3;
    bool clipped_f1 = false, clipped_f2 = false, clipped_f3 = false;

    int clip_count() const {
        return (clipped_f1 ? 1 : 0) + (clipped_f2 ? 1 : 0) + (clipped_f3 ? 1 : 0);
    }
};

// Decoder on the transcript alone (counts of ones per threshold group).
// Empirical fractions are clipped into [1/(2n_i), 1 - 1/(2n_i)] so every
// trial stays finite; throws DegenerateQuantiles when the two inverted
// quantiles collapse or the implied scale is non-positive.
EstimateResult nonadaptive_decode(long ones1, long n1, long ones2, long n2,
                                  const NonAdaptiveConfig& cfg, const BaseDensity& d);

// Same inversion on already-formed fractions (population-level plug-in).
EstimateResult nonadaptive_from_fractions(double frac1, long n1, double frac2, long n2,
                                          const NonAdaptiveConfig& cfg,
                                          const BaseDensity& d);

EstimateResult nonadaptive_estimate(std::span<const std::uint8_t> bits1,
                                    std::span<const std::uint8_t> bits2,
                                    const NonAdaptiveConfig& cfg, const BaseDensity& d);

struct NonAdaptiveAsymptotics {
    double n_mse_mu = 0.0;
    double n_mse_sigma = 0.0;
    // Set when a pdf factor fell below 1e-12 and the limit formula blows up.
    bool divergence_warning = false;
};

// Limits of n * MSE for the two-threshold estimator. sigma_i^2 = F_i(1-F_i)
// with F_i, f_i evaluated at (theta_i - mu)/sigma; each group contributes
// sigma_i^2 / (K_i f_i^2) through the delta method.
NonAdaptiveAsymptotics mse_nonadaptive_asymptotic(const NonAdaptiveConfig& cfg,
                                                  const BaseDensity& d, double mu,
                                                  double sigma);

// --- two-round adaptive protocol --------------------------------------------

struct SplitRule {
    enum class Kind { kTheorem, kFixedFractions };
    Kind kind = Kind::kTheorem;
    double k1 = 0.0, k2 = 0.0;  // fixed fractions; require k1 + k2 < 1

    static SplitRule theorem() { return {Kind::kTheorem, 0.0, 0.0}; }
    static SplitRule fixed(double k1, double k2) {
        return {Kind::kFixedFractions, k1, k2};
    }
};

struct AdaptiveConfig {
    double theta1 = 0.0;
    double theta2 = 0.0;
    SplitRule split = SplitRule::theorem();
    void validate() const;
};

struct Split {
    long n1 = 0, n2 = 0, n3 = 0;
};

// Partition n users into the first-round pair and the refinement pool.
// The theorem rule solves n3 + 2 n3/ln(n3) = n and gives the integer
// remainder to n3; fixed fractions round and do the same.
Split split_solver(long n, const SplitRule& rule);

// Second-round decoder: the refinement pool encoded against mu_c, and the
// final estimate is mu_c - F^{-1}(F3) * sigma_c.
EstimateResult adaptive_decode_round2(const EstimateResult& coarse, long ones3, long n3,
                                      const BaseDensity& d);

// Full protocol over raw samples (in user order): round-1 users encode with
// theta1/theta2, the decoder broadcasts mu_c, round-2 users encode with it.
// Only bits ever cross to the decoder.
EstimateResult adaptive_estimate(std::span<const double> samples,
                                 const AdaptiveConfig& cfg, const BaseDensity& d);

// Limit of n * MSE for the adaptive protocol: sigma^2 / (4 f0^2).
double mse_adaptive_asymptotic(const BaseDensity& d, double sigma);

// --- multi-threshold non-parametric protocol ---------------------------------

struct MultiThresholdConfig {
    int m = 0;          // thresholds at j*delta for j = -m..m, theta_0 = 0
    double delta = 0.0; // grid spacing
    void validate() const;

    // Group midpoints: (j + 1/2) delta for j < 0, (j - 1/2) delta for j > 0.
    double midpoint(int j) const {
        return (j < 0 ? (j + 0.5) : (j - 0.5)) * delta;
    }
};

// Samples are laid out per group, K = n/(2m) consecutive entries for each
// j in -m..-1 then 1..m. ConfigError when n is not divisible by 2m.
double multi_threshold_estimate(std::span<const double> samples,
                                const MultiThresholdConfig& cfg);

struct MultiThresholdTheory {
    double bias_bound = 0.0;        // L * m * delta^2, L = sup of the model pdf
    double variance_exact = 0.0;    // (delta^2/K) sum_j F(1-F) at the midpoints
    double variance_integral = 0.0; // (delta/K) integral of F(1-F)
};

MultiThresholdTheory multi_threshold_theory(const MultiThresholdConfig& cfg,
                                            const BaseDensity& d, double mu,
                                            double sigma, long n);

}  // namespace onebit
