#include <doctest.h>

#include <cmath>
#include <vector>

#include "onebit/density.hpp"
#include "onebit/errors.hpp"
#include "onebit/protocols.hpp"
#include "onebit/rng.hpp"
#include "onebit/sim.hpp"
#include "oracles.hpp"

using namespace onebit;

TEST_CASE("threshold encoder") {
    CHECK(encode_threshold(0.2, 0.5) == 1);
    CHECK(encode_threshold(0.5, 0.5) == 0);  // strict inequality at the boundary
    CHECK(encode_threshold(0.8, 0.5) == 0);

    // Mean of the encoder at theta = mu is F(0) = 1/2.
    const ScaleLocationModel model(BaseDensity::ggd(2.0), 0.7, 1.5);
    RngStream rng = derive_stream(31, {2});
    const long n = 1000000;
    long ones = 0;
    for (long i = 0; i < n; ++i) ones += encode_threshold(model.sample(rng), 0.7);
    const double frac = static_cast<double>(ones) / n;
    const double se = 0.5 / std::sqrt(static_cast<double>(n));
    CHECK(std::fabs(frac - 0.5) <= 3.0 * se);
}

TEST_CASE("non-adaptive decode: population plug-in recovers (mu, sigma)") {
    const NonAdaptiveConfig cfg{-1.0, 1.0, 0.5};
    const double mu = 0.3, sigma = 2.0;
    for (const char* id : {"logistic", "hypsecant", "sin2"}) {
        const BaseDensity d = density_from_name(id);
        const double f1 = d.cdf((cfg.theta1 - mu) / sigma);
        const double f2 = d.cdf((cfg.theta2 - mu) / sigma);
        const EstimateResult r = nonadaptive_from_fractions(f1, 1 << 20, f2, 1 << 20, cfg, d);
        CHECK(r.mu_hat == doctest::Approx(mu).epsilon(1e-9));
        CHECK(*r.sigma_hat == doctest::Approx(sigma).epsilon(1e-9));
        CHECK_FALSE(r.clipped_f1);
        CHECK_FALSE(r.clipped_f2);
    }
    const BaseDensity g = BaseDensity::ggd(1.5);
    const EstimateResult r = nonadaptive_from_fractions(
        g.cdf((cfg.theta1 - mu) / sigma), 1 << 20, g.cdf((cfg.theta2 - mu) / sigma),
        1 << 20, cfg, g);
    CHECK(r.mu_hat == doctest::Approx(mu).epsilon(1e-9));
    CHECK(*r.sigma_hat == doctest::Approx(sigma).epsilon(1e-9));
}

TEST_CASE("non-adaptive decode: clipping and degeneracy") {
    const NonAdaptiveConfig cfg{-1.0, 1.0, 0.5};
    const BaseDensity d = BaseDensity::ggd(2.0);
    // Saturated groups clip to 1/200 and 1 - 1/200 and still decode to a
    // finite estimate. (With theta1 < theta2 the feasible saturation is
    // all-zeros on the low threshold and all-ones on the high one; the
    // mirrored pattern implies a non-positive scale and is rejected below.)
    const EstimateResult r = nonadaptive_decode(0, 100, 100, 100, cfg, d);
    CHECK(r.clipped_f1);
    CHECK(r.clipped_f2);
    CHECK(r.f1 == doctest::Approx(1.0 / 200.0));
    CHECK(r.f2 == doctest::Approx(1.0 - 1.0 / 200.0));
    CHECK(std::isfinite(r.mu_hat));
    CHECK(*r.sigma_hat > 0.0);
    CHECK_THROWS_AS((void)nonadaptive_decode(100, 100, 0, 100, cfg, d),
                    DegenerateQuantiles);

    // Identical fractions make the quantile pair collapse.
    CHECK_THROWS_AS((void)nonadaptive_decode(30, 100, 30, 100, cfg, d),
                    DegenerateQuantiles);
    // Inverted fractions give a negative scale estimate.
    CHECK_THROWS_AS((void)nonadaptive_decode(60, 100, 10, 100, cfg, d),
                    DegenerateQuantiles);
    CHECK_THROWS_AS((void)nonadaptive_decode(0, 0, 10, 100, cfg, d), ConfigError);
}

TEST_CASE("non-adaptive asymptotics formula structure") {
    const BaseDensity d = BaseDensity::ggd(2.0);
    const NonAdaptiveConfig cfg{-0.8333, 0.8333, 0.5};
    // At mu = theta1 only the theta1-side weight survives.
    const auto at_t1 = mse_nonadaptive_asymptotic(cfg, d, cfg.theta1, 1.0);
    const double a1 = 0.0;
    const double F1 = d.cdf(a1);
    const double f1 = d.pdf(a1);
    const double expect =
        (cfg.theta2 - cfg.theta1) * (cfg.theta2 - cfg.theta1) * F1 * (1.0 - F1) /
        (0.5 * f1 * f1) / ((cfg.theta1 - cfg.theta2) * (cfg.theta1 - cfg.theta2));
    CHECK(at_t1.n_mse_mu == doctest::Approx(expect).epsilon(1e-12));
    CHECK_FALSE(at_t1.divergence_warning);
    // Far-out mu drives the pdf terms below 1e-12 and flags divergence.
    CHECK(mse_nonadaptive_asymptotic(cfg, d, 30.0, 1.0).divergence_warning);
}

TEST_CASE("non-adaptive Monte Carlo matches the limit formulas") {
    const BaseDensity d = BaseDensity::ggd(2.0);
    const double mu = 0.0, sigma = 1.0;
    const NonAdaptiveConfig cfg{-0.8333, 0.8333, 0.5};
    const long n = 40000, trials = 500;
    const ScaleLocationModel model(d, mu, sigma);
    std::vector<double> se_mu, se_sigma;
    for (long t = 0; t < trials; ++t) {
        RngStream rng = derive_stream(2024, {0, 0, static_cast<std::uint64_t>(t)});
        long ones1 = 0, ones2 = 0;
        for (long i = 0; i < n / 2; ++i) {
            ones1 += encode_threshold(model.sample(rng), cfg.theta1);
        }
        for (long i = 0; i < n / 2; ++i) {
            ones2 += encode_threshold(model.sample(rng), cfg.theta2);
        }
        const EstimateResult r = nonadaptive_decode(ones1, n / 2, ones2, n / 2, cfg, d);
        se_mu.push_back((r.mu_hat - mu) * (r.mu_hat - mu));
        se_sigma.push_back((*r.sigma_hat - sigma) * (*r.sigma_hat - sigma));
    }
    const auto mean_se = [](const std::vector<double>& v, double* out_se) {
        double s = 0.0;
        for (double x : v) s += x;
        const double m = s / v.size();
        double ss = 0.0;
        for (double x : v) ss += (x - m) * (x - m);
        *out_se = std::sqrt(ss / (v.size() - 1) / v.size());
        return m;
    };
    double se1 = 0.0, se2 = 0.0;
    const double mse_mu = mean_se(se_mu, &se1);
    const double mse_sigma = mean_se(se_sigma, &se2);
    const auto th = mse_nonadaptive_asymptotic(cfg, d, mu, sigma);
    CHECK(std::fabs(mse_mu * n - th.n_mse_mu) <= 3.0 * se1 * n);
    CHECK(std::fabs(mse_sigma * n - th.n_mse_sigma) <= 3.0 * se2 * n);
}

TEST_CASE("split solver") {
    const Split s = split_solver(40000, SplitRule::theorem());
    CHECK(s.n1 == s.n2);
    CHECK(s.n1 + s.n2 + s.n3 == 40000);
    CHECK(s.n1 >= 1);
    // n1 tracks n3/ln(n3).
    const double target = static_cast<double>(s.n3) / std::log(static_cast<double>(s.n3));
    CHECK(std::fabs(static_cast<double>(s.n1) - target) <= 2.0);

    const Split f = split_solver(1000, SplitRule::fixed(0.05, 0.05));
    CHECK(f.n1 == 50);
    CHECK(f.n2 == 50);
    CHECK(f.n3 == 900);

    const Split tiny = split_solver(30, SplitRule::theorem());
    CHECK(tiny.n1 >= 1);
    CHECK(tiny.n2 >= 1);
    CHECK(tiny.n3 >= 1);
    CHECK(tiny.n1 + tiny.n2 + tiny.n3 == 30);
    CHECK_THROWS_AS((void)split_solver(20, SplitRule::theorem()), DomainError);
    CHECK_THROWS_AS((void)split_solver(10, SplitRule::fixed(0.01, 0.01)), DomainError);
}

TEST_CASE("adaptive decode: population plug-in leaves mu unchanged") {
    const BaseDensity d = BaseDensity::hyperbolic_secant();
    EstimateResult coarse;
    coarse.mu_hat = 0.7;
    coarse.sigma_hat = 2.0;
    const EstimateResult fin = adaptive_decode_round2(coarse, 500, 1000, d);
    CHECK(fin.mu_hat == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(*fin.f3 == 0.5);
    CHECK_FALSE(fin.clipped_f3);
}

TEST_CASE("adaptive protocol: refinement-pool MSE hits the limit") {
    // n3 * MSE approaches sigma^2 / (4 f0^2); the total-n normalization
    // carries the extra n/n3 = 1 + 2/ln(n3) factor of the theorem split.
    const BaseDensity d = BaseDensity::ggd(2.0);
    const double mu = 0.3, sigma = 2.0;
    const AdaptiveConfig cfg{-0.8333, 0.8333, SplitRule::theorem()};
    const long n = 40000, trials = 600;
    const Split split = split_solver(n, cfg.split);
    const ScaleLocationModel model(d, mu, sigma);
    std::vector<double> samples(n);
    double sum_sq = 0.0;
    for (long t = 0; t < trials; ++t) {
        RngStream rng = derive_stream(99, {1, static_cast<std::uint64_t>(t)});
        for (double& x : samples) x = model.sample(rng);
        const EstimateResult r = adaptive_estimate(samples, cfg, d);
        sum_sq += (r.mu_hat - mu) * (r.mu_hat - mu);
    }
    const double mse = sum_sq / trials;
    const double limit = mse_adaptive_asymptotic(d, sigma);
    CHECK(mse * static_cast<double>(split.n3) ==
          doctest::Approx(limit).epsilon(0.10));
}

TEST_CASE("adaptive asymptotic constant") {
    CHECK(mse_adaptive_asymptotic(BaseDensity::hyperbolic_secant(), 1.0) ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mse_adaptive_asymptotic(BaseDensity::ggd(2.0), 1.0) ==
          doctest::Approx(M_PI / 2.0).epsilon(1e-9));
    CHECK(mse_adaptive_asymptotic(BaseDensity::sin2_custom(), 2.0) ==
          doctest::Approx(5.5472).epsilon(2e-3));
}

TEST_CASE("decoder purity: outputs depend on samples only through bits") {
    const BaseDensity d = BaseDensity::logistic();
    const AdaptiveConfig cfg{-0.8, 0.8, SplitRule::fixed(0.2, 0.2)};
    const ScaleLocationModel model(d, 0.4, 1.5);
    RngStream rng = derive_stream(17, {4});
    std::vector<double> samples(600);
    for (double& x : samples) x = model.sample(rng);
    const EstimateResult base = adaptive_estimate(samples, cfg, d);
    // Nudge every sample without crossing theta1, theta2, or the broadcast
    // coarse estimate (checked against the widest plausible margin).
    std::vector<double> nudged = samples;
    for (double& x : nudged) {
        const double margin = std::min({std::fabs(x - cfg.theta1),
                                        std::fabs(x - cfg.theta2),
                                        std::fabs(x - base.mu_hat)});
        REQUIRE(margin > 1e-9);
        x += 1e-12 * (x >= 0 ? 1.0 : -1.0);
    }
    const EstimateResult moved = adaptive_estimate(nudged, cfg, d);
    CHECK(moved.mu_hat == base.mu_hat);
    CHECK(*moved.sigma_hat == *base.sigma_hat);
    CHECK(*moved.f3 == *base.f3);
}

TEST_CASE("equivariance at the population level") {
    const BaseDensity d = BaseDensity::hyperbolic_secant();
    const ScaleLocationModel model(d, -0.2, 1.3);
    RngStream rng = derive_stream(23, {9});
    std::vector<double> samples(2000);
    for (double& x : samples) x = model.sample(rng);

    const NonAdaptiveConfig cfg{-0.9, 1.1, 0.5};
    std::vector<std::uint8_t> bits1(1000), bits2(1000);
    for (int i = 0; i < 1000; ++i) bits1[i] = encode_threshold(samples[i], cfg.theta1);
    for (int i = 0; i < 1000; ++i) {
        bits2[i] = encode_threshold(samples[1000 + i], cfg.theta2);
    }
    const EstimateResult base = nonadaptive_estimate(bits1, bits2, cfg, d);

    // Location shift: same bits, thresholds shifted along with the data.
    const double c = 0.5;
    const NonAdaptiveConfig shifted{cfg.theta1 + c, cfg.theta2 + c, 0.5};
    const EstimateResult moved = nonadaptive_estimate(bits1, bits2, shifted, d);
    CHECK(moved.mu_hat == doctest::Approx(base.mu_hat + c).epsilon(1e-12));
    CHECK(*moved.sigma_hat == doctest::Approx(*base.sigma_hat).epsilon(1e-12));

    // Scale by 2 (exact in binary): bit patterns are identical, so the
    // decoder sees the same counts with doubled thresholds.
    const NonAdaptiveConfig scaled{cfg.theta1 * 2.0, cfg.theta2 * 2.0, 0.5};
    std::vector<std::uint8_t> sb1(1000), sb2(1000);
    for (int i = 0; i < 1000; ++i) {
        sb1[i] = encode_threshold(samples[i] * 2.0, scaled.theta1);
        sb2[i] = encode_threshold(samples[1000 + i] * 2.0, scaled.theta2);
    }
    CHECK(sb1 == bits1);
    CHECK(sb2 == bits2);
    const EstimateResult doubled = nonadaptive_estimate(sb1, sb2, scaled, d);
    CHECK(doubled.mu_hat == doctest::Approx(2.0 * base.mu_hat).epsilon(1e-12));
    CHECK(*doubled.sigma_hat == doctest::Approx(2.0 * *base.sigma_hat).epsilon(1e-12));
}

TEST_CASE("multi-threshold estimator basics") {
    MultiThresholdConfig cfg;
    cfg.m = 4;
    cfg.delta = 0.5;
    // All-zero samples: every indicator is 0 on both sides.
    std::vector<double> zeros(8 * 5, 0.0);
    CHECK(multi_threshold_estimate(zeros, cfg) == 0.0);

    std::vector<double> wrong(42, 0.0);
    CHECK_THROWS_AS((void)multi_threshold_estimate(wrong, cfg), ConfigError);

    // Boundedness: |estimate| <= m * delta for arbitrary samples.
    RngStream rng = derive_stream(3, {1});
    std::vector<double> xs(8 * 25);
    for (int rep = 0; rep < 50; ++rep) {
        for (double& x : xs) x = 20.0 * (rng.next_unit() - 0.5);
        const double est = multi_threshold_estimate(xs, cfg);
        CHECK(std::fabs(est) <= cfg.m * cfg.delta + 1e-12);
    }
}

TEST_CASE("multi-threshold: exact-expectation bias obeys the bound") {
    // Population-level estimator: indicators replaced by their expectations.
    const auto exact_bias = [](const MultiThresholdConfig& cfg,
                               const ScaleLocationModel& model) {
        double pos = 0.0, neg = 0.0;
        for (int j = 1; j <= cfg.m; ++j) {
            pos += 1.0 - model.cdf(cfg.midpoint(j));
            neg += model.cdf(cfg.midpoint(-j));
        }
        return std::fabs(cfg.delta * (pos - neg) - model.mu);
    };
    RngStream rng = derive_stream(8, {6});
    const std::vector<BaseDensity> fams = {BaseDensity::ggd(2.0), BaseDensity::ggd(1.5),
                                           BaseDensity::logistic(),
                                           BaseDensity::hyperbolic_secant()};
    for (int rep = 0; rep < 50; ++rep) {
        const BaseDensity& d = fams[rep % fams.size()];
        const double mu = 6.0 * (rng.next_unit() - 0.5);
        const double sigma = 0.5 + 2.5 * rng.next_unit();
        const double delta = 0.02 + 0.18 * rng.next_unit();
        MultiThresholdConfig cfg;
        cfg.delta = delta;
        cfg.m = static_cast<int>(std::ceil((std::fabs(mu) + 9.0 * sigma) / delta));
        const ScaleLocationModel model(d, mu, sigma);
        const double bound = (d.pdf0() / sigma) * cfg.m * cfg.delta * cfg.delta;
        CHECK(exact_bias(cfg, model) <= bound);
    }
    // Scaling: halving delta (doubling m) halves the bound.
    MultiThresholdConfig a{100, 0.08};
    MultiThresholdConfig b{200, 0.04};
    const BaseDensity d = BaseDensity::ggd(2.0);
    const auto ta = multi_threshold_theory(a, d, 0.0, 1.0, 2 * 100 * 10);
    const auto tb = multi_threshold_theory(b, d, 0.0, 1.0, 2 * 200 * 10);
    CHECK(tb.bias_bound == doctest::Approx(0.5 * ta.bias_bound).epsilon(1e-12));
}

TEST_CASE("multi-threshold: empirical variance matches the Bernoulli sum") {
    const BaseDensity d = BaseDensity::ggd(2.0);
    const double mu = 0.4, sigma = 1.0;
    MultiThresholdConfig cfg;
    cfg.m = 50;
    cfg.delta = 0.1;
    const long k = 50;
    const long n = 2L * cfg.m * k;
    const ScaleLocationModel model(d, mu, sigma);
    const long trials = 1000;
    std::vector<double> est(trials);
    std::vector<double> xs(n);
    for (long t = 0; t < trials; ++t) {
        RngStream rng = derive_stream(314, {static_cast<std::uint64_t>(t)});
        for (double& x : xs) x = model.sample(rng);
        est[t] = multi_threshold_estimate(xs, cfg);
    }
    double mean = 0.0;
    for (double e : est) mean += e;
    mean /= trials;
    double var = 0.0;
    for (double e : est) var += (e - mean) * (e - mean);
    var /= (trials - 1);
    const auto th = multi_threshold_theory(cfg, d, mu, sigma, n);
    // Sample variance of a near-normal statistic: se(var) ~ var * sqrt(2/(T-1)).
    const double se = th.variance_exact * std::sqrt(2.0 / (trials - 1));
    CHECK(std::fabs(var - th.variance_exact) <= 3.0 * se);
    // Integral form tracks the sum once the grid is fine and wide.
    MultiThresholdConfig fine;
    fine.m = 400;
    fine.delta = 0.02;
    const auto tf = multi_threshold_theory(fine, d, 0.0, 1.0, 2L * 400 * 50);
    CHECK(tf.variance_integral ==
          doctest::Approx(tf.variance_exact).epsilon(0.02));
}
