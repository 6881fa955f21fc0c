#include "onebit/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "onebit/errors.hpp"
#include "onebit/roots.hpp"
#include "onebit/special.hpp"

namespace onebit {

namespace {

constexpr double kPi = std::numbers::pi;

double log_cosh(double v) {
    const double a = std::fabs(v);
    return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

// --- sin2 family shape -----------------------------------------------------
// psi(x) = 1.48 (|x|/c)^1.5 + 0.5 (x/c)^4 + 0.0675 sin^2(4x/c) + 1,
// c = 2.023076. Constants chosen upstream so exp(-psi)/Z has (approximately)
// unit variance.
constexpr double kSinC = 2.023076;
constexpr double kSinA1 = 1.48;
constexpr double kSinA2 = 0.5;
constexpr double kSinA3 = 0.0675;
constexpr double kSinOffset = 1.0;
constexpr double kSinSupport = 12.0;  // mass outside is < 1e-270

double sin2_psi(double x) {
    const double u = std::fabs(x) / kSinC;
    const double s = std::sin(4.0 * u);
    return kSinA1 * u * std::sqrt(u) + kSinA2 * (u * u) * (u * u) + kSinA3 * s * s +
           kSinOffset;
}

double sin2_psi_prime(double x) {
    const double ax = std::fabs(x);
    const double u = ax / kSinC;
    const double v = (kSinA1 * 1.5 * std::sqrt(u) + kSinA2 * 4.0 * u * u * u +
                      kSinA3 * 4.0 * std::sin(8.0 * u)) /
                     kSinC;
    return x < 0.0 ? -v : v;
}

double sin2_psi_double_prime(double x) {
    const double u = std::fabs(x) / kSinC;
    return (kSinA1 * 0.75 / std::sqrt(u) + kSinA2 * 12.0 * u * u +
            kSinA3 * 32.0 * std::cos(8.0 * u)) /
           (kSinC * kSinC);
}

}  // namespace

// ---------------------------------------------------------------------------

struct BaseDensity::Impl {
    Family family;
    double beta = 0.0;   // GGD shape
    double alpha = 0.0;  // GGD scale
    double scale = 0.0;  // logistic s
    double log_z = 0.0;  // log of normalizer Z
    double z = 0.0;
    double f0 = 0.0;

    // Cached cumulative table for the sin2 family: a uniform grid on
    // [-kSinSupport, 0] holding raw (unnormalized) exp(-psi), its derivative,
    // and the left-to-right prefix integral of cubic-Hermite panels. Summing
    // tail panels in their own scale keeps deep-tail cdf values relatively
    // accurate.
    double grid_x0 = 0.0;
    double grid_dx = 0.0;
    std::vector<double> raw_f;      // exp(-psi) at nodes
    std::vector<double> raw_df;     // d/dx exp(-psi) at nodes
    std::vector<double> raw_cum;    // prefix integral up to node i
    double raw_half_mass = 0.0;     // integral over [-support, 0]

    double sin2_raw_partial(double x) const;
    double sin2_cdf_neg(double x) const;    // cdf for x <= 0
    double sin2_quantile_low(double p) const;  // quantile for p <= 1/2
};

namespace {

using Impl = BaseDensity::Impl;

void build_sin2_table(Impl& im) {
    const double dx = 5e-4;
    const int n = static_cast<int>(std::llround(kSinSupport / dx)) + 1;
    im.grid_x0 = -kSinSupport;
    im.grid_dx = dx;
    im.raw_f.resize(n);
    im.raw_df.resize(n);
    im.raw_cum.resize(n);
    for (int i = 0; i < n; ++i) {
        const double x = im.grid_x0 + i * dx;
        const double e = std::exp(-sin2_psi(x));
        im.raw_f[i] = e;
        im.raw_df[i] = -sin2_psi_prime(x) * e;
    }
    im.raw_cum[0] = 0.0;
    for (int i = 1; i < n; ++i) {
        // Exact integral of the cubic Hermite interpolant over one panel.
        const double panel = 0.5 * dx * (im.raw_f[i - 1] + im.raw_f[i]) +
                             dx * dx / 12.0 * (im.raw_df[i - 1] - im.raw_df[i]);
        im.raw_cum[i] = im.raw_cum[i - 1] + panel;
    }
    im.raw_half_mass = im.raw_cum[n - 1];
    im.z = 2.0 * im.raw_half_mass;
    im.log_z = std::log(im.z);
}

}  // namespace

// Partial prefix integral of raw exp(-psi) from -support to x (x <= 0).
double Impl::sin2_raw_partial(double x) const {
    if (x <= grid_x0) return 0.0;
    if (x >= 0.0) return raw_half_mass;
    const double t = (x - grid_x0) / grid_dx;
    int k = static_cast<int>(t);
    k = std::min(k, static_cast<int>(raw_f.size()) - 2);
    const double u = t - k;
    const double fa = raw_f[k], fb = raw_f[k + 1];
    const double da = grid_dx * raw_df[k], db = grid_dx * raw_df[k + 1];
    const double u2 = u * u, u3 = u2 * u, u4 = u3 * u;
    // Integrals of the Hermite basis functions from 0 to u.
    const double i00 = 0.5 * u4 - u3 + u;
    const double i10 = 0.25 * u4 - (2.0 / 3.0) * u3 + 0.5 * u2;
    const double i01 = -0.5 * u4 + u3;
    const double i11 = 0.25 * u4 - u3 / 3.0;
    return raw_cum[k] + grid_dx * (fa * i00 + da * i10 + fb * i01 + db * i11);
}

double Impl::sin2_cdf_neg(double x) const { return sin2_raw_partial(x) / z; }

double Impl::sin2_quantile_low(double p) const {
    const double target = p * z;  // raw-mass target in [0, half_mass]
    const auto it = std::upper_bound(raw_cum.begin(), raw_cum.end(), target);
    int k = static_cast<int>(it - raw_cum.begin()) - 1;
    k = std::clamp(k, 0, static_cast<int>(raw_cum.size()) - 2);
    // Newton in the panel-local coordinate; the partial integral is a
    // quartic with strictly positive derivative.
    const double fa = raw_f[k], fb = raw_f[k + 1];
    const double da = grid_dx * raw_df[k], db = grid_dx * raw_df[k + 1];
    const double rhs = (target - raw_cum[k]) / grid_dx;
    double u = 0.5;
    for (int it2 = 0; it2 < 30; ++it2) {
        const double u2 = u * u, u3 = u2 * u, u4 = u3 * u;
        const double val = fa * (0.5 * u4 - u3 + u) +
                           da * (0.25 * u4 - (2.0 / 3.0) * u3 + 0.5 * u2) +
                           fb * (-0.5 * u4 + u3) + db * (0.25 * u4 - u3 / 3.0) - rhs;
        const double h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        const double h10 = u3 - 2.0 * u2 + u;
        const double h01 = -2.0 * u3 + 3.0 * u2;
        const double h11 = u3 - u2;
        const double slope = fa * h00 + da * h10 + fb * h01 + db * h11;
        const double step = val / slope;
        u = std::clamp(u - step, 0.0, 1.0);
        if (std::fabs(step) < 1e-15) break;
    }
    return grid_x0 + (k + u) * grid_dx;
}

// ---------------------------------------------------------------------------

BaseDensity::BaseDensity(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

BaseDensity BaseDensity::ggd(double beta) {
    if (!(beta > 0.0)) throw DomainError("ggd: beta must be positive");
    auto im = std::make_shared<Impl>();
    im->family = Family::kGgd;
    im->beta = beta;
    im->alpha = std::exp(0.5 * (std::lgamma(1.0 / beta) - std::lgamma(3.0 / beta)));
    // pdf = exp(-(|x|/alpha)^beta)/Z with Z = 2 alpha Gamma(1/beta) / beta.
    im->log_z = std::numbers::ln2 + std::log(im->alpha) + std::lgamma(1.0 / beta) -
                std::log(beta);
    im->z = std::exp(im->log_z);
    im->f0 = 1.0 / im->z;
    return BaseDensity(std::move(im));
}

BaseDensity BaseDensity::logistic() {
    auto im = std::make_shared<Impl>();
    im->family = Family::kLogistic;
    im->scale = std::sqrt(3.0) / kPi;
    im->log_z = std::log(4.0 * im->scale);
    im->z = 4.0 * im->scale;
    im->f0 = 1.0 / im->z;
    return BaseDensity(std::move(im));
}

BaseDensity BaseDensity::hyperbolic_secant() {
    auto im = std::make_shared<Impl>();
    im->family = Family::kHyperbolicSecant;
    im->z = 2.0;
    im->log_z = std::numbers::ln2;
    im->f0 = 0.5;
    return BaseDensity(std::move(im));
}

BaseDensity BaseDensity::sin2_custom() {
    auto im = std::make_shared<Impl>();
    im->family = Family::kSin2Custom;
    build_sin2_table(*im);
    im->f0 = std::exp(-kSinOffset) / im->z;
    return BaseDensity(std::move(im));
}

Family BaseDensity::family() const { return impl_->family; }
double BaseDensity::beta() const { return impl_->beta; }
double BaseDensity::pdf0() const { return impl_->f0; }
double BaseDensity::normalizer() const { return impl_->z; }

std::string BaseDensity::name() const {
    switch (impl_->family) {
        case Family::kGgd: return "ggd";
        case Family::kLogistic: return "logistic";
        case Family::kHyperbolicSecant: return "hypsecant";
        case Family::kSin2Custom: return "sin2";
    }
    return "?";
}

double BaseDensity::pdf(double x) const {
    const Impl& im = *impl_;
    switch (im.family) {
        case Family::kGgd: {
            const double u = std::pow(std::fabs(x) / im.alpha, im.beta);
            return std::exp(-u - im.log_z);
        }
        case Family::kLogistic: {
            const double e = std::exp(-std::fabs(x) / im.scale);
            const double d = 1.0 + e;
            return e / (im.scale * d * d);
        }
        case Family::kHyperbolicSecant: {
            const double c = std::cosh(kPi * x / 2.0);
            return 0.5 / c;
        }
        case Family::kSin2Custom:
            return std::exp(-sin2_psi(x) - im.log_z);
    }
    return 0.0;
}

double BaseDensity::phi(double x) const {
    const Impl& im = *impl_;
    switch (im.family) {
        case Family::kGgd:
            return std::pow(std::fabs(x) / im.alpha, im.beta) + im.log_z;
        case Family::kLogistic:
            return 2.0 * log_cosh(x / (2.0 * im.scale)) + im.log_z;
        case Family::kHyperbolicSecant:
            return log_cosh(kPi * x / 2.0) + im.log_z;
        case Family::kSin2Custom:
            return sin2_psi(x) + im.log_z;
    }
    return 0.0;
}

double BaseDensity::phi_prime(double x) const {
    const Impl& im = *impl_;
    switch (im.family) {
        case Family::kGgd: {
            if (x == 0.0) {
                if (im.beta < 1.0) throw DomainError("phi_prime: cusp at 0 for beta<1");
                return 0.0;
            }
            const double v =
                (im.beta / im.alpha) * std::pow(std::fabs(x) / im.alpha, im.beta - 1.0);
            return x < 0.0 ? -v : v;
        }
        case Family::kLogistic:
            return std::tanh(x / (2.0 * im.scale)) / im.scale;
        case Family::kHyperbolicSecant:
            return (kPi / 2.0) * std::tanh(kPi * x / 2.0);
        case Family::kSin2Custom:
            return x == 0.0 ? 0.0 : sin2_psi_prime(x);
    }
    return 0.0;
}

double BaseDensity::phi_double_prime(double x) const {
    const Impl& im = *impl_;
    switch (im.family) {
        case Family::kGgd: {
            const double b = im.beta;
            return (b * (b - 1.0) / (im.alpha * im.alpha)) *
                   std::pow(std::fabs(x) / im.alpha, b - 2.0);
        }
        case Family::kLogistic: {
            const double c = std::cosh(x / (2.0 * im.scale));
            return 1.0 / (2.0 * im.scale * im.scale * c * c);
        }
        case Family::kHyperbolicSecant: {
            const double c = std::cosh(kPi * x / 2.0);
            return kPi * kPi / (4.0 * c * c);
        }
        case Family::kSin2Custom:
            return sin2_psi_double_prime(x);
    }
    return 0.0;
}

double BaseDensity::cdf(double x) const {
    const Impl& im = *impl_;
    if (x == 0.0) return 0.5;
    switch (im.family) {
        case Family::kGgd: {
            const double u = std::pow(std::fabs(x) / im.alpha, im.beta);
            const double q = 0.5 * special::reg_upper_gamma(1.0 / im.beta, u);
            return x < 0.0 ? q : 1.0 - q;
        }
        case Family::kLogistic: {
            // exp-form keeps full relative precision in the lower tail.
            if (x < 0.0) {
                const double e = std::exp(x / im.scale);
                return e / (1.0 + e);
            }
            return 1.0 / (1.0 + std::exp(-x / im.scale));
        }
        case Family::kHyperbolicSecant: {
            const double t = (2.0 / kPi) * std::atan(std::exp(-kPi * std::fabs(x) / 2.0));
            return x < 0.0 ? t : 1.0 - t;
        }
        case Family::kSin2Custom: {
            const double t = im.sin2_cdf_neg(-std::fabs(x));
            return x < 0.0 ? t : 1.0 - t;
        }
    }
    return 0.0;
}

double BaseDensity::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in (0,1)");
    if (p == 0.5) return 0.0;
    const Impl& im = *impl_;
    const bool upper = p > 0.5;
    const double pl = upper ? 1.0 - p : p;  // lower-half target, <= 1/2
    double xl = 0.0;
    switch (im.family) {
        case Family::kGgd: {
            // Newton on the cdf over a doubling bracket.
            double lo = -1.0;
            while (cdf(lo) > pl) {
                lo *= 2.0;
                if (lo < -1e6) throw ConvergenceError("ggd quantile: bracket expansion failed");
            }
            const auto f = [&](double x) { return cdf(x) - pl; };
            const auto df = [&](double x) { return pdf(x); };
            xl = roots::newton_bisect(f, df, lo, 0.0, 0.5 * lo);
            break;
        }
        case Family::kLogistic:
            xl = im.scale * (std::log(pl) - std::log1p(-pl));
            break;
        case Family::kHyperbolicSecant:
            xl = (2.0 / kPi) * std::log(std::tan(kPi * pl / 2.0));
            break;
        case Family::kSin2Custom:
            xl = im.sin2_quantile_low(pl);
            break;
    }
    return upper ? -xl : xl;
}

double BaseDensity::sample(RngStream& rng) const {
    const Impl& im = *impl_;
    switch (im.family) {
        case Family::kGgd: {
            const bool neg = (rng.next_u64() >> 63) != 0;
            const double g = rng.next_gamma(1.0 / im.beta);
            const double mag = im.alpha * std::pow(g, 1.0 / im.beta);
            return neg ? -mag : mag;
        }
        case Family::kLogistic:
        case Family::kHyperbolicSecant:
        case Family::kSin2Custom:
            return quantile(rng.next_unit());
    }
    return 0.0;
}

// ---------------------------------------------------------------------------

ScaleLocationModel::ScaleLocationModel(BaseDensity d, double mu_, double sigma_)
    : base(std::move(d)), mu(mu_), sigma(sigma_) {
    if (!(sigma > 0.0)) throw DomainError("ScaleLocationModel: sigma must be positive");
}

double ScaleLocationModel::pdf(double x) const { return base.pdf((x - mu) / sigma) / sigma; }
double ScaleLocationModel::cdf(double x) const { return base.cdf((x - mu) / sigma); }
double ScaleLocationModel::quantile(double p) const { return mu + sigma * base.quantile(p); }

}  // namespace onebit
