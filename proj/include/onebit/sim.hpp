#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "onebit/density.hpp"
#include "onebit/protocols.hpp"

namespace onebit {

inline constexpr const char* kCodeVersion = "0.1.0";
inline constexpr const char* kReportSchemaVersion = "1";

// Builds a density from its short id ("ggd" needs beta, the rest ignore it).
BaseDensity density_from_name(const std::string& id, double beta = 0.0);

enum class ProtocolKind { kNonAdaptive, kAdaptive, kMultiThreshold };

struct ProtocolChoice {
    ProtocolKind kind = ProtocolKind::kNonAdaptive;
    NonAdaptiveConfig nonadaptive;
    AdaptiveConfig adaptive;
    MultiThresholdConfig multi;
};

struct ExperimentConfig {
    std::string dist_id = "ggd";
    double beta = 1.5;
    ProtocolChoice protocol;
    std::vector<double> mu_grid;
    double sigma = 2.0;
    std::vector<long> n_values;
    long n_trials = 2000;
    std::uint64_t master_seed = 1;
    double mu_min = -2.5, mu_max = 2.5;  // range the thresholds were derived from
    std::uint64_t salt = 0;              // split index for sweeps

    void validate() const;
};

struct SimCell {
    long n = 0;
    double mu = 0.0;
    double mse_mean = 0.0;
    double mse_stderr = 0.0;
    double sigma_mse_mean = 0.0;    // two-threshold protocol only
    double sigma_mse_stderr = 0.0;
    double mu_hat_mean = 0.0;
    double mu_hat_stderr = 0.0;
    long trial_failures = 0;
    long clip_events = 0;
    double clip_rate = 0.0;
    bool bias_flag = false;  // |mean(mu_hat) - mu| > 4 stderr (informational)
    double theory_n_mse_mu = 0.0;
    double theory_n_mse_sigma = 0.0;
    double mt_bias_bound = 0.0;  // multi-threshold only
};

struct SimAggregate {
    long n = 0;
    double worst_case_mse = 0.0;
    double worst_case_mu = 0.0;  // grid point attaining the worst case
    double average_mse = 0.0;
};

struct SimReport {
    std::string schema_version = kReportSchemaVersion;
    std::string code_version = kCodeVersion;
    ExperimentConfig config;
    std::uint64_t config_hash = 0;
    double c_non = 0.0;
    double c_adapt = 0.0;
    std::vector<SimCell> cells;          // ordered by (n index, mu index)
    std::vector<SimAggregate> aggregates;
};

// Deterministic Monte Carlo sweep over (n, mu, trial). Each trial derives its
// own stream from (master_seed, salt, n index, mu index, trial index), so the
// report is a pure function of the config for any worker count.
// workers <= 0 resolves from ONEBIT_DME_WORKERS, then hardware concurrency.
SimReport run_experiment(const ExperimentConfig& cfg, int workers = 0);

// One report per split; stream derivation is salted by the split index.
std::vector<SimReport> sweep_splits(const ExperimentConfig& base,
                                    const std::vector<SplitRule>& splits,
                                    int workers = 0);

struct BetaRow {
    double beta = 0.0;
    double c_non = 0.0;
    double c_adapt = 0.0;
    double ratio = 0.0;
    std::optional<double> empirical_n_mse;  // adaptive protocol, when requested
};

struct SweepBetaOptions {
    bool with_empirical = false;
    long n = 40000;
    long n_trials = 200;
    double mu = 0.3;
    double sigma = 2.0;
    std::uint64_t master_seed = 1;
    int workers = 0;
};

std::vector<BetaRow> sweep_beta(const std::vector<double>& beta_grid,
                                const SweepBetaOptions& opts = {});

// Equal-thirds threshold rule over a known mu range.
std::pair<double, double> equal_thirds_thresholds(double mu_min, double mu_max);

// FNV-1a hash of the canonical config serialization (stored in reports so
// data files identify the run that produced them).
std::uint64_t config_hash(const ExperimentConfig& cfg);

}  // namespace onebit
