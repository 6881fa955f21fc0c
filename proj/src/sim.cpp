#include "onebit/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "onebit/errors.hpp"
#include "onebit/theory.hpp"

namespace onebit {

namespace {

struct TrialOut {
    double mu_hat = 0.0;
    double sigma_hat = 0.0;
    bool has_sigma = false;
    int clips = 0;
    bool failed = false;
};

int resolve_workers(int workers) {
    if (workers > 0) return workers;
    if (const char* env = std::getenv("ONEBIT_DME_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

TrialOut run_nonadaptive_trial(const ScaleLocationModel& model,
                               const NonAdaptiveConfig& cfg, long n, RngStream& rng) {
    const long n1 = std::llround(cfg.k1 * static_cast<double>(n));
    const long n2 = n - n1;
    long ones1 = 0, ones2 = 0;
    for (long i = 0; i < n1; ++i) {
        ones1 += encode_threshold(model.sample(rng), cfg.theta1);
    }
    for (long i = 0; i < n2; ++i) {
        ones2 += encode_threshold(model.sample(rng), cfg.theta2);
    }
    TrialOut out;
    try {
        const EstimateResult r = nonadaptive_decode(ones1, n1, ones2, n2, cfg, model.base);
        out.mu_hat = r.mu_hat;
        out.sigma_hat = *r.sigma_hat;
        out.has_sigma = true;
        out.clips = r.clip_count();
    } catch (const DegenerateQuantiles&) {
        out.failed = true;
    }
    return out;
}

TrialOut run_adaptive_trial(const ScaleLocationModel& model, const AdaptiveConfig& cfg,
                            long n, RngStream& rng) {
    const Split s = split_solver(n, cfg.split);
    long ones1 = 0, ones2 = 0;
    for (long i = 0; i < s.n1; ++i) {
        ones1 += encode_threshold(model.sample(rng), cfg.theta1);
    }
    for (long i = 0; i < s.n2; ++i) {
        ones2 += encode_threshold(model.sample(rng), cfg.theta2);
    }
    TrialOut out;
    try {
        const NonAdaptiveConfig round1{cfg.theta1, cfg.theta2,
                                       static_cast<double>(s.n1) / (s.n1 + s.n2)};
        const EstimateResult coarse =
            nonadaptive_decode(ones1, s.n1, ones2, s.n2, round1, model.base);
        long ones3 = 0;
        for (long i = 0; i < s.n3; ++i) {
            ones3 += encode_threshold(model.sample(rng), coarse.mu_hat);
        }
        const EstimateResult fin = adaptive_decode_round2(coarse, ones3, s.n3, model.base);
        out.mu_hat = fin.mu_hat;
        out.clips = fin.clip_count();
    } catch (const DegenerateQuantiles&) {
        out.failed = true;
    }
    return out;
}

TrialOut run_multi_threshold_trial(const ScaleLocationModel& model,
                                   const MultiThresholdConfig& cfg, long n,
                                   RngStream& rng) {
    const long groups = 2L * cfg.m;
    if (n % groups != 0) {
        throw ConfigError("run_experiment: n not divisible by 2m");
    }
    const long k = n / groups;
    double pos = 0.0, neg = 0.0;
    for (int j = -cfg.m; j <= cfg.m; ++j) {
        if (j == 0) continue;
        const double mid = cfg.midpoint(j);
        long ones = 0;
        if (j < 0) {
            for (long i = 0; i < k; ++i) ones += model.sample(rng) < mid ? 1 : 0;
            neg += static_cast<double>(ones) / k;
        } else {
            for (long i = 0; i < k; ++i) ones += model.sample(rng) > mid ? 1 : 0;
            pos += static_cast<double>(ones) / k;
        }
    }
    TrialOut out;
    out.mu_hat = cfg.delta * (pos - neg);
    return out;
}

void fill_theory(SimCell& cell, const ExperimentConfig& cfg, const BaseDensity& d) {
    switch (cfg.protocol.kind) {
        case ProtocolKind::kNonAdaptive: {
            const auto th =
                mse_nonadaptive_asymptotic(cfg.protocol.nonadaptive, d, cell.mu, cfg.sigma);
            cell.theory_n_mse_mu = th.n_mse_mu;
            cell.theory_n_mse_sigma = th.n_mse_sigma;
            break;
        }
        case ProtocolKind::kAdaptive:
            cell.theory_n_mse_mu = mse_adaptive_asymptotic(d, cfg.sigma);
            break;
        case ProtocolKind::kMultiThreshold: {
            const auto th = multi_threshold_theory(cfg.protocol.multi, d, cell.mu,
                                                   cfg.sigma, cell.n);
            cell.theory_n_mse_mu = th.variance_exact * static_cast<double>(cell.n);
            cell.mt_bias_bound = th.bias_bound;
            break;
        }
    }
}

struct Moments {
    double mean = 0.0;
    double stderr_of_mean = 0.0;
};

Moments reduce(const std::vector<double>& xs) {
    Moments m;
    if (xs.empty()) return m;
    double sum = 0.0;
    for (double v : xs) sum += v;
    m.mean = sum / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double v : xs) ss += (v - m.mean) * (v - m.mean);
    if (xs.size() > 1) {
        m.stderr_of_mean =
            std::sqrt(ss / static_cast<double>(xs.size() - 1) /
                      static_cast<double>(xs.size()));
    }
    return m;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (mu_grid.empty()) throw ConfigError("ExperimentConfig: empty mu grid");
    if (n_values.empty()) throw ConfigError("ExperimentConfig: empty n list");
    if (n_trials < 1) throw ConfigError("ExperimentConfig: n_trials >= 1");
    if (!(sigma > 0.0)) throw ConfigError("ExperimentConfig: sigma > 0");
    for (double mu : mu_grid) {
        if (mu < mu_min - 1e-12 || mu > mu_max + 1e-12) {
            throw ConfigError("ExperimentConfig: mu grid escapes [mu_min, mu_max]");
        }
    }
}

BaseDensity density_from_name(const std::string& id, double beta) {
    if (id == "ggd") return BaseDensity::ggd(beta);
    if (id == "logistic") return BaseDensity::logistic();
    if (id == "hypsecant") return BaseDensity::hyperbolic_secant();
    if (id == "sin2") return BaseDensity::sin2_custom();
    throw ConfigError("unknown density id: " + id);
}

std::pair<double, double> equal_thirds_thresholds(double mu_min, double mu_max) {
    if (!(mu_min < mu_max)) throw DomainError("equal_thirds_thresholds: empty range");
    const double span = mu_max - mu_min;
    return {mu_min + span / 3.0, mu_min + 2.0 * span / 3.0};
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << cfg.dist_id << '|' << cfg.beta << '|' << static_cast<int>(cfg.protocol.kind)
       << '|';
    switch (cfg.protocol.kind) {
        case ProtocolKind::kNonAdaptive:
            os << cfg.protocol.nonadaptive.theta1 << ',' << cfg.protocol.nonadaptive.theta2
               << ',' << cfg.protocol.nonadaptive.k1;
            break;
        case ProtocolKind::kAdaptive:
            os << cfg.protocol.adaptive.theta1 << ',' << cfg.protocol.adaptive.theta2 << ','
               << static_cast<int>(cfg.protocol.adaptive.split.kind) << ','
               << cfg.protocol.adaptive.split.k1 << ',' << cfg.protocol.adaptive.split.k2;
            break;
        case ProtocolKind::kMultiThreshold:
            os << cfg.protocol.multi.m << ',' << cfg.protocol.multi.delta;
            break;
    }
    os << '|';
    for (double mu : cfg.mu_grid) os << mu << ',';
    os << '|' << cfg.sigma << '|';
    for (long n : cfg.n_values) os << n << ',';
    os << '|' << cfg.n_trials << '|' << cfg.master_seed << '|' << cfg.mu_min << ','
       << cfg.mu_max << '|' << cfg.salt;
    const std::string s = os.str();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

SimReport run_experiment(const ExperimentConfig& cfg, int workers) {
    cfg.validate();
    const int nworkers = resolve_workers(workers);
    const BaseDensity d = density_from_name(cfg.dist_id, cfg.beta);

    SimReport report;
    report.config = cfg;
    report.config_hash = config_hash(cfg);
    {
        const TheoryConstants tc = constants_for(d);
        report.c_non = tc.c_non;
        report.c_adapt = tc.c_adapt;
    }

    // Validate protocol/n compatibility up front; worker threads must not
    // throw anything other than per-trial estimation failures.
    for (long n : cfg.n_values) {
        switch (cfg.protocol.kind) {
            case ProtocolKind::kNonAdaptive: {
                cfg.protocol.nonadaptive.validate();
                const long n1 = std::llround(cfg.protocol.nonadaptive.k1 *
                                             static_cast<double>(n));
                if (n1 < 1 || n - n1 < 1) {
                    throw ConfigError("run_experiment: split leaves an empty group");
                }
                break;
            }
            case ProtocolKind::kAdaptive:
                cfg.protocol.adaptive.validate();
                (void)split_solver(n, cfg.protocol.adaptive.split);
                break;
            case ProtocolKind::kMultiThreshold:
                cfg.protocol.multi.validate();
                if (n % (2L * cfg.protocol.multi.m) != 0) {
                    throw ConfigError("run_experiment: n not divisible by 2m");
                }
                break;
        }
    }

    for (std::size_t i_n = 0; i_n < cfg.n_values.size(); ++i_n) {
        const long n = cfg.n_values[i_n];
        SimAggregate agg;
        agg.n = n;
        double mse_sum = 0.0;
        for (std::size_t i_mu = 0; i_mu < cfg.mu_grid.size(); ++i_mu) {
            const double mu = cfg.mu_grid[i_mu];
            const ScaleLocationModel model(d, mu, cfg.sigma);

            std::vector<TrialOut> trials(static_cast<std::size_t>(cfg.n_trials));
            const auto worker = [&](int w) {
                for (long t = w; t < cfg.n_trials; t += nworkers) {
                    RngStream rng = derive_stream(
                        cfg.master_seed,
                        {cfg.salt, static_cast<std::uint64_t>(i_n),
                         static_cast<std::uint64_t>(i_mu), static_cast<std::uint64_t>(t)});
                    switch (cfg.protocol.kind) {
                        case ProtocolKind::kNonAdaptive:
                            trials[t] = run_nonadaptive_trial(model, cfg.protocol.nonadaptive,
                                                              n, rng);
                            break;
                        case ProtocolKind::kAdaptive:
                            trials[t] =
                                run_adaptive_trial(model, cfg.protocol.adaptive, n, rng);
                            break;
                        case ProtocolKind::kMultiThreshold:
                            trials[t] = run_multi_threshold_trial(
                                model, cfg.protocol.multi, n, rng);
                            break;
                    }
                }
            };
            if (nworkers <= 1) {
                worker(0);
            } else {
                std::vector<std::thread> pool;
                pool.reserve(nworkers);
                for (int w = 0; w < nworkers; ++w) pool.emplace_back(worker, w);
                for (auto& th : pool) th.join();
            }

            SimCell cell;
            cell.n = n;
            cell.mu = mu;
            std::vector<double> sq_err, sq_err_sigma, mu_hats;
            sq_err.reserve(trials.size());
            for (const TrialOut& t : trials) {
                if (t.failed) {
                    ++cell.trial_failures;
                    continue;
                }
                cell.clip_events += t.clips;
                sq_err.push_back((t.mu_hat - mu) * (t.mu_hat - mu));
                mu_hats.push_back(t.mu_hat);
                if (t.has_sigma) {
                    sq_err_sigma.push_back((t.sigma_hat - cfg.sigma) *
                                           (t.sigma_hat - cfg.sigma));
                }
            }
            const double fail_rate =
                static_cast<double>(cell.trial_failures) / static_cast<double>(cfg.n_trials);
            if (fail_rate > 0.01) {
                std::ostringstream msg;
                msg << "run_experiment: trial failure rate " << fail_rate
                    << " exceeds 1% at n=" << n << " mu=" << mu;
                throw ConfigError(msg.str());
            }
            const Moments me = reduce(sq_err);
            cell.mse_mean = me.mean;
            cell.mse_stderr = me.stderr_of_mean;
            const Moments ms = reduce(sq_err_sigma);
            cell.sigma_mse_mean = ms.mean;
            cell.sigma_mse_stderr = ms.stderr_of_mean;
            const Moments mh = reduce(mu_hats);
            cell.mu_hat_mean = mh.mean;
            cell.mu_hat_stderr = mh.stderr_of_mean;
            cell.bias_flag = std::fabs(mh.mean - mu) > 4.0 * mh.stderr_of_mean;
            const long fractions_per_trial =
                cfg.protocol.kind == ProtocolKind::kAdaptive ? 3
                : cfg.protocol.kind == ProtocolKind::kNonAdaptive ? 2 : 0;
            if (fractions_per_trial > 0) {
                cell.clip_rate = static_cast<double>(cell.clip_events) /
                                 static_cast<double>(fractions_per_trial *
                                                     (cfg.n_trials - cell.trial_failures));
            }
            fill_theory(cell, cfg, d);
            report.cells.push_back(cell);

            mse_sum += cell.mse_mean;
            if (cell.mse_mean > agg.worst_case_mse) {
                agg.worst_case_mse = cell.mse_mean;
                agg.worst_case_mu = mu;
            }
        }
        agg.average_mse = mse_sum / static_cast<double>(cfg.mu_grid.size());
        report.aggregates.push_back(agg);
    }
    return report;
}

std::vector<SimReport> sweep_splits(const ExperimentConfig& base,
                                    const std::vector<SplitRule>& splits, int workers) {
    std::vector<SimReport> out;
    out.reserve(splits.size());
    for (std::size_t i = 0; i < splits.size(); ++i) {
        ExperimentConfig cfg = base;
        cfg.salt = i;
        if (cfg.protocol.kind == ProtocolKind::kAdaptive) {
            cfg.protocol.adaptive.split = splits[i];
        } else if (cfg.protocol.kind == ProtocolKind::kNonAdaptive) {
            if (splits[i].kind != SplitRule::Kind::kFixedFractions ||
                std::fabs(splits[i].k1 + splits[i].k2 - 1.0) > 1e-9) {
                throw ConfigError("sweep_splits: non-adaptive splits need k1 + k2 = 1");
            }
            cfg.protocol.nonadaptive.k1 = splits[i].k1;
        } else {
            throw ConfigError("sweep_splits: protocol has no split parameter");
        }
        out.push_back(run_experiment(cfg, workers));
    }
    return out;
}

std::vector<BetaRow> sweep_beta(const std::vector<double>& beta_grid,
                                const SweepBetaOptions& opts) {
    std::vector<BetaRow> rows;
    rows.reserve(beta_grid.size());
    for (std::size_t i = 0; i < beta_grid.size(); ++i) {
        const double beta = beta_grid[i];
        const TheoryConstants tc = constants_for(BaseDensity::ggd(beta));
        BetaRow row;
        row.beta = beta;
        row.c_non = tc.c_non;
        row.c_adapt = tc.c_adapt;
        row.ratio = tc.c_non / tc.c_adapt;
        if (opts.with_empirical) {
            ExperimentConfig cfg;
            cfg.dist_id = "ggd";
            cfg.beta = beta;
            cfg.protocol.kind = ProtocolKind::kAdaptive;
            const auto [t1, t2] = equal_thirds_thresholds(-2.5, 2.5);
            cfg.protocol.adaptive.theta1 = t1;
            cfg.protocol.adaptive.theta2 = t2;
            cfg.mu_grid = {opts.mu};
            cfg.sigma = opts.sigma;
            cfg.n_values = {opts.n};
            cfg.n_trials = opts.n_trials;
            cfg.master_seed = opts.master_seed;
            cfg.salt = i;
            const SimReport rep = run_experiment(cfg, opts.workers);
            row.empirical_n_mse =
                rep.cells.front().mse_mean * static_cast<double>(opts.n);
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace onebit
