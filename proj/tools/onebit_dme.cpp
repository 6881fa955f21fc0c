// Command-line front end: every subcommand reproduces one table or figure
// artifact (or exposes the underlying primitive) from the library.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "onebit/density.hpp"
#include "onebit/errors.hpp"
#include "onebit/report.hpp"
#include "onebit/sim.hpp"
#include "onebit/theory.hpp"

namespace {

using namespace onebit;

std::vector<double> parse_grid(const std::string& spec) {
    double lo = 0.0, hi = 0.0, step = 0.0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0.0) {
        throw CLI::ValidationError("--mu-grid", "expected min:max:step with step > 0");
    }
    std::vector<double> out;
    for (double x = lo; x <= hi + 1e-12; x += step) out.push_back(x);
    return out;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream os(out_path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + out_path);
    os << text;
}

struct DistOpts {
    std::string dist = "ggd";
    double beta = 1.5;
    bool beta_set = false;
};

void add_dist_options(CLI::App* cmd, DistOpts& o) {
    cmd->add_option("--dist", o.dist, "density family: ggd|logistic|hypsecant|sin2")
        ->check(CLI::IsMember({"ggd", "logistic", "hypsecant", "sin2"}));
    cmd->add_option("--beta", o.beta, "GGD shape parameter (required iff --dist ggd)")
        ->check(CLI::PositiveNumber)
        ->trigger_on_parse()
        ->each([&o](const std::string&) { o.beta_set = true; });
}

BaseDensity make_density(const DistOpts& o) {
    if (o.dist == "ggd" && !o.beta_set) {
        throw CLI::ValidationError("--beta", "required when --dist ggd");
    }
    if (o.dist != "ggd" && o.beta_set) {
        throw CLI::ValidationError("--beta", "only valid with --dist ggd");
    }
    return density_from_name(o.dist, o.beta);
}

int run(int argc, char** argv) {
    CLI::App app{"1-bit distributed mean estimation: protocols, constants, simulations"};
    app.require_subcommand(1);
    int workers = 0;
    app.add_option("--workers", workers,
                   "worker threads (default: ONEBIT_DME_WORKERS, then all cores); "
                   "results do not depend on it");

    // ---- constants ----------------------------------------------------------
    auto* c_constants = app.add_subcommand(
        "constants", "asymptotic constants for one density (one row of Table 2)");
    DistOpts constants_dist;
    add_dist_options(c_constants, constants_dist);
    std::string constants_out, constants_fmt = "csv";
    c_constants->add_option("--out", constants_out, "output path (default stdout)");
    c_constants->add_option("--format", constants_fmt, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));

    // ---- table1 -------------------------------------------------------------
    auto* c_table1 = app.add_subcommand(
        "table1", "numerical quantities of the sin2 density (Table 1)");
    std::string table1_out;
    c_table1->add_option("--out", table1_out, "output path (default stdout)");

    // ---- table2 -------------------------------------------------------------
    auto* c_table2 = app.add_subcommand(
        "table2", "adaptive vs non-adaptive constants for the four families (Table 2)");
    std::string table2_out;
    c_table2->add_option("--out", table2_out, "output path (default stdout)");

    // ---- crossing -----------------------------------------------------------
    auto* c_crossing = app.add_subcommand(
        "crossing", "GGD shape where c_non meets c_adapt, beta* ~ 1.85 (Figure 3)");
    double cross_lo = 1.1, cross_hi = 2.5;
    c_crossing->add_option("--lo", cross_lo, "bracket lower end");
    c_crossing->add_option("--hi", cross_hi, "bracket upper end");

    // ---- eta-check ----------------------------------------------------------
    auto* c_eta = app.add_subcommand(
        "eta-check", "shape condition for the adaptive lower bound (Theorem 5)");
    DistOpts eta_dist;
    add_dist_options(c_eta, eta_dist);

    // ---- hellinger-check ----------------------------------------------------
    auto* c_hell = app.add_subcommand(
        "hellinger-check",
        "Bernoulli-level Hellinger bound for threshold encoders (Theorem 8)");
    DistOpts hell_dist;
    add_dist_options(c_hell, hell_dist);
    std::vector<double> hell_eps = {1e-2, 1e-3};
    c_hell->add_option("--eps", hell_eps, "perturbation sizes");
    double hell_slack = 0.05;
    c_hell->add_option("--slack", hell_slack, "tolerance slack on the bound");

    // ---- simulate -----------------------------------------------------------
    auto* c_sim = app.add_subcommand(
        "simulate", "Monte Carlo MSE curves for one protocol (Figures 5-10)");
    DistOpts sim_dist;
    add_dist_options(c_sim, sim_dist);
    std::string sim_protocol = "nonadaptive";
    c_sim->add_option("--protocol", sim_protocol, "nonadaptive|adaptive|multithreshold")
        ->check(CLI::IsMember({"nonadaptive", "adaptive", "multithreshold"}));
    std::string sim_mu_grid = "-2.5:2.5:0.5";
    c_sim->add_option("--mu-grid", sim_mu_grid, "mu grid as min:max:step");
    std::string sim_mu_range = "-2.5:2.5";
    c_sim->add_option("--mu-range", sim_mu_range,
                      "known mu range for threshold placement, as min:max");
    double sim_sigma = 2.0;
    c_sim->add_option("--sigma", sim_sigma, "scale parameter")->check(CLI::PositiveNumber);
    std::vector<long> sim_n = {2500, 5000, 10000, 20000, 40000};
    c_sim->add_option("--n", sim_n, "user counts");
    long sim_trials = 2000;
    c_sim->add_option("--trials", sim_trials, "Monte Carlo trials per grid point");
    std::uint64_t sim_seed = 1;
    c_sim->add_option("--seed", sim_seed, "master seed");
    std::string sim_split = "theorem";
    c_sim->add_option("--split", sim_split,
                      "adaptive split: 'theorem' or k1:k2 fixed fractions");
    double sim_k1 = 0.5;
    c_sim->add_option("--k1", sim_k1, "non-adaptive fraction on theta1");
    int sim_m = 200;
    c_sim->add_option("--m", sim_m, "multi-threshold grid half-width");
    double sim_delta = 0.05;
    c_sim->add_option("--delta", sim_delta, "multi-threshold grid spacing");
    std::string sim_out, sim_fmt = "json";
    c_sim->add_option("--out", sim_out, "output path (default stdout)");
    c_sim->add_option("--format", sim_fmt, "json|csv")
        ->check(CLI::IsMember({"csv", "json"}));

    // ---- sweep-splits -------------------------------------------------------
    auto* c_sweep = app.add_subcommand(
        "sweep-splits", "MSE under a list of user splits (Figures 6-8)");
    DistOpts sweep_dist;
    add_dist_options(c_sweep, sweep_dist);
    std::string sweep_protocol = "nonadaptive";
    c_sweep->add_option("--protocol", sweep_protocol, "nonadaptive|adaptive")
        ->check(CLI::IsMember({"nonadaptive", "adaptive"}));
    std::string sweep_splits_arg = "0.10,0.90;0.20,0.80;0.30,0.70;0.40,0.60;0.50,0.50";
    c_sweep->add_option("--splits", sweep_splits_arg,
                        "semicolon-separated k1,k2 pairs ('theorem' allowed when adaptive)");
    std::string sweep_mu_grid = "-2.5:2.5:0.5";
    c_sweep->add_option("--mu-grid", sweep_mu_grid, "mu grid as min:max:step");
    std::string sweep_mu_range = "-2.5:2.5";
    c_sweep->add_option("--mu-range", sweep_mu_range,
                        "known mu range for threshold placement, as min:max");
    double sweep_sigma = 2.0;
    c_sweep->add_option("--sigma", sweep_sigma, "scale parameter");
    std::vector<long> sweep_n = {40000};
    c_sweep->add_option("--n", sweep_n, "user counts");
    long sweep_trials = 2000;
    c_sweep->add_option("--trials", sweep_trials, "trials per grid point");
    std::uint64_t sweep_seed = 1;
    c_sweep->add_option("--seed", sweep_seed, "master seed");
    std::string sweep_out;
    c_sweep->add_option("--out", sweep_out,
                        "output path prefix; one JSON per split (default stdout summary)");

    // ---- sweep-beta ---------------------------------------------------------
    auto* c_beta = app.add_subcommand(
        "sweep-beta", "constants ratio across GGD shapes (Figure 4)");
    std::string beta_grid_arg = "1.1:2.2:0.1";
    c_beta->add_option("--beta-grid", beta_grid_arg, "beta grid as min:max:step");
    bool beta_empirical = false;
    c_beta->add_flag("--empirical", beta_empirical, "add an empirical adaptive n*MSE column");
    long beta_trials = 200;
    c_beta->add_option("--trials", beta_trials, "trials for the empirical column");
    long beta_n = 40000;
    c_beta->add_option("--n", beta_n, "user count for the empirical column");
    std::uint64_t beta_seed = 1;
    c_beta->add_option("--seed", beta_seed, "master seed");
    std::string beta_out;
    c_beta->add_option("--out", beta_out, "output path (default stdout)");

    // Let --workers (and any other top-level flag) appear after the
    // subcommand name as well.
    for (CLI::App* sub : app.get_subcommands(
             [](const CLI::App*) { return true; })) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (c_constants->parsed()) {
        const TheoryConstants tc = constants_for(make_density(constants_dist));
        if (constants_fmt == "csv") {
            emit(constants_csv_string({tc}), constants_out);
        } else {
            std::ostringstream os;
            os << "{\n  \"dist\": \"" << tc.dist_id << "\",\n  \"beta\": "
               << (std::isnan(tc.beta) ? "null" : format_sig(tc.beta))
               << ",\n  \"f0\": " << format_sig(tc.f0) << ",\n  \"x_star\": "
               << format_sig(tc.x_star) << ",\n  \"h_star\": " << format_sig(tc.h_star)
               << ",\n  \"T\": " << format_sig(tc.t_constant) << ",\n  \"alpha_star\": "
               << format_sig(tc.alpha_star) << ",\n  \"c_non\": " << format_sig(tc.c_non)
               << ",\n  \"c_adapt\": " << format_sig(tc.c_adapt) << ",\n  \"ratio\": "
               << format_sig(tc.c_non / tc.c_adapt) << "\n}\n";
            emit(os.str(), constants_out);
        }
        return 0;
    }

    if (c_table1->parsed()) {
        const TheoryConstants tc = constants_for(BaseDensity::sin2_custom());
        std::ostringstream os;
        os << "z_std " << format_sig(tc.z) << "\n"
           << "f0 " << format_sig(tc.f0) << "\n"
           << "x_star " << format_sig(tc.x_star) << "\n"
           << "h_star " << format_sig(tc.h_star) << "\n"
           << "T " << format_sig(tc.t_constant) << "\n";
        emit(os.str(), table1_out);
        return 0;
    }

    if (c_table2->parsed()) {
        std::vector<TheoryConstants> rows;
        rows.push_back(constants_for(BaseDensity::ggd(1.5)));
        rows.push_back(constants_for(BaseDensity::logistic()));
        rows.push_back(constants_for(BaseDensity::hyperbolic_secant()));
        rows.push_back(constants_for(BaseDensity::sin2_custom()));
        emit(constants_csv_string(rows), table2_out);
        return 0;
    }

    if (c_crossing->parsed()) {
        const double beta_star = ggd_crossing(cross_lo, cross_hi);
        std::cout << "beta_star " << format_sig(beta_star, 5) << "\n";
        return 0;
    }

    if (c_eta->parsed()) {
        const BaseDensity d = make_density(eta_dist);
        const EtaCheckResult res = check_eta_condition(d);
        if (res.ok) {
            std::cout << d.name() << " eta-condition ok\n";
        } else {
            std::cout << d.name() << " eta-condition violated between "
                      << format_sig(res.x_prev, 6) << " and " << format_sig(res.x_next, 6)
                      << "\n";
        }
        return 0;
    }

    if (c_hell->parsed()) {
        const BaseDensity d = make_density(hell_dist);
        for (double eps : hell_eps) {
            HellingerCheckConfig cfg;
            cfg.epsilon = eps;
            cfg.tolerance_slack = hell_slack;
            const HellingerReport rep = check_hellinger_bound(d, cfg);
            std::cout << d.name() << " eps " << format_sig(eps, 3) << ": max H^2/eps^2 "
                      << format_sig(rep.max_ratio, 6) << " at theta "
                      << format_sig(rep.argmax_theta, 4) << ", bound "
                      << format_sig(rep.bound_constant, 6) << " -> ok\n";
        }
        return 0;
    }

    if (c_sim->parsed()) {
        ExperimentConfig cfg;
        cfg.dist_id = sim_dist.dist;
        cfg.beta = sim_dist.beta;
        if (cfg.dist_id == "ggd" && !sim_dist.beta_set) {
            throw CLI::ValidationError("--beta", "required when --dist ggd");
        }
        cfg.mu_grid = parse_grid(sim_mu_grid);
        if (std::sscanf(sim_mu_range.c_str(), "%lf:%lf", &cfg.mu_min, &cfg.mu_max) != 2) {
            throw CLI::ValidationError("--mu-range", "expected min:max");
        }
        cfg.sigma = sim_sigma;
        cfg.n_values = sim_n;
        cfg.n_trials = sim_trials;
        cfg.master_seed = sim_seed;
        const auto [t1, t2] = equal_thirds_thresholds(cfg.mu_min, cfg.mu_max);
        if (sim_protocol == "nonadaptive") {
            cfg.protocol.kind = ProtocolKind::kNonAdaptive;
            cfg.protocol.nonadaptive = {t1, t2, sim_k1};
        } else if (sim_protocol == "adaptive") {
            cfg.protocol.kind = ProtocolKind::kAdaptive;
            cfg.protocol.adaptive.theta1 = t1;
            cfg.protocol.adaptive.theta2 = t2;
            if (sim_split == "theorem") {
                cfg.protocol.adaptive.split = SplitRule::theorem();
            } else {
                double k1 = 0.0, k2 = 0.0;
                if (std::sscanf(sim_split.c_str(), "%lf:%lf", &k1, &k2) != 2) {
                    throw CLI::ValidationError("--split", "expected 'theorem' or k1:k2");
                }
                cfg.protocol.adaptive.split = SplitRule::fixed(k1, k2);
            }
        } else {
            cfg.protocol.kind = ProtocolKind::kMultiThreshold;
            cfg.protocol.multi = {sim_m, sim_delta};
        }
        const SimReport rep = run_experiment(cfg, workers);
        emit(sim_fmt == "json" ? sim_json_string(rep) : sim_csv_string(rep), sim_out);
        return 0;
    }

    if (c_sweep->parsed()) {
        ExperimentConfig base;
        base.dist_id = sweep_dist.dist;
        base.beta = sweep_dist.beta;
        if (base.dist_id == "ggd" && !sweep_dist.beta_set) {
            throw CLI::ValidationError("--beta", "required when --dist ggd");
        }
        base.mu_grid = parse_grid(sweep_mu_grid);
        if (std::sscanf(sweep_mu_range.c_str(), "%lf:%lf", &base.mu_min, &base.mu_max) !=
            2) {
            throw CLI::ValidationError("--mu-range", "expected min:max");
        }
        base.sigma = sweep_sigma;
        base.n_values = sweep_n;
        base.n_trials = sweep_trials;
        base.master_seed = sweep_seed;
        const auto [t1, t2] = equal_thirds_thresholds(base.mu_min, base.mu_max);
        std::vector<SplitRule> rules;
        {
            std::istringstream ss(sweep_splits_arg);
            std::string tok;
            while (std::getline(ss, tok, ';')) {
                if (tok == "theorem") {
                    rules.push_back(SplitRule::theorem());
                    continue;
                }
                double k1 = 0.0, k2 = 0.0;
                if (std::sscanf(tok.c_str(), "%lf,%lf", &k1, &k2) != 2) {
                    throw CLI::ValidationError("--splits", "expected k1,k2;k1,k2;...");
                }
                rules.push_back(SplitRule::fixed(k1, k2));
            }
        }
        if (sweep_protocol == "nonadaptive") {
            base.protocol.kind = ProtocolKind::kNonAdaptive;
            base.protocol.nonadaptive = {t1, t2, 0.5};
        } else {
            base.protocol.kind = ProtocolKind::kAdaptive;
            base.protocol.adaptive.theta1 = t1;
            base.protocol.adaptive.theta2 = t2;
        }
        const std::vector<SimReport> reports = sweep_splits(base, rules, workers);
        for (std::size_t i = 0; i < reports.size(); ++i) {
            if (!sweep_out.empty()) {
                std::ostringstream path;
                path << sweep_out << ".split" << i << ".json";
                write_sim_json(reports[i], path.str());
            }
            for (const SimAggregate& a : reports[i].aggregates) {
                std::cout << "split " << i << " n " << a.n << " worst_case_n_mse "
                          << format_sig(a.worst_case_mse * static_cast<double>(a.n), 6)
                          << " (at mu " << format_sig(a.worst_case_mu, 4) << ") avg_n_mse "
                          << format_sig(a.average_mse * static_cast<double>(a.n), 6)
                          << "\n";
            }
        }
        return 0;
    }

    if (c_beta->parsed()) {
        double lo = 0.0, hi = 0.0, step = 0.0;
        if (std::sscanf(beta_grid_arg.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 ||
            step <= 0.0) {
            throw CLI::ValidationError("--beta-grid", "expected min:max:step");
        }
        std::vector<double> grid;
        for (double b = lo; b <= hi + 1e-12; b += step) grid.push_back(b);
        SweepBetaOptions opts;
        opts.with_empirical = beta_empirical;
        opts.n = beta_n;
        opts.n_trials = beta_trials;
        opts.master_seed = beta_seed;
        opts.workers = workers;
        const std::vector<BetaRow> rows = sweep_beta(grid, opts);
        emit(beta_sweep_csv_string(rows), beta_out);
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const onebit::ConvergenceError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const onebit::BoundViolation& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const onebit::BracketError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const onebit::DegenerateQuantiles& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
