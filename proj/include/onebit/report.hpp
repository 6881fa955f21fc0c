#pragma once

#include <string>
#include <vector>

#include "onebit/sim.hpp"
#include "onebit/theory.hpp"

namespace onebit {

// Formats v with exactly `sig` significant digits, keeping trailing zeros
// (fixed notation when the exponent allows, scientific otherwise).
std::string format_sig(double v, int sig = 10);

// Constants table, one row per density, declaration order preserved.
// Header: dist,beta,f0,x_star,h_star,T,alpha_star,c_non,c_adapt,ratio
void write_constants_csv(const std::vector<TheoryConstants>& rows,
                         const std::string& path);
std::string constants_csv_string(const std::vector<TheoryConstants>& rows);

// Simulation reports as JSON (lossless round trip, schema-versioned).
void write_sim_json(const SimReport& report, const std::string& path);
SimReport read_sim_json(const std::string& path);
std::string sim_json_string(const SimReport& report);
SimReport sim_from_json_string(const std::string& text);

// Plot-ready per-cell CSV of a simulation report.
void write_sim_csv(const SimReport& report, const std::string& path);
std::string sim_csv_string(const SimReport& report);

// Beta sweep table: beta,c_non,c_adapt,ratio[,empirical_n_mse]
void write_beta_sweep_csv(const std::vector<BetaRow>& rows, const std::string& path);
std::string beta_sweep_csv_string(const std::vector<BetaRow>& rows);

}  // namespace onebit
