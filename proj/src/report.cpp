#include "onebit/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "onebit/errors.hpp"

namespace onebit {

namespace {

using nlohmann::json;

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << text;
    if (!os) throw IoError("write failed: " + path);
}

std::string protocol_kind_name(ProtocolKind k) {
    switch (k) {
        case ProtocolKind::kNonAdaptive: return "nonadaptive";
        case ProtocolKind::kAdaptive: return "adaptive";
        case ProtocolKind::kMultiThreshold: return "multithreshold";
    }
    return "?";
}

ProtocolKind protocol_kind_from(const std::string& s) {
    if (s == "nonadaptive") return ProtocolKind::kNonAdaptive;
    if (s == "adaptive") return ProtocolKind::kAdaptive;
    if (s == "multithreshold") return ProtocolKind::kMultiThreshold;
    throw SchemaError("unknown protocol kind: " + s);
}

json protocol_to_json(const ProtocolChoice& p) {
    json j;
    j["kind"] = protocol_kind_name(p.kind);
    switch (p.kind) {
        case ProtocolKind::kNonAdaptive:
            j["theta1"] = p.nonadaptive.theta1;
            j["theta2"] = p.nonadaptive.theta2;
            j["k1"] = p.nonadaptive.k1;
            break;
        case ProtocolKind::kAdaptive:
            j["theta1"] = p.adaptive.theta1;
            j["theta2"] = p.adaptive.theta2;
            j["split_kind"] =
                p.adaptive.split.kind == SplitRule::Kind::kTheorem ? "theorem" : "fixed";
            j["split_k1"] = p.adaptive.split.k1;
            j["split_k2"] = p.adaptive.split.k2;
            break;
        case ProtocolKind::kMultiThreshold:
            j["m"] = p.multi.m;
            j["delta"] = p.multi.delta;
            break;
    }
    return j;
}

ProtocolChoice protocol_from_json(const json& j) {
    ProtocolChoice p;
    p.kind = protocol_kind_from(j.at("kind").get<std::string>());
    switch (p.kind) {
        case ProtocolKind::kNonAdaptive:
            p.nonadaptive.theta1 = j.at("theta1").get<double>();
            p.nonadaptive.theta2 = j.at("theta2").get<double>();
            p.nonadaptive.k1 = j.at("k1").get<double>();
            break;
        case ProtocolKind::kAdaptive:
            p.adaptive.theta1 = j.at("theta1").get<double>();
            p.adaptive.theta2 = j.at("theta2").get<double>();
            p.adaptive.split.kind = j.at("split_kind").get<std::string>() == "theorem"
                                        ? SplitRule::Kind::kTheorem
                                        : SplitRule::Kind::kFixedFractions;
            p.adaptive.split.k1 = j.at("split_k1").get<double>();
            p.adaptive.split.k2 = j.at("split_k2").get<double>();
            break;
        case ProtocolKind::kMultiThreshold:
            p.multi.m = j.at("m").get<int>();
            p.multi.delta = j.at("delta").get<double>();
            break;
    }
    return p;
}

json cell_to_json(const SimCell& c) {
    json j;
    j["n"] = c.n;
    j["mu"] = c.mu;
    j["mse_mean"] = c.mse_mean;
    j["mse_stderr"] = c.mse_stderr;
    j["sigma_mse_mean"] = c.sigma_mse_mean;
    j["sigma_mse_stderr"] = c.sigma_mse_stderr;
    j["mu_hat_mean"] = c.mu_hat_mean;
    j["mu_hat_stderr"] = c.mu_hat_stderr;
    j["trial_failures"] = c.trial_failures;
    j["clip_events"] = c.clip_events;
    j["clip_rate"] = c.clip_rate;
    j["bias_flag"] = c.bias_flag;
    j["theory_n_mse_mu"] = c.theory_n_mse_mu;
    j["theory_n_mse_sigma"] = c.theory_n_mse_sigma;
    j["mt_bias_bound"] = c.mt_bias_bound;
    return j;
}

SimCell cell_from_json(const json& j) {
    SimCell c;
    c.n = j.at("n").get<long>();
    c.mu = j.at("mu").get<double>();
    c.mse_mean = j.at("mse_mean").get<double>();
    c.mse_stderr = j.at("mse_stderr").get<double>();
    c.sigma_mse_mean = j.at("sigma_mse_mean").get<double>();
    c.sigma_mse_stderr = j.at("sigma_mse_stderr").get<double>();
    c.mu_hat_mean = j.at("mu_hat_mean").get<double>();
    c.mu_hat_stderr = j.at("mu_hat_stderr").get<double>();
    c.trial_failures = j.at("trial_failures").get<long>();
    c.clip_events = j.at("clip_events").get<long>();
    c.clip_rate = j.at("clip_rate").get<double>();
    c.bias_flag = j.at("bias_flag").get<bool>();
    c.theory_n_mse_mu = j.at("theory_n_mse_mu").get<double>();
    c.theory_n_mse_sigma = j.at("theory_n_mse_sigma").get<double>();
    c.mt_bias_bound = j.at("mt_bias_bound").get<double>();
    return c;
}

}  // namespace

std::string format_sig(double v, int sig) {
    if (std::isnan(v)) return "";
    if (v == 0.0) return "0";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*e", sig - 1, v);
    // Recover the decimal exponent to decide between fixed and scientific.
    const std::string sci(buf);
    const auto epos = sci.find('e');
    const int expo = std::stoi(sci.substr(epos + 1));
    if (expo >= -4 && expo < sig) {
        const int decimals = sig - 1 - expo;
        std::snprintf(buf, sizeof(buf), "%.*f", decimals < 0 ? 0 : decimals, v);
        return buf;
    }
    return sci;
}

std::string constants_csv_string(const std::vector<TheoryConstants>& rows) {
    std::ostringstream os;
    os << "dist,beta,f0,x_star,h_star,T,alpha_star,c_non,c_adapt,ratio\n";
    for (const TheoryConstants& r : rows) {
        os << r.dist_id << ',' << format_sig(r.beta) << ',' << format_sig(r.f0) << ','
           << format_sig(r.x_star) << ',' << format_sig(r.h_star) << ','
           << format_sig(r.t_constant) << ',' << format_sig(r.alpha_star) << ','
           << format_sig(r.c_non) << ',' << format_sig(r.c_adapt) << ','
           << format_sig(r.c_non / r.c_adapt) << '\n';
    }
    return os.str();
}

void write_constants_csv(const std::vector<TheoryConstants>& rows,
                         const std::string& path) {
    write_text_file(path, constants_csv_string(rows));
}

std::string sim_json_string(const SimReport& report) {
    json j;
    j["schema_version"] = report.schema_version;
    j["code_version"] = report.code_version;
    json cfg;
    cfg["dist"] = report.config.dist_id;
    cfg["beta"] = report.config.beta;
    cfg["protocol"] = protocol_to_json(report.config.protocol);
    cfg["mu_grid"] = report.config.mu_grid;
    cfg["sigma"] = report.config.sigma;
    cfg["n_values"] = report.config.n_values;
    cfg["n_trials"] = report.config.n_trials;
    cfg["master_seed"] = report.config.master_seed;
    cfg["mu_min"] = report.config.mu_min;
    cfg["mu_max"] = report.config.mu_max;
    cfg["salt"] = report.config.salt;
    j["config"] = cfg;
    j["config_hash"] = report.config_hash;
    j["c_non"] = report.c_non;
    j["c_adapt"] = report.c_adapt;
    json cells = json::array();
    for (const SimCell& c : report.cells) cells.push_back(cell_to_json(c));
    j["cells"] = cells;
    json aggs = json::array();
    for (const SimAggregate& a : report.aggregates) {
        json ja;
        ja["n"] = a.n;
        ja["worst_case_mse"] = a.worst_case_mse;
        ja["worst_case_mu"] = a.worst_case_mu;
        ja["average_mse"] = a.average_mse;
        aggs.push_back(ja);
    }
    j["aggregates"] = aggs;
    return j.dump(2) + "\n";
}

SimReport sim_from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("report parse error: ") + e.what());
    }
    try {
        SimReport r;
        r.schema_version = j.at("schema_version").get<std::string>();
        if (r.schema_version != kReportSchemaVersion) {
            throw SchemaError("unsupported report schema version: " + r.schema_version);
        }
        r.code_version = j.at("code_version").get<std::string>();
        const json& cfg = j.at("config");
        r.config.dist_id = cfg.at("dist").get<std::string>();
        r.config.beta = cfg.at("beta").get<double>();
        r.config.protocol = protocol_from_json(cfg.at("protocol"));
        r.config.mu_grid = cfg.at("mu_grid").get<std::vector<double>>();
        r.config.sigma = cfg.at("sigma").get<double>();
        r.config.n_values = cfg.at("n_values").get<std::vector<long>>();
        r.config.n_trials = cfg.at("n_trials").get<long>();
        r.config.master_seed = cfg.at("master_seed").get<std::uint64_t>();
        r.config.mu_min = cfg.at("mu_min").get<double>();
        r.config.mu_max = cfg.at("mu_max").get<double>();
        r.config.salt = cfg.at("salt").get<std::uint64_t>();
        r.config_hash = j.at("config_hash").get<std::uint64_t>();
        r.c_non = j.at("c_non").get<double>();
        r.c_adapt = j.at("c_adapt").get<double>();
        for (const json& jc : j.at("cells")) r.cells.push_back(cell_from_json(jc));
        for (const json& ja : j.at("aggregates")) {
            SimAggregate a;
            a.n = ja.at("n").get<long>();
            a.worst_case_mse = ja.at("worst_case_mse").get<double>();
            a.worst_case_mu = ja.at("worst_case_mu").get<double>();
            a.average_mse = ja.at("average_mse").get<double>();
            r.aggregates.push_back(a);
        }
        return r;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("report field error: ") + e.what());
    }
}

void write_sim_json(const SimReport& report, const std::string& path) {
    write_text_file(path, sim_json_string(report));
}

SimReport read_sim_json(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return sim_from_json_string(buf.str());
}

std::string sim_csv_string(const SimReport& report) {
    std::ostringstream os;
    os << "n,mu,mse_mean,mse_stderr,n_mse,sigma_mse_mean,sigma_mse_stderr,"
          "theory_n_mse_mu,theory_n_mse_sigma,trial_failures,clip_rate\n";
    for (const SimCell& c : report.cells) {
        os << c.n << ',' << format_sig(c.mu) << ',' << format_sig(c.mse_mean) << ','
           << format_sig(c.mse_stderr) << ','
           << format_sig(c.mse_mean * static_cast<double>(c.n)) << ','
           << format_sig(c.sigma_mse_mean) << ',' << format_sig(c.sigma_mse_stderr) << ','
           << format_sig(c.theory_n_mse_mu) << ',' << format_sig(c.theory_n_mse_sigma)
           << ',' << c.trial_failures << ',' << format_sig(c.clip_rate) << '\n';
    }
    return os.str();
}

void write_sim_csv(const SimReport& report, const std::string& path) {
    write_text_file(path, sim_csv_string(report));
}

std::string beta_sweep_csv_string(const std::vector<BetaRow>& rows) {
    std::ostringstream os;
    os << "beta,c_non,c_adapt,ratio,empirical_n_mse\n";
    for (const BetaRow& r : rows) {
        os << format_sig(r.beta) << ',' << format_sig(r.c_non) << ','
           << format_sig(r.c_adapt) << ',' << format_sig(r.ratio) << ','
           << (r.empirical_n_mse ? format_sig(*r.empirical_n_mse) : "") << '\n';
    }
    return os.str();
}

void write_beta_sweep_csv(const std::vector<BetaRow>& rows, const std::string& path) {
    write_text_file(path, beta_sweep_csv_string(rows));
}

}  // namespace onebit
