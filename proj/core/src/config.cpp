#include "baesim/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "baesim/errors.hpp"

namespace baesim {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

Config parse_config(const std::string& text, const std::string& origin) {
    Config cfg;
    std::vector<std::string> errors;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;

    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) {
            errors.push_back(origin + ":" + std::to_string(lineno) + ": empty key or value");
            continue;
        }
        if (cfg.raw.count(key)) {
            errors.push_back(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
            continue;
        }
        cfg.raw[key] = val;
    }

    auto num = [&](const std::string& key, std::optional<double>& out) {
        auto it = cfg.raw.find(key);
        if (it == cfg.raw.end()) return;
        try {
            size_t pos = 0;
            const double x = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
            out = x;
        } catch (const std::exception&) {
            errors.push_back(origin + ": key '" + key + "': not a number: '" + it->second + "'");
        }
    };
    auto require = [&](const std::string& key, double& dst, bool angular) {
        std::optional<double> x;
        num(key, x);
        if (!x) {
            if (!cfg.raw.count(key))
                errors.push_back(origin + ": missing required key '" + key + "'");
            return;
        }
        dst = angular ? hz_to_rad(*x) : *x;
    };
    auto optional_key = [&](const std::string& key, double& dst, bool angular) {
        std::optional<double> x;
        num(key, x);
        if (x) dst = angular ? hz_to_rad(*x) : *x;
    };

    SystemParams& p = cfg.params;
    require("kappa_hz", p.cavity.kappa, true);
    require("kappa_ex_hz", p.cavity.kappa_ex, true);
    optional_key("carrier_detuning_hz", p.cavity.detuning_carrier, true);
    require("omega_m_hz", p.mech.omega_m, true);
    require("gamma_int_hz", p.mech.gamma_int, true);
    optional_key("gamma_gas_hz", p.mech.gamma_gas, true);
    require("n_th", p.mech.n_th, false);
    require("g0_hz", p.drive.g0, true);
    require("n_probe", p.drive.n_probe, false);
    require("n_cool", p.drive.n_cool, false);
    require("delta_hz", p.drive.delta, true);
    optional_key("probe_imbalance", p.drive.probe_imbalance, false);
    require("eta", p.detect.eta, false);
    optional_key("delta_lo_hz", p.detect.delta_lo, true);
    optional_key("beta_heating", cfg.beta_heating, false);
    {
        std::optional<double> nb;
        num("n_bar", nb);
        if (nb) cfg.n_bar = *nb;
    }

    static const char* known[] = {
        "kappa_hz", "kappa_ex_hz", "carrier_detuning_hz", "omega_m_hz", "gamma_int_hz",
        "gamma_gas_hz", "n_th", "g0_hz", "n_probe", "n_cool", "delta_hz",
        "probe_imbalance", "eta", "delta_lo_hz", "beta_heating", "n_bar"};
    for (const auto& [k, v] : cfg.raw) {
        bool ok = false;
        for (const char* kk : known) ok = ok || (k == kk);
        if (!ok) errors.push_back(origin + ": unknown key '" + k + "'");
    }

    if (errors.empty())
        for (const auto& m : validate(cfg.params)) errors.push_back(origin + ": " + m);
    if (cfg.n_bar && *cfg.n_bar < 0)
        errors.push_back(origin + ": n_bar must be >= 0");
    if (cfg.beta_heating < 0)
        errors.push_back(origin + ": beta_heating must be >= 0");

    if (!errors.empty()) throw ConfigError(std::move(errors));
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_config(buf.str(), path);
}

std::string format_config(const Config& c) {
    std::ostringstream os;
    os.precision(12);
    for (const auto& [k, v] : snapshot(c.params)) os << k << " = " << v << "\n";
    if (c.n_bar) os << "n_bar = " << *c.n_bar << "\n";
    os << "beta_heating = " << c.beta_heating << "\n";
    return os.str();
}

} // namespace baesim
