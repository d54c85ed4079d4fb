#include "baesim/params.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace baesim {

std::vector<std::string> validate(const SystemParams& p) {
    std::vector<std::string> v;
    auto bad = [&v](const std::string& m) { v.push_back(m); };

    if (!(p.cavity.kappa > 0)) bad("kappa must be > 0");
    if (p.cavity.kappa_ex < 0 || p.cavity.kappa_ex > p.cavity.kappa)
        bad("kappa_ex must lie in [0, kappa]");
    if (!(p.mech.omega_m > 0)) bad("omega_m must be > 0");
    if (!(p.mech.gamma_int > 0)) bad("gamma_int must be > 0");
    if (p.mech.gamma_gas < 0) bad("gamma_gas must be >= 0");
    if (p.mech.n_th < 0) bad("n_th must be >= 0");
    if (!(p.drive.g0 > 0)) bad("g0 must be > 0");
    if (p.drive.n_probe < 0) bad("n_probe must be >= 0");
    if (p.drive.n_cool < 0) bad("n_cool must be >= 0");
    if (!(p.drive.probe_imbalance > 0)) bad("probe_imbalance must be > 0");
    if (!(p.detect.eta > 0 && p.detect.eta <= 1)) bad("eta must lie in (0, 1]");

    for (auto [name, x] : {std::pair<const char*, double>{"kappa", p.cavity.kappa},
                           {"omega_m", p.mech.omega_m},
                           {"g0", p.drive.g0},
                           {"delta", p.drive.delta},
                           {"eta", p.detect.eta}})
        if (!std::isfinite(x)) bad(std::string(name) + " must be finite");

    return v;
}

double cooperativity_cool(const SystemParams& p) {
    const double gm = p.mech.gamma_m();
    if (!(gm > 0)) throw std::domain_error("cooperativity_cool: Gamma_m must be > 0");
    const double c0 = 4.0 * p.drive.g0 * p.drive.g0 / (p.cavity.kappa * gm);
    return c0 * p.drive.n_cool;
}

double effective_linewidth(const SystemParams& p) {
    return p.mech.gamma_m() * (1.0 + cooperativity_cool(p));
}

double cooperativity_probe(const SystemParams& p) {
    const double geff = effective_linewidth(p);
    if (!(geff > 0)) throw std::domain_error("cooperativity_probe: Gamma_eff must be > 0");
    return 4.0 * p.drive.g0 * p.drive.g0 * p.drive.n_probe / (p.cavity.kappa * geff);
}

double cooled_occupation(const SystemParams& p) {
    return p.mech.n_th / (1.0 + cooperativity_cool(p));
}

EnhancedCouplings enhanced_couplings(const SystemParams& p) {
    const double g_minus = p.drive.g0 * std::sqrt(p.drive.n_probe);
    return {p.drive.probe_imbalance * g_minus, g_minus};
}

std::vector<std::pair<std::string, std::string>> snapshot(const SystemParams& p) {
    std::vector<std::pair<std::string, std::string>> kv;
    auto put = [&kv](const std::string& k, double x) {
        std::ostringstream os;
        os.precision(12);
        os << x;
        kv.emplace_back(k, os.str());
    };
    put("kappa_hz", rad_to_hz(p.cavity.kappa));
    put("kappa_ex_hz", rad_to_hz(p.cavity.kappa_ex));
    put("carrier_detuning_hz", rad_to_hz(p.cavity.detuning_carrier));
    put("omega_m_hz", rad_to_hz(p.mech.omega_m));
    put("gamma_int_hz", rad_to_hz(p.mech.gamma_int));
    put("gamma_gas_hz", rad_to_hz(p.mech.gamma_gas));
    put("n_th", p.mech.n_th);
    put("g0_hz", rad_to_hz(p.drive.g0));
    put("n_probe", p.drive.n_probe);
    put("n_cool", p.drive.n_cool);
    put("delta_hz", rad_to_hz(p.drive.delta));
    put("probe_imbalance", p.drive.probe_imbalance);
    put("eta", p.detect.eta);
    put("delta_lo_hz", rad_to_hz(p.detect.delta_lo));
    return kv;
}

} // namespace baesim
