#include "baesim/rwa.hpp"

#include <cmath>
#include <stdexcept>

namespace baesim::rwa {

std::complex<double> chi_m(const MechSusceptibility& s, double omega) {
    return 1.0 / std::complex<double>(s.gamma_eff / 2.0, -omega);
}

double heterodyne_psd_at(double eta, double gamma_eff, double coop, double n_bar,
                         double delta, double omega) {
    const MechSusceptibility s{gamma_eff};
    const auto chi_as = chi_m(s, omega - delta);  // anti-Stokes weight n_bar
    const auto chi_st = chi_m(s, omega + delta);  // Stokes weight n_bar + 1
    // At delta = 0 the backaction term cancels bitwise: both evaluations share
    // the argument, so the difference is exactly zero at every omega.
    const double qba = std::norm(chi_as - chi_st);
    const double bracket =
        n_bar * std::norm(chi_as) + (n_bar + 1.0) * std::norm(chi_st) + coop * qba;
    return 1.0 + eta * gamma_eff * gamma_eff * coop * bracket;
}

SpectrumTrace heterodyne_psd(const SystemParams& p, double n_bar,
                             const std::vector<double>& grid) {
    if (p.drive.probe_imbalance != 1.0)
        throw std::invalid_argument(
            "rwa::heterodyne_psd: closed form requires balanced probes; use the matrix engine");
    if (p.cavity.detuning_carrier != 0.0)
        throw std::invalid_argument(
            "rwa::heterodyne_psd: closed form requires carrier on resonance; use the matrix engine");
    if (n_bar < 0) throw std::invalid_argument("rwa::heterodyne_psd: n_bar must be >= 0");

    const double geff = effective_linewidth(p);
    const double coop = cooperativity_probe(p);
    const double eta = p.detect.eta;
    const double delta = p.drive.delta;

    SpectrumTrace t;
    t.freq_offsets = grid;
    t.psd.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        t.psd[i] = heterodyne_psd_at(eta, geff, coop, n_bar, delta, grid[i]);
    t.meta = make_meta("rwa", p);
    t.meta.fields["n_bar"] = std::to_string(n_bar);
    return t;
}

SpectrumTrace quadrature_psd_xx(const SystemParams& p, double n_bar,
                                const std::vector<double>& grid) {
    const double geff = effective_linewidth(p);
    const MechSusceptibility s{geff};
    SpectrumTrace t;
    t.freq_offsets = grid;
    t.psd.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        t.psd[i] = (geff / 2.0) * (2.0 * n_bar + 1.0) * std::norm(chi_m(s, grid[i]));
    t.meta = make_meta("rwa_xx", p);
    t.meta.fields["n_bar"] = std::to_string(n_bar);
    return t;
}

double bad_cavity_occupation(double kappa, double omega_m, double coop) {
    const double r = kappa / (4.0 * omega_m);
    return r * r * coop;
}

double bad_cavity_occupation(const SystemParams& p) {
    return bad_cavity_occupation(p.cavity.kappa, p.mech.omega_m, cooperativity_probe(p));
}

bool bad_cavity_warning(const SystemParams& p) {
    return bad_cavity_occupation(p) > 0.1;
}

} // namespace baesim::rwa
