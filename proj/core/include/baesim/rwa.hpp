#pragma once

#include <complex>
#include <vector>

#include "baesim/params.hpp"
#include "baesim/trace.hpp"

namespace baesim::rwa {

/// Lorentzian mechanical response of linewidth gamma_eff.
struct MechSusceptibility {
    double gamma_eff;  // rad/s, > 0
};

/// chi_m(omega) = 1 / (-i omega + Gamma_eff / 2).
std::complex<double> chi_m(const MechSusceptibility& s, double omega);

/// Balanced-heterodyne PSD of the two-tone scheme, carrier on resonance and
/// balanced probes:
///   S(w) = 1 + eta Geff^2 C [ n |chi(w-d)|^2 + (n+1) |chi(w+d)|^2
///                             + C |chi(w-d) - chi(w+d)|^2 ].
/// n_bar is explicit because measured occupations include heating that the
/// cooling model does not predict.
SpectrumTrace heterodyne_psd(const SystemParams& p, double n_bar,
                             const std::vector<double>& grid);

/// Pointwise evaluation without trace packaging.
double heterodyne_psd_at(double eta, double gamma_eff, double coop, double n_bar,
                         double delta, double omega);

/// Measured-quadrature PSD S_XX(w) = (Geff/2)(2 n + 1) |chi(w)|^2;
/// integrates to n + 1/2 over dw/2pi.
SpectrumTrace quadrature_psd_xx(const SystemParams& p, double n_bar,
                                const std::vector<double>& grid);

/// Residual backaction from counter-rotating terms, (kappa / 4 Omega_m)^2 * C.
/// Scalar diagnostic; the simulated dynamics stay within the rotating frame.
double bad_cavity_occupation(double kappa, double omega_m, double coop);
double bad_cavity_occupation(const SystemParams& p);

/// True when bad_cavity_occupation(p) exceeds the usual 0.1 rule of thumb.
bool bad_cavity_warning(const SystemParams& p);

} // namespace baesim::rwa
