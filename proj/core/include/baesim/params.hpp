#pragma once

#include <numbers>
#include <string>
#include <vector>

namespace baesim {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Ordinary frequency (Hz) -> angular frequency (rad/s). All internal rates are angular.
inline constexpr double hz_to_rad(double f_hz) { return two_pi * f_hz; }
inline constexpr double rad_to_hz(double w) { return w / two_pi; }

/// Optical cavity: total linewidth, extrinsic coupling, and carrier detuning
/// of the probe-pair center from cavity resonance. All angular (rad/s).
struct CavityParams {
    double kappa = 0.0;
    double kappa_ex = 0.0;
    double detuning_carrier = 0.0;

    double eta_c() const { return kappa_ex / kappa; }
};

/// Mechanical oscillator and its thermal environment.
struct MechParams {
    double omega_m = 0.0;    // rad/s
    double gamma_int = 0.0;  // intrinsic linewidth, rad/s
    double gamma_gas = 0.0;  // buffer-gas broadening, rad/s
    double n_th = 0.0;       // bath occupation

    double gamma_m() const { return gamma_int + gamma_gas; }
};

/// Drive tones: two probe tones at +-(Omega_m + delta) around the carrier,
/// plus an independent red-detuned cooling tone.
struct DriveParams {
    double g0 = 0.0;             // vacuum optomechanical coupling, rad/s
    double n_probe = 0.0;        // intracavity photons per probe tone
    double n_cool = 0.0;         // intracavity photons of the cooling tone
    double delta = 0.0;          // probe detuning from the sidebands, rad/s
    double probe_imbalance = 1.0; // g_plus / g_minus
};

struct DetectionParams {
    double eta = 1.0;       // overall detection efficiency, (0, 1]
    double delta_lo = 0.0;  // local-oscillator offset; reference of reported axes
};

struct SystemParams {
    CavityParams cavity;
    MechParams mech;
    DriveParams drive;
    DetectionParams detect;
};

/// Collects every violated invariant; empty result means the record is usable.
std::vector<std::string> validate(const SystemParams& p);

/// Cooling-tone cooperativity C_cool = (4 g0^2 / kappa Gamma_m) * n_cool,
/// defined against the bare mechanical linewidth.
double cooperativity_cool(const SystemParams& p);

/// Effective mechanical linewidth seen by the probes, Gamma_m * (1 + C_cool).
double effective_linewidth(const SystemParams& p);

/// Probe cooperativity C = 4 g0^2 n_probe / (kappa * Gamma_eff).
double cooperativity_probe(const SystemParams& p);

/// Sideband-cooled occupation n_th / (1 + C_cool). Absorption heating, when
/// present, is handled as an explicit additive input elsewhere.
double cooled_occupation(const SystemParams& p);

/// Diagnostic only: two-tone schemes want the sideband-resolved regime.
inline bool resolved_sideband(const SystemParams& p) {
    return p.mech.omega_m > p.cavity.kappa;
}

/// Drive-enhanced couplings (g_plus, g_minus) implied by n_probe and the imbalance.
struct EnhancedCouplings {
    double g_plus;
    double g_minus;
};
EnhancedCouplings enhanced_couplings(const SystemParams& p);

/// Flat key/value snapshot (Hz-facing units) for trace metadata and manifests.
std::vector<std::pair<std::string, std::string>> snapshot(const SystemParams& p);

} // namespace baesim
