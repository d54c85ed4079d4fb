#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "baesim/fits.hpp"
#include "baesim/trace.hpp"

namespace baesim::pipeline {

/// Spectral area of one mechanical quantum in a two-tone trace,
/// 2 pi eta C Gamma_eff (rad/s, vacuum units above the floor).
double quantum_unit_area(double eta, double coop, double gamma_eff);

/// Fits a two-tone spectrum, choosing the coalesced single-peak model when the
/// sidebands are closer than they are wide.
fits::LorentzianFitOutcome fit_two_tone(const SpectrumTrace& trace, double delta,
                                        double gamma_guess);

/// Total fitted area -> occupation: n = (area / unit - 1) / 2. The "1" is the
/// zero-point contribution common to both sidebands.
double inferred_occupation(const fits::LorentzianFitOutcome& fit, double unit_area);

/// What the area calibration recovers from an ideal two-tone trace:
/// n_bar + C * 4 d^2 / (Gamma^2 + 4 d^2). Backaction vanishes at d = 0 and
/// contributes C quanta for well-separated probes.
double analytic_inferred_occupation(double n_bar, double coop, double gamma_eff,
                                    double delta);

struct SweepOptions {
    /// Self: quantum unit from the sideband asymmetry of the widest-detuning
    /// point. Explicit: caller-provided unit (noisy data where per-trace
    /// self-calibration would amplify the errors).
    enum class Calibration { SelfReference, Explicit };
    Calibration calibration = Calibration::SelfReference;
    double unit_area = 0.0;  // used by Explicit
    /// When set, fills the fit-free reference column of the sweep summary.
    std::optional<double> n_bar_analytic;
    std::optional<double> coop_analytic;
};

struct SweepPoint {
    double delta = 0.0;
    bool ok = false;
    std::string error;
    double n_inf = 0.0;
    double n_inf_analytic = 0.0;  // NaN when not requested
    double area_total = 0.0;
    double area_stokes = 0.0;      // 0 for coalesced points
    double area_antistokes = 0.0;
    double width = 0.0;
    bool single_peak = false;
};

/// Runs the inferred-occupation pipeline over a detuning list. Individual fit
/// failures are recorded per point; the sweep continues.
std::vector<SweepPoint> occupation_sweep(
    const std::function<SpectrumTrace(double delta)>& generate,
    const std::vector<double>& deltas, double gamma_eff_guess, const SweepOptions& opt = {});

std::string sweep_csv(const std::vector<SweepPoint>& points);

struct PowerPointMeasurement {
    double coop = 0.0;
    double n_meas = 0.0;    // occupation from the backaction-evading trace
    double n_ba_meas = 0.0; // evaded quanta: detuned total minus BAE total
    double n_imp_meas = 0.0;
    double unit_area = 0.0; // calibration actually used
};

/// Extracts (n, n_ba, n_imp) from a BAE trace (delta = 0) and a detuned
/// reference trace at the same power. unit_override = 0 self-calibrates from
/// the reference asymmetry.
PowerPointMeasurement measure_power_point(const SpectrumTrace& bae,
                                          const SpectrumTrace& detuned, double delta_ref,
                                          double coop, double gamma_guess,
                                          double unit_override = 0.0);

} // namespace baesim::pipeline
