#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "baesim/leastsq.hpp"
#include "baesim/trace.hpp"

namespace baesim::fits {

/// Estimation outcome shared by every fit kernel.
struct FitResult {
    std::map<std::string, double> params;
    std::map<std::string, double> sigmas;
    double residual_rms = 0.0;
    bool converged = false;
    int n_iter = 0;
};

std::string format_fit_report(const FitResult& r);

// ---------------------------------------------------------------------------
// Lorentzian sideband fits
// ---------------------------------------------------------------------------

struct LorentzianPeak {
    double center = 0.0;  // rad/s
    double height = 0.0;  // above baseline, vacuum units
    double hwhm = 0.0;    // rad/s
    /// Analytic area pi * height * HWHM; avoids grid-truncation bias.
    double area() const;
};

struct SidebandPair {
    double area_stokes = 0.0;
    double area_antistokes = 0.0;
    double center_stokes = 0.0;
    double center_antistokes = 0.0;
    double width = 0.0;  // shared FWHM, rad/s
    double area_sigma_stokes = 0.0;
    double area_sigma_antistokes = 0.0;
};

struct LorentzianInit {
    enum class Mode { Auto, Single, Double };
    Mode mode = Mode::Auto;
    std::optional<double> baseline;
    std::optional<double> width;                // FWHM guess, rad/s
    std::vector<double> centers;                // 0, 1 or 2 entries
};

struct LorentzianFitOutcome {
    FitResult result;
    double baseline = 0.0;
    double width = 0.0;                  // shared FWHM
    std::vector<LorentzianPeak> peaks;   // sorted by center; 1 or 2 entries
    bool single_peak = false;            // true when the two-peak model collapsed
    /// Requires two peaks; the larger-area peak is Stokes.
    SidebandPair sideband_pair() const;
    /// Total area above baseline over all fitted peaks.
    double total_area() const;
};

/// Baseline + one or two shared-width Lorentzians, damped least squares with
/// analytic Jacobian. Peaks closer than the grid resolution fall back to the
/// single-peak model (flagged, not fatal).
LorentzianFitOutcome fit_double_lorentzian(const SpectrumTrace& trace,
                                           const LorentzianInit& init = {});

/// Motional sideband asymmetry self-calibration: the quantum unit is
/// (area_stokes - area_antistokes) and the result is n_bar + n_ba.
/// Throws FitError when the asymmetry is inverted or the areas are too close
/// to calibrate (difference below the combined uncertainty).
double asymmetry_calibrate(const SidebandPair& sb);

// ---------------------------------------------------------------------------
// Power-sweep regression (occupation and imprecision vs cooperativity)
// ---------------------------------------------------------------------------

struct PowerPoint {
    double coop = 0.0;     // independently known C
    double n_meas = 0.0;   // measured occupation (quanta)
    double n_imp = 0.0;    // measured imprecision (quanta)
    double weight = 1.0;
};

struct PowerSweepFit {
    double beta = 0.0;      // slope of n_meas vs C
    double beta_sigma = 0.0;
    double base_occupation = 0.0;  // intercept
    double base_sigma = 0.0;
    double eta = 0.0;       // from n_imp = 1 / (8 eta C), through the origin
    double eta_sigma = 0.0;
    FitResult result;
};

/// Weighted linear regressions; throws FitError on a rank-deficient design
/// (fewer than 3 points or all cooperativities equal).
PowerSweepFit power_sweep_regression(const std::vector<PowerPoint>& points);

// ---------------------------------------------------------------------------
// Cavity coherent response (|S21|) fitting
// ---------------------------------------------------------------------------

/// |S21(W)| = (beta(W)/2) |r(D) r*(D - W) - r*(D) r(D + W)| with
/// r(D) = 1 - eta_c kappa / (kappa/2 - i D). The modulation prefactor beta(W)
/// is a Chebyshev polynomial over [band_lo, band_hi], absorbing the frequency
/// response of the full detection chain.
struct CoherentResponseModel {
    double kappa = 0.0;
    double delta_cav = 0.0;
    double eta_c = 0.5;
    std::vector<double> mod_index_poly = {1.0};  // Chebyshev coefficients
    double band_lo = 0.0;                        // rad/s
    double band_hi = 1.0;                        // rad/s
};

std::complex<double> reflection_coefficient(double kappa, double eta_c, double detuning);
double eval_chebyshev(const std::vector<double>& coeffs, double band_lo, double band_hi,
                      double x);
double s21_magnitude(const CoherentResponseModel& m, double omega);

struct S21FitOptions {
    int poly_order = 6;            // shared prefactor order for joint calibration
    bool fit_eta_c = true;
    bool try_sign_flip = true;     // resolve the Delta -> -Delta ambiguity by cost
    std::optional<std::vector<double>> frozen_poly;  // reuse a prior calibration
    double kappa_init = 0.0;       // 0: from data span
    double eta_c_init = 0.3;
    std::vector<double> delta_inits;  // one per trace; empty: from data peaks
    LeastSquaresOptions solver;
};

struct S21JointFit {
    FitResult result;
    CoherentResponseModel model;      // shared parameters, delta_cav of trace 0
    std::vector<double> deltas;       // per trace
    std::vector<double> delta_sigmas;
};

/// Joint damped least squares over {Delta_i}, kappa, eta_c and the shared
/// prefactor. Single-trace calls reuse frozen_poly (or unit prefactor).
S21JointFit fit_s21(const std::vector<SpectrumTrace>& traces, const S21FitOptions& opt = {});

// ---------------------------------------------------------------------------
// Phase lock diagnostics
// ---------------------------------------------------------------------------

/// Residual phase variance from the coherent-to-total beat-note power ratio:
/// sigma_phi^2 = -ln(P_coherent / P_total).
double pll_phase_variance(double p_coherent, double p_total);

} // namespace baesim::fits
