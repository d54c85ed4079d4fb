#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "baesim/params.hpp"
#include "baesim/trace.hpp"

namespace baesim::linres {

using Mat4 = Eigen::Matrix4cd;

/// Frequency-domain model of the linearized two-tone system. Operator basis
/// is (da, da+, db, db+); all rates angular. Valid for arbitrary carrier
/// detuning, probe detuning, and unbalanced drive-enhanced couplings.
struct ScatteringModel {
    double kappa = 0.0;
    double gamma_eff = 0.0;
    double delta_cav = 0.0;   // carrier detuning from cavity resonance
    double delta_mech = 0.0;  // probe detuning from the mechanical sidebands
    double g_plus = 0.0;      // blue-tone enhanced coupling
    double g_minus = 0.0;     // red-tone enhanced coupling
    double n_bath = 0.0;      // mechanical bath occupation

    static ScatteringModel from_params(const SystemParams& p, double n_bar);
};

/// Inverse susceptibility: diagonal chi_c^{-1}(w +- Delta), chi_m^{-1}(w +- delta),
/// off-diagonal -i g couplings. chi_matrix() is its inverse.
Mat4 chi_inverse(const ScatteringModel& m, double omega);
Mat4 chi_matrix(const ScatteringModel& m, double omega);

/// Input-output map M(w) = 1 - L chi(w) L with L = diag(sqrt(k), sqrt(k),
/// sqrt(Geff), sqrt(Geff)).
Mat4 output_scattering(const ScatteringModel& m, double omega);

/// Drift matrix A of the Langevin system; chi^{-1}(w) = -i w I - A.
Mat4 drift_matrix(const ScatteringModel& m);

/// True when every drift eigenvalue has a strictly negative real part.
bool is_stable(const ScatteringModel& m);

struct StabilityReport {
    bool stable = false;
    double max_re_eigenvalue = 0.0;
    std::vector<double> grid;
    std::vector<double> condition_number;    // of chi^{-1} per frequency
    std::vector<double> min_singular_value;  // of chi^{-1} per frequency
};
StabilityReport stability_scan(const ScatteringModel& m, const std::vector<double>& grid);

/// Output-field spectral functions assembled from the scattering matrix and
/// the vacuum/thermal input correlations. s_aa has vacuum level 1 (the
/// a_out a_out+ band); s_adad has vacuum level 0 (the a_out+ a_out band).
struct OutputCorrelations {
    std::vector<double> grid;
    std::vector<std::complex<double>> s_aa;
    std::vector<std::complex<double>> s_adad;
};
OutputCorrelations output_correlations(const ScatteringModel& m,
                                       const std::vector<double>& grid);

/// Balanced-heterodyne PSD referenced to the LO offset: the signal band and the
/// vacuum image band are combined symmetrically and detection efficiency is a
/// beam-splitter admixture of vacuum, leaving the floor pinned at 1.
SpectrumTrace heterodyne_psd(const ScatteringModel& m, const DetectionParams& detect,
                             const std::vector<double>& grid);

/// Debug dump: per-frequency complex entries of the scattering matrix as CSV.
void write_scattering_csv(const ScatteringModel& m, const std::vector<double>& grid,
                          const std::string& path);

} // namespace baesim::linres
