#include "baesim/linres.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "baesim/errors.hpp"

namespace baesim::linres {

namespace {
constexpr std::complex<double> I{0.0, 1.0};

inline std::complex<double> chi_c_inv(double kappa, double x) {
    return {kappa / 2.0, -x};
}
inline std::complex<double> chi_m_inv(double gamma, double x) {
    return {gamma / 2.0, -x};
}

/// Nonzero input correlations <d_in,j(w) d_in,k(w')> / delta(w + w'):
/// <a a+> = 1, <b b+> = n + 1, <b+ b> = n.
Eigen::Matrix4cd input_correlations(double n_bath) {
    Eigen::Matrix4cd n = Eigen::Matrix4cd::Zero();
    n(0, 1) = 1.0;
    n(2, 3) = n_bath + 1.0;
    n(3, 2) = n_bath;
    return n;
}
} // namespace

ScatteringModel ScatteringModel::from_params(const SystemParams& p, double n_bar) {
    const auto g = enhanced_couplings(p);
    ScatteringModel m;
    m.kappa = p.cavity.kappa;
    m.gamma_eff = effective_linewidth(p);
    m.delta_cav = p.cavity.detuning_carrier;
    m.delta_mech = p.drive.delta;
    m.g_plus = g.g_plus;
    m.g_minus = g.g_minus;
    m.n_bath = n_bar;
    return m;
}

Mat4 chi_inverse(const ScatteringModel& m, double omega) {
    Mat4 a = Mat4::Zero();
    a(0, 0) = chi_c_inv(m.kappa, omega + m.delta_cav);
    a(1, 1) = chi_c_inv(m.kappa, omega - m.delta_cav);
    a(2, 2) = chi_m_inv(m.gamma_eff, omega + m.delta_mech);
    a(3, 3) = chi_m_inv(m.gamma_eff, omega - m.delta_mech);
    a(0, 2) = -I * m.g_minus;
    a(0, 3) = -I * m.g_plus;
    a(1, 2) = I * m.g_plus;
    a(1, 3) = I * m.g_minus;
    a(2, 0) = -I * m.g_minus;
    a(2, 1) = -I * m.g_plus;
    a(3, 0) = I * m.g_plus;
    a(3, 1) = I * m.g_minus;
    return a;
}

Mat4 chi_matrix(const ScatteringModel& m, double omega) {
    const Mat4 inv = chi_inverse(m, omega);
    Eigen::FullPivLU<Mat4> lu(inv);
    if (!lu.isInvertible()) {
        Eigen::JacobiSVD<Mat4> svd(inv);
        const double cond =
            svd.singularValues()(0) / std::max(svd.singularValues()(3), 1e-300);
        throw InstabilityError("chi_matrix: singular response at omega = " +
                                   std::to_string(rad_to_hz(omega)) +
                                   " Hz (condition number " + std::to_string(cond) + ")",
                               omega);
    }
    return lu.inverse();
}

Mat4 output_scattering(const ScatteringModel& m, double omega) {
    const double sk = std::sqrt(m.kappa);
    const double sg = std::sqrt(m.gamma_eff);
    Eigen::Vector4d l;
    l << sk, sk, sg, sg;
    return Mat4::Identity() - l.asDiagonal() * chi_matrix(m, omega) * l.asDiagonal();
}

Mat4 drift_matrix(const ScatteringModel& m) {
    return -chi_inverse(m, 0.0);
}

bool is_stable(const ScatteringModel& m) {
    Eigen::ComplexEigenSolver<Mat4> es(drift_matrix(m), false);
    return es.eigenvalues().real().maxCoeff() < 0.0;
}

StabilityReport stability_scan(const ScatteringModel& m, const std::vector<double>& grid) {
    StabilityReport r;
    Eigen::ComplexEigenSolver<Mat4> es(drift_matrix(m), false);
    r.max_re_eigenvalue = es.eigenvalues().real().maxCoeff();
    r.stable = r.max_re_eigenvalue < 0.0;
    r.grid = grid;
    r.condition_number.reserve(grid.size());
    r.min_singular_value.reserve(grid.size());
    for (double w : grid) {
        Eigen::JacobiSVD<Mat4> svd(chi_inverse(m, w));
        const auto& s = svd.singularValues();
        r.condition_number.push_back(s(0) / std::max(s(3), 1e-300));
        r.min_singular_value.push_back(s(3));
    }
    return r;
}

OutputCorrelations output_correlations(const ScatteringModel& m,
                                       const std::vector<double>& grid) {
    const Eigen::Matrix4cd n = input_correlations(m.n_bath);
    OutputCorrelations oc;
    oc.grid = grid;
    oc.s_aa.resize(grid.size());
    oc.s_adad.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Mat4 mp = output_scattering(m, grid[i]);
        const Mat4 mn = output_scattering(m, -grid[i]);
        const Mat4 s = mp * n * mn.transpose();
        oc.s_aa[i] = s(0, 1);
        oc.s_adad[i] = s(1, 0);
    }
    return oc;
}

SpectrumTrace heterodyne_psd(const ScatteringModel& m, const DetectionParams& detect,
                             const std::vector<double>& grid) {
    if (!is_stable(m)) {
        Eigen::ComplexEigenSolver<Mat4> es(drift_matrix(m), false);
        throw InstabilityError(
            "heterodyne_psd: model is dynamically unstable (max Re eigenvalue = " +
                std::to_string(es.eigenvalues().real().maxCoeff()) + " rad/s)",
            0.0);
    }
    const Eigen::Matrix4cd n = input_correlations(m.n_bath);
    SpectrumTrace t;
    t.freq_offsets = grid;
    t.psd.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double w = grid[i];
        const Mat4 mp = output_scattering(m, w);
        const Mat4 mn = output_scattering(m, -w);
        // Signal band <a_out+ a_out>(w) plus mirrored <a_out a_out+>(-w); the
        // far-detuned image band contributes exactly one vacuum unit.
        const std::complex<double> s_adad = (mp * n * mn.transpose())(1, 0);
        const std::complex<double> s_aa = (mn * n * mp.transpose())(0, 1);
        const double raw = 0.5 * (1.0 + (s_adad + s_aa).real());
        t.psd[i] = 1.0 + detect.eta * (raw - 1.0);
    }
    t.meta.generator = "matrix";
    t.meta.timestamp = iso_timestamp();
    return t;
}

void write_scattering_csv(const ScatteringModel& m, const std::vector<double>& grid,
                          const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << "omega_hz";
    static const char* names[4] = {"a", "ad", "b", "bd"};
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            f << ",re_" << names[r] << names[c] << ",im_" << names[r] << names[c];
    f << "\n";
    char buf[64];
    for (double w : grid) {
        const Mat4 s = output_scattering(m, w);
        std::snprintf(buf, sizeof buf, "%.12g", rad_to_hz(w));
        f << buf;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) {
                std::snprintf(buf, sizeof buf, ",%.9g,%.9g", s(r, c).real(), s(r, c).imag());
                f << buf;
            }
        f << "\n";
    }
}

} // namespace baesim::linres
