#include <algorithm>
#include <cmath>
#include <complex>

#include "baesim/errors.hpp"
#include "baesim/fits.hpp"

namespace baesim::fits {

namespace {
using cplx = std::complex<double>;

struct ReflectionDerivs {
    cplx r, d_delta, d_kappa, d_eta;
};

ReflectionDerivs reflection_derivs(double kappa, double eta_c, double detuning) {
    const cplx u = 1.0 / cplx(kappa / 2.0, -detuning);
    ReflectionDerivs d;
    d.r = 1.0 - eta_c * kappa * u;
    d.d_delta = -eta_c * kappa * cplx(0.0, 1.0) * u * u;
    d.d_kappa = -eta_c * u + eta_c * kappa * u * u / 2.0;
    d.d_eta = -kappa * u;
    return d;
}
} // namespace

std::complex<double> reflection_coefficient(double kappa, double eta_c, double detuning) {
    return 1.0 - eta_c * kappa / cplx(kappa / 2.0, -detuning);
}

double eval_chebyshev(const std::vector<double>& coeffs, double band_lo, double band_hi,
                      double x) {
    const double mid = 0.5 * (band_lo + band_hi);
    const double half = std::max(0.5 * (band_hi - band_lo), 1e-300);
    const double t = (x - mid) / half;
    double acc = 0.0, tkm1 = 1.0, tk = t;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        if (k == 0)
            acc += coeffs[k];
        else if (k == 1)
            acc += coeffs[k] * t;
        else {
            const double tk1 = 2.0 * t * tk - tkm1;
            tkm1 = tk;
            tk = tk1;
            acc += coeffs[k] * tk;
        }
    }
    return acc;
}

double s21_magnitude(const CoherentResponseModel& m, double omega) {
    const cplx r0 = reflection_coefficient(m.kappa, m.eta_c, m.delta_cav);
    const cplx rm = reflection_coefficient(m.kappa, m.eta_c, m.delta_cav - omega);
    const cplx rp = reflection_coefficient(m.kappa, m.eta_c, m.delta_cav + omega);
    const double beta = eval_chebyshev(m.mod_index_poly, m.band_lo, m.band_hi, omega);
    return 0.5 * beta * std::abs(r0 * std::conj(rm) - std::conj(r0) * rp);
}

namespace {

struct Layout {
    bool fit_eta;
    int n_traces;
    int n_poly;  // fitted coefficients; 0 when frozen
    int idx_kappa() const { return 0; }
    int idx_eta() const { return 1; }
    int idx_delta(int t) const { return (fit_eta ? 2 : 1) + t; }
    int idx_poly(int k) const { return (fit_eta ? 2 : 1) + n_traces + k; }
    int size() const { return (fit_eta ? 2 : 1) + n_traces + n_poly; }
};

struct Prepared {
    std::vector<const SpectrumTrace*> traces;
    double band_lo, band_hi;
    std::vector<double> frozen;  // used when layout.n_poly == 0
    double eta_c_fixed;
};

/// Residuals/Jacobian for the joint model; shared by both sign starts.
bool s21_residuals(const Prepared& prep, const Layout& lay, const Eigen::VectorXd& p,
                   Eigen::VectorXd& res, Eigen::MatrixXd* jac) {
    const double kappa = p(lay.idx_kappa());
    if (!(kappa > 0)) return false;
    const double eta_c = lay.fit_eta ? p(lay.idx_eta()) : prep.eta_c_fixed;
    if (eta_c < 0.0 || eta_c > 1.0) return false;

    std::size_t n_total = 0;
    for (const auto* t : prep.traces) n_total += t->psd.size();
    res.resize(n_total);
    if (jac) jac->setZero(n_total, lay.size());

    std::size_t row = 0;
    for (int t = 0; t < lay.n_traces; ++t) {
        const auto& x = prep.traces[t]->freq_offsets;
        const auto& y = prep.traces[t]->psd;
        const double delta = p(lay.idx_delta(t));
        const auto d0 = reflection_derivs(kappa, eta_c, delta);
        for (std::size_t i = 0; i < x.size(); ++i, ++row) {
            const double w = x[i];
            const auto dm = reflection_derivs(kappa, eta_c, delta - w);
            const auto dp = reflection_derivs(kappa, eta_c, delta + w);
            const cplx f = d0.r * std::conj(dm.r) - std::conj(d0.r) * dp.r;
            const double mag = std::abs(f);

            double beta;
            if (lay.n_poly > 0) {
                std::vector<double> c(lay.n_poly);
                for (int k = 0; k < lay.n_poly; ++k) c[k] = p(lay.idx_poly(k));
                beta = eval_chebyshev(c, prep.band_lo, prep.band_hi, w);
            } else {
                beta = eval_chebyshev(prep.frozen, prep.band_lo, prep.band_hi, w);
            }
            res(row) = y[i] - 0.5 * beta * mag;
            if (!jac) continue;

            auto dmag = [&](const cplx& df) {
                return mag > 1e-14 ? (std::conj(f) * df).real() / mag : 0.0;
            };
            const cplx df_delta = d0.d_delta * std::conj(dm.r) + d0.r * std::conj(dm.d_delta) -
                                  std::conj(d0.d_delta) * dp.r - std::conj(d0.r) * dp.d_delta;
            const cplx df_kappa = d0.d_kappa * std::conj(dm.r) + d0.r * std::conj(dm.d_kappa) -
                                  std::conj(d0.d_kappa) * dp.r - std::conj(d0.r) * dp.d_kappa;
            (*jac)(row, lay.idx_delta(t)) = -0.5 * beta * dmag(df_delta);
            (*jac)(row, lay.idx_kappa()) = -0.5 * beta * dmag(df_kappa);
            if (lay.fit_eta) {
                const cplx df_eta = d0.d_eta * std::conj(dm.r) + d0.r * std::conj(dm.d_eta) -
                                    std::conj(d0.d_eta) * dp.r - std::conj(d0.r) * dp.d_eta;
                (*jac)(row, lay.idx_eta()) = -0.5 * beta * dmag(df_eta);
            }
            if (lay.n_poly > 0) {
                const double mid = 0.5 * (prep.band_lo + prep.band_hi);
                const double half = std::max(0.5 * (prep.band_hi - prep.band_lo), 1e-300);
                const double tt = (w - mid) / half;
                double tkm1 = 1.0, tk = tt;
                for (int k = 0; k < lay.n_poly; ++k) {
                    double tcur;
                    if (k == 0)
                        tcur = 1.0;
                    else if (k == 1)
                        tcur = tt;
                    else {
                        tcur = 2.0 * tt * tk - tkm1;
                        tkm1 = tk;
                        tk = tcur;
                    }
                    (*jac)(row, lay.idx_poly(k)) = -0.5 * tcur * mag;
                }
            }
        }
    }
    return true;
}

} // namespace

S21JointFit fit_s21(const std::vector<SpectrumTrace>& traces, const S21FitOptions& opt) {
    if (traces.empty()) throw FitError("fit_s21: need at least one trace");

    Prepared prep;
    prep.eta_c_fixed = opt.eta_c_init;
    std::size_t n_points = 0;
    double lo = 1e300, hi = -1e300;
    for (const auto& t : traces) {
        t.check();
        prep.traces.push_back(&t);
        n_points += t.psd.size();
        lo = std::min(lo, t.freq_offsets.front());
        hi = std::max(hi, t.freq_offsets.back());
    }
    prep.band_lo = lo;
    prep.band_hi = hi;

    Layout lay;
    lay.fit_eta = opt.fit_eta_c;
    lay.n_traces = int(traces.size());
    if (opt.frozen_poly) {
        lay.n_poly = 0;
        prep.frozen = *opt.frozen_poly;
    } else {
        // Calibrating a frequency-dependent prefactor needs several detunings;
        // with fewer traces only an overall scale is identifiable.
        const int order = traces.size() >= 3 ? opt.poly_order : 0;
        lay.n_poly = order + 1;
    }
    if (std::size_t(lay.size()) + 2 > n_points)
        throw FitError("fit_s21: polynomial order exceeds data support");

    // Initial detunings: response peaks near |Delta|.
    std::vector<double> d0(traces.size());
    for (std::size_t t = 0; t < traces.size(); ++t) {
        if (t < opt.delta_inits.size()) {
            d0[t] = opt.delta_inits[t];
            continue;
        }
        const auto& y = traces[t].psd;
        const std::size_t imax =
            std::max_element(y.begin(), y.end()) - y.begin();
        d0[t] = traces[t].freq_offsets[imax];
    }
    const double kappa0 = opt.kappa_init > 0
                              ? opt.kappa_init
                              : std::max(0.25 * (hi - lo), 1e-6 * std::abs(hi));

    auto run = [&](double sign) {
        Eigen::VectorXd p0(lay.size());
        p0(lay.idx_kappa()) = kappa0;
        if (lay.fit_eta) p0(lay.idx_eta()) = opt.eta_c_init;
        for (int t = 0; t < lay.n_traces; ++t) p0(lay.idx_delta(t)) = sign * d0[t];
        if (lay.n_poly > 0) {
            for (int k = 0; k < lay.n_poly; ++k) p0(lay.idx_poly(k)) = 0.0;
            // Scale coefficient from the data/unit-model amplitude ratio.
            CoherentResponseModel probe{kappa0, sign * d0[0], opt.eta_c_init, {1.0}, lo, hi};
            double ymax = 0, mmax = 0;
            for (std::size_t i = 0; i < traces[0].psd.size(); ++i) {
                ymax = std::max(ymax, traces[0].psd[i]);
                mmax = std::max(mmax, s21_magnitude(probe, traces[0].freq_offsets[i]));
            }
            p0(lay.idx_poly(0)) = mmax > 0 ? ymax / mmax : 1.0;
        }
        auto fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* j) {
            return s21_residuals(prep, lay, p, r, j);
        };
        return levenberg_fit(fn, p0, opt.solver);
    };

    LeastSquaresSolution best = run(+1.0);
    if (opt.try_sign_flip) {
        const auto flipped = run(-1.0);
        if (flipped.cost < best.cost) best = flipped;
    }

    S21JointFit out;
    out.model.kappa = best.params(lay.idx_kappa());
    out.model.eta_c = lay.fit_eta ? best.params(lay.idx_eta()) : prep.eta_c_fixed;
    out.model.band_lo = lo;
    out.model.band_hi = hi;
    if (lay.n_poly > 0) {
        out.model.mod_index_poly.assign(lay.n_poly, 0.0);
        for (int k = 0; k < lay.n_poly; ++k)
            out.model.mod_index_poly[k] = best.params(lay.idx_poly(k));
    } else {
        out.model.mod_index_poly = prep.frozen;
    }
    for (int t = 0; t < lay.n_traces; ++t) {
        out.deltas.push_back(best.params(lay.idx_delta(t)));
        out.delta_sigmas.push_back(best.sigmas(lay.idx_delta(t)));
    }
    out.model.delta_cav = out.deltas[0];

    FitResult& fr = out.result;
    fr.converged = best.converged;
    fr.n_iter = best.n_iter;
    fr.residual_rms = best.residual_rms;
    fr.params["kappa"] = out.model.kappa;
    fr.sigmas["kappa"] = best.sigmas(lay.idx_kappa());
    fr.params["eta_c"] = out.model.eta_c;
    if (lay.fit_eta) fr.sigmas["eta_c"] = best.sigmas(lay.idx_eta());
    for (int t = 0; t < lay.n_traces; ++t) {
        fr.params["delta_" + std::to_string(t + 1)] = out.deltas[t];
        fr.sigmas["delta_" + std::to_string(t + 1)] = out.delta_sigmas[t];
    }
    for (std::size_t k = 0; k < out.model.mod_index_poly.size(); ++k)
        fr.params["poly_c" + std::to_string(k)] = out.model.mod_index_poly[k];
    if (!fr.converged)
        throw FitError("fit_s21: no convergence after " + std::to_string(fr.n_iter) +
                       " iterations (residual rms " + std::to_string(fr.residual_rms) + ")");
    return out;
}

} // namespace baesim::fits
