#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "baesim/errors.hpp"
#include "baesim/fits.hpp"

namespace baesim::fits {

double LorentzianPeak::area() const { return std::numbers::pi * height * hwhm; }

std::string format_fit_report(const FitResult& r) {
    std::ostringstream os;
    os.precision(9);
    os << "converged = " << (r.converged ? "yes" : "no") << "\n";
    os << "n_iter = " << r.n_iter << "\n";
    os << "residual_rms = " << r.residual_rms << "\n";
    for (const auto& [k, v] : r.params) {
        os << k << " = " << v;
        auto it = r.sigmas.find(k);
        if (it != r.sigmas.end()) os << " +- " << it->second;
        os << "\n";
    }
    return os.str();
}

SidebandPair LorentzianFitOutcome::sideband_pair() const {
    if (peaks.size() != 2)
        throw FitError("sideband_pair: two-peak fit required");
    const LorentzianPeak* stokes = &peaks[0];
    const LorentzianPeak* anti = &peaks[1];
    if (anti->area() > stokes->area()) std::swap(stokes, anti);
    SidebandPair sb;
    sb.area_stokes = stokes->area();
    sb.area_antistokes = anti->area();
    sb.center_stokes = stokes->center;
    sb.center_antistokes = anti->center;
    sb.width = width;
    // Area sigma from height and width sigmas, treated as independent.
    auto area_sigma = [this](const LorentzianPeak& pk, const char* height_key) {
        const double sh = result.sigmas.count(height_key) ? result.sigmas.at(height_key) : 0.0;
        const double sw = result.sigmas.count("width") ? result.sigmas.at("width") : 0.0;
        const double a = pk.area();
        const double rh = pk.height != 0 ? sh / std::abs(pk.height) : 0.0;
        const double rw = width != 0 ? sw / std::abs(width) : 0.0;
        return a * std::sqrt(rh * rh + rw * rw);
    };
    const bool first_is_stokes = stokes == &peaks[0];
    sb.area_sigma_stokes = area_sigma(*stokes, first_is_stokes ? "height_1" : "height_2");
    sb.area_sigma_antistokes = area_sigma(*anti, first_is_stokes ? "height_2" : "height_1");
    return sb;
}

double LorentzianFitOutcome::total_area() const {
    double a = 0.0;
    for (const auto& pk : peaks) a += pk.area();
    return a;
}

namespace {

struct AutoGuess {
    double baseline;
    double width;  // FWHM
    std::vector<double> centers;
    std::vector<double> heights;
};

AutoGuess auto_guess(const SpectrumTrace& t, bool want_two) {
    const auto& x = t.freq_offsets;
    const auto& y = t.psd;
    std::vector<double> sorted = y;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    AutoGuess g;
    g.baseline = sorted[sorted.size() / 2];

    // Local maxima above baseline, best two first.
    std::vector<std::pair<double, std::size_t>> maxima;
    for (std::size_t i = 1; i + 1 < y.size(); ++i)
        if (y[i] >= y[i - 1] && y[i] >= y[i + 1] && y[i] > g.baseline)
            maxima.emplace_back(y[i], i);
    std::sort(maxima.rbegin(), maxima.rend());

    auto half_width = [&](std::size_t ipk) {
        const double half = g.baseline + 0.5 * (y[ipk] - g.baseline);
        std::size_t lo = ipk, hi = ipk;
        while (lo > 0 && y[lo] > half) --lo;
        while (hi + 1 < y.size() && y[hi] > half) ++hi;
        return std::max(x[hi] - x[lo], 2.0 * (x[1] - x[0]));
    };

    std::size_t picked = 0;
    const double grid_step = x[1] - x[0];
    for (const auto& [val, idx] : maxima) {
        bool distinct = true;
        for (double c : g.centers)
            if (std::abs(x[idx] - c) < 3.0 * grid_step) distinct = false;
        if (!distinct) continue;
        g.centers.push_back(x[idx]);
        g.heights.push_back(val - g.baseline);
        if (++picked == (want_two ? 2u : 1u)) break;
    }
    if (g.centers.empty()) {
        g.centers.push_back(x[x.size() / 2]);
        g.heights.push_back(std::max(*std::max_element(y.begin(), y.end()) - g.baseline,
                                     1e-6 * std::max(g.baseline, 1.0)));
    }
    std::size_t ipk = std::size_t(
        std::lower_bound(x.begin(), x.end(), g.centers[0]) - x.begin());
    ipk = std::min(ipk, x.size() - 1);
    g.width = half_width(ipk);
    return g;
}

} // namespace

LorentzianFitOutcome fit_double_lorentzian(const SpectrumTrace& trace,
                                           const LorentzianInit& init) {
    trace.check();
    const auto& x = trace.freq_offsets;
    const auto& y = trace.psd;
    const double grid_step = x[1] - x[0];

    bool two = init.mode != LorentzianInit::Mode::Single;
    AutoGuess g = auto_guess(trace, two);
    if (init.baseline) g.baseline = *init.baseline;
    if (init.width) g.width = *init.width;
    if (!init.centers.empty()) {
        g.centers = init.centers;
        g.heights.assign(g.centers.size(), g.heights[0]);
    }

    bool single_fallback = false;
    if (init.mode == LorentzianInit::Mode::Double && g.centers.size() < 2) {
        // Caller demanded two peaks but only one is resolvable.
        single_fallback = true;
        two = false;
    }
    if (two && g.centers.size() >= 2 && std::abs(g.centers[0] - g.centers[1]) < 2.0 * grid_step) {
        single_fallback = true;
        two = false;
    }
    if (init.mode == LorentzianInit::Mode::Auto) two = two && g.centers.size() >= 2;
    if (two && g.centers.size() < 2) two = false;
    if (!two) {
        g.centers.resize(1);
        g.heights.resize(1);
    } else {
        std::sort(g.centers.begin(), g.centers.end());
    }

    // Parameters: [baseline, hwhm, c1, h1, (c2, h2)]
    const int n_peaks = two ? 2 : 1;
    Eigen::VectorXd p0(2 + 2 * n_peaks);
    p0(0) = g.baseline;
    p0(1) = g.width / 2.0;
    for (int k = 0; k < n_peaks; ++k) {
        p0(2 + 2 * k) = g.centers[k];
        p0(3 + 2 * k) = g.heights[std::min<std::size_t>(k, g.heights.size() - 1)];
    }

    auto fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
        const double hwhm = p(1);
        if (!(hwhm > 0)) return false;
        const std::size_t n = x.size();
        r.resize(n);
        if (jac) jac->setZero(n, p.size());
        for (std::size_t i = 0; i < n; ++i) {
            double model = p(0);
            if (jac) (*jac)(i, 0) = -1.0;
            for (int k = 0; k < n_peaks; ++k) {
                const double c = p(2 + 2 * k), h = p(3 + 2 * k);
                const double u = (x[i] - c) / hwhm;
                const double lor = 1.0 / (1.0 + u * u);
                model += h * lor;
                if (jac) {
                    (*jac)(i, 3 + 2 * k) = -lor;
                    (*jac)(i, 2 + 2 * k) = -h * lor * lor * 2.0 * u / hwhm;
                    (*jac)(i, 1) += -h * lor * lor * 2.0 * u * u / hwhm;
                }
            }
            r(i) = y[i] - model;
        }
        return true;
    };

    LeastSquaresOptions opt;
    const auto sol = levenberg_fit(fn, p0, opt);

    LorentzianFitOutcome out;
    out.single_peak = !two || single_fallback;
    out.baseline = sol.params(0);
    out.width = 2.0 * std::abs(sol.params(1));
    for (int k = 0; k < n_peaks; ++k)
        out.peaks.push_back(LorentzianPeak{sol.params(2 + 2 * k), sol.params(3 + 2 * k),
                                           std::abs(sol.params(1))});
    std::sort(out.peaks.begin(), out.peaks.end(),
              [](const LorentzianPeak& a, const LorentzianPeak& b) { return a.center < b.center; });

    FitResult& fr = out.result;
    fr.converged = sol.converged;
    fr.n_iter = sol.n_iter;
    fr.residual_rms = sol.residual_rms;
    fr.params["baseline"] = sol.params(0);
    fr.sigmas["baseline"] = sol.sigmas(0);
    fr.params["width"] = out.width;
    fr.sigmas["width"] = 2.0 * sol.sigmas(1);
    for (int k = 0; k < n_peaks; ++k) {
        const std::string suffix = "_" + std::to_string(k + 1);
        fr.params["center" + suffix] = sol.params(2 + 2 * k);
        fr.sigmas["center" + suffix] = sol.sigmas(2 + 2 * k);
        fr.params["height" + suffix] = sol.params(3 + 2 * k);
        fr.sigmas["height" + suffix] = sol.sigmas(3 + 2 * k);
    }
    return out;
}

double asymmetry_calibrate(const SidebandPair& sb) {
    if (sb.area_stokes < 0 || sb.area_antistokes < 0)
        throw FitError("asymmetry_calibrate: negative sideband area");
    const double diff = sb.area_stokes - sb.area_antistokes;
    if (diff <= 0)
        throw FitError("asymmetry_calibrate: asymmetry inverted (Stokes must exceed anti-Stokes)");
    const double combined_sigma = std::hypot(sb.area_sigma_stokes, sb.area_sigma_antistokes);
    if (diff < combined_sigma || diff < 1e-12 * sb.area_stokes)
        throw FitError("asymmetry_calibrate: ill-conditioned (sideband areas equal within error)");
    return sb.area_antistokes / diff;
}

double pll_phase_variance(double p_coherent, double p_total) {
    if (!(p_coherent > 0) || !(p_total > 0) || p_coherent > p_total)
        throw std::invalid_argument("pll_phase_variance: need 0 < p_coherent <= p_total");
    return -std::log(p_coherent / p_total);
}

} // namespace baesim::fits
