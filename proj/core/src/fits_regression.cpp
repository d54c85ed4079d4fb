#include <cmath>

#include "baesim/errors.hpp"
#include "baesim/fits.hpp"

namespace baesim::fits {

PowerSweepFit power_sweep_regression(const std::vector<PowerPoint>& points) {
    if (points.size() < 3)
        throw FitError("power_sweep_regression: need at least 3 points");
    for (const auto& pt : points)
        if (!(pt.coop > 0))
            throw std::invalid_argument("power_sweep_regression: C values must be > 0");

    const double c0 = points.front().coop;
    bool all_equal = true;
    for (const auto& pt : points) all_equal = all_equal && pt.coop == c0;
    if (all_equal)
        throw FitError("power_sweep_regression: rank-deficient design (all C equal)");

    // Weighted straight line n_meas = n0 + beta * C.
    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (const auto& pt : points) {
        const double w = pt.weight;
        sw += w;
        swx += w * pt.coop;
        swy += w * pt.n_meas;
        swxx += w * pt.coop * pt.coop;
        swxy += w * pt.coop * pt.n_meas;
    }
    const double det = sw * swxx - swx * swx;
    if (!(det > 0))
        throw FitError("power_sweep_regression: rank-deficient design");
    PowerSweepFit f;
    f.beta = (sw * swxy - swx * swy) / det;
    f.base_occupation = (swxx * swy - swx * swxy) / det;

    double ss_lin = 0;
    for (const auto& pt : points) {
        const double r = pt.n_meas - (f.base_occupation + f.beta * pt.coop);
        ss_lin += pt.weight * r * r;
    }
    const double dof_lin = std::max<std::size_t>(1, points.size() - 2);
    const double s2_lin = ss_lin / double(dof_lin);
    f.beta_sigma = std::sqrt(s2_lin * sw / det);
    f.base_sigma = std::sqrt(s2_lin * swxx / det);

    // Imprecision n_imp = s / C through the origin, eta = 1 / (8 s).
    double sxx = 0, sxy = 0;
    for (const auto& pt : points) {
        const double xc = 1.0 / pt.coop;
        sxx += pt.weight * xc * xc;
        sxy += pt.weight * xc * pt.n_imp;
    }
    const double slope = sxy / sxx;
    if (!(slope > 0))
        throw FitError("power_sweep_regression: non-positive imprecision slope");
    f.eta = 1.0 / (8.0 * slope);

    double ss_imp = 0;
    for (const auto& pt : points) {
        const double r = pt.n_imp - slope / pt.coop;
        ss_imp += pt.weight * r * r;
    }
    const double dof_imp = std::max<std::size_t>(1, points.size() - 1);
    const double slope_sigma = std::sqrt(ss_imp / double(dof_imp) / sxx);
    f.eta_sigma = slope_sigma / (8.0 * slope * slope);

    FitResult& r = f.result;
    r.converged = true;
    r.n_iter = 1;
    r.residual_rms = std::sqrt((ss_lin + ss_imp) / double(2 * points.size()));
    r.params = {{"beta", f.beta},
                {"base_occupation", f.base_occupation},
                {"eta", f.eta}};
    r.sigmas = {{"beta", f.beta_sigma},
                {"base_occupation", f.base_sigma},
                {"eta", f.eta_sigma}};
    return f;
}

} // namespace baesim::fits
