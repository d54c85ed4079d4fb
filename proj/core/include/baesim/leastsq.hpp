#pragma once

#include <functional>

#include <Eigen/Dense>

namespace baesim::fits {

struct LeastSquaresOptions {
    int max_iter = 200;
    double cost_rel_tol = 1e-10;  // stop when the relative cost change drops below this
    double step_tol = 1e-12;      // or when the step norm does
    double lambda_init = 1e-3;
    bool finite_diff = false;     // ignore callback Jacobians, use forward differences
    double fd_step = 1e-7;        // relative forward-difference step
};

/// Fills residuals and, when jac != nullptr, the n_res x n_par Jacobian of the
/// residuals. Returning false rejects the parameter point (out of domain).
using ResidualFn =
    std::function<bool(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd*)>;

struct LeastSquaresSolution {
    Eigen::VectorXd params;
    Eigen::VectorXd sigmas;  // 1-sigma from the scaled normal-equation inverse
    double cost = 0.0;       // 0.5 * |r|^2
    double residual_rms = 0.0;
    bool converged = false;
    int n_iter = 0;
};

/// Damped (Levenberg-style) least squares with multiplicative lambda adaptation.
LeastSquaresSolution levenberg_fit(const ResidualFn& fn, Eigen::VectorXd init,
                                   const LeastSquaresOptions& opt = {});

} // namespace baesim::fits
