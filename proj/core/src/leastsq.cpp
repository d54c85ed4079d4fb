#include "baesim/leastsq.hpp"

#include <cmath>
#include <stdexcept>

namespace baesim::fits {

namespace {

bool eval(const ResidualFn& fn, const LeastSquaresOptions& opt, const Eigen::VectorXd& p,
          Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    if (!opt.finite_diff) return fn(p, r, jac);
    if (!fn(p, r, nullptr)) return false;
    if (jac) {
        jac->resize(r.size(), p.size());
        Eigen::VectorXd rp;
        for (int j = 0; j < p.size(); ++j) {
            Eigen::VectorXd q = p;
            const double h = opt.fd_step * std::max(1.0, std::abs(p(j)));
            q(j) += h;
            if (!fn(q, rp, nullptr)) return false;
            jac->col(j) = (rp - r) / h;
        }
    }
    return true;
}

} // namespace

LeastSquaresSolution levenberg_fit(const ResidualFn& fn, Eigen::VectorXd init,
                                   const LeastSquaresOptions& opt) {
    LeastSquaresSolution sol;
    sol.params = std::move(init);
    const int n_par = int(sol.params.size());

    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    if (!eval(fn, opt, sol.params, r, &jac))
        throw std::invalid_argument("levenberg_fit: initial point rejected by model");
    double cost = 0.5 * r.squaredNorm();
    double lambda = opt.lambda_init;

    for (int it = 0; it < opt.max_iter; ++it) {
        sol.n_iter = it + 1;
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd g = jac.transpose() * r;

        bool stepped = false;
        for (int tries = 0; tries < 25 && !stepped; ++tries) {
            Eigen::MatrixXd damped = jtj;
            for (int k = 0; k < n_par; ++k)
                damped(k, k) += lambda * std::max(jtj(k, k), 1e-30);
            const Eigen::VectorXd step = damped.ldlt().solve(-g);

            Eigen::VectorXd trial = sol.params + step;
            Eigen::VectorXd r_trial;
            if (eval(fn, opt, trial, r_trial, nullptr)) {
                const double cost_trial = 0.5 * r_trial.squaredNorm();
                if (cost_trial <= cost) {
                    const double rel_drop = (cost - cost_trial) / std::max(cost, 1e-300);
                    sol.params = std::move(trial);
                    r = std::move(r_trial);
                    const double step_norm =
                        step.norm() / std::max(1.0, sol.params.norm());
                    cost = cost_trial;
                    lambda = std::max(lambda / 3.0, 1e-14);
                    stepped = true;
                    if (rel_drop < opt.cost_rel_tol || step_norm < opt.step_tol) {
                        sol.converged = true;
                    }
                    break;
                }
            }
            lambda *= 4.0;
        }
        if (!stepped) {
            // No downhill step found at any damping: treat as stationary.
            sol.converged = cost < 1e-300 || sol.n_iter > 1;
            break;
        }
        if (sol.converged) break;
        if (!eval(fn, opt, sol.params, r, &jac)) break;
    }

    sol.cost = cost;
    const int n_res = int(r.size());
    sol.residual_rms = n_res > 0 ? std::sqrt(2.0 * cost / n_res) : 0.0;

    // Parameter covariance: (J^T J)^{-1} scaled by the residual variance.
    eval(fn, opt, sol.params, r, &jac);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const double dof = std::max(1, n_res - n_par);
    const double s2 = 2.0 * cost / dof;
    const Eigen::MatrixXd cov =
        jtj.completeOrthogonalDecomposition().pseudoInverse() * s2;
    sol.sigmas.resize(n_par);
    for (int k = 0; k < n_par; ++k)
        sol.sigmas(k) = std::sqrt(std::max(0.0, cov(k, k)));
    return sol;
}

} // namespace baesim::fits
