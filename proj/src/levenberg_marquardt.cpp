#include "magnomech/levenberg_marquardt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace magnomech
{
Eigen::MatrixXd finite_difference_jacobian(const ResidualFunction& f, const Eigen::VectorXd& x,
                                           Eigen::Index residual_count, double relative_step)
{
    const Eigen::Index n = x.size();
    Eigen::MatrixXd jac(residual_count, n);
    Eigen::VectorXd probe = x;
    Eigen::VectorXd r_plus(residual_count);
    Eigen::VectorXd r_minus(residual_count);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double h = relative_step * std::max(std::abs(x[j]), 1.0);
        probe[j] = x[j] + h;
        f(probe, r_plus);
        probe[j] = x[j] - h;
        f(probe, r_minus);
        probe[j] = x[j];
        jac.col(j) = (r_plus - r_minus) / (2.0 * h);
    }
    return jac;
}

LmResult levenberg_marquardt(const ResidualFunction& f, Eigen::VectorXd x0, Eigen::Index residual_count,
                             const LmOptions& options)
{
    const Eigen::Index n = x0.size();
    LmResult result;
    result.params = std::move(x0);

    Eigen::VectorXd r(residual_count);
    f(result.params, r);
    result.cost = 0.5 * r.squaredNorm();
    result.accepted_costs.push_back(result.cost);

    double lambda = options.lambda_initial;
    Eigen::VectorXd r_trial(residual_count);

    while (result.iterations < options.max_iterations && !result.converged) {
        ++result.iterations;
        const Eigen::MatrixXd jac = finite_difference_jacobian(f, result.params, residual_count,
                                                               options.fd_relative_step);
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd grad = jac.transpose() * r;
        Eigen::VectorXd diag = jtj.diagonal();
        const double diag_floor = std::max(diag.maxCoeff(), 1.0) * std::numeric_limits<double>::epsilon();
        diag = diag.cwiseMax(diag_floor);

        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd damped = jtj;
            damped.diagonal() += lambda * diag;
            const Eigen::VectorXd step = damped.ldlt().solve(-grad);
            const bool small = step.norm() <= options.step_tolerance * (result.params.norm() + options.step_tolerance);

            const Eigen::VectorXd trial = result.params + step;
            f(trial, r_trial);
            const double trial_cost = 0.5 * r_trial.squaredNorm();
            if (std::isfinite(trial_cost) && trial_cost < result.cost) {
                result.params = trial;
                r = r_trial;
                result.cost = trial_cost;
                result.accepted_costs.push_back(trial_cost);
                lambda = std::max(lambda / options.lambda_down, 1e-12);
                accepted = true;
                result.converged = small;
            } else if (small) {
                // No representable decrease left along a negligible step.
                result.converged = true;
                break;
            } else {
                lambda *= options.lambda_up;
                if (lambda > options.lambda_max) {
                    break;
                }
            }
        }
        if (!accepted && !result.converged) {
            break;
        }
    }

    const Eigen::MatrixXd jac = finite_difference_jacobian(f, result.params, residual_count,
                                                           options.fd_relative_step);
    const Eigen::Index dof = std::max<Eigen::Index>(residual_count - n, 1);
    const double scale = 2.0 * result.cost / static_cast<double>(dof);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    result.covariance = scale * jtj.completeOrthogonalDecomposition().pseudoInverse();
    return result;
}
}  // namespace magnomech
