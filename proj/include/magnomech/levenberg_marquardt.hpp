#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace magnomech
{
// Fills `residuals` (size fixed by the caller) for the parameter vector.
using ResidualFunction = std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& residuals)>;

struct LmOptions
{
    double lambda_initial = 1e-3;
    double lambda_up = 10.0;
    double lambda_down = 10.0;
    double lambda_max = 1e16;
    int max_iterations = 200;
    double step_tolerance = 1e-8;  // relative parameter step
    double fd_relative_step = 1e-6;
};

struct LmResult
{
    Eigen::VectorXd params;
    Eigen::MatrixXd covariance;  // residual-scaled (J^T J)^-1 at the optimum
    double cost = 0.0;           // 0.5 * |r|^2
    int iterations = 0;          // Jacobian evaluations
    bool converged = false;
    std::vector<double> accepted_costs;  // cost after every accepted step, starting with the initial cost
};

// Central-difference Jacobian of f at x.
Eigen::MatrixXd finite_difference_jacobian(const ResidualFunction& f, const Eigen::VectorXd& x,
                                           Eigen::Index residual_count, double relative_step);

// Damped Gauss-Newton on 0.5 |f(x)|^2 with Marquardt diagonal scaling.
LmResult levenberg_marquardt(const ResidualFunction& f, Eigen::VectorXd x0, Eigen::Index residual_count,
                             const LmOptions& options = {});
}  // namespace magnomech
