#pragma once

#include <Eigen/Dense>
#include <functional>

namespace evib {

struct OptimOptions {
    int max_iterations = 300;
    double tolerance = 1e-12;
};

struct OptimResult {
    Eigen::VectorXd x;
    double cost = 0.0;
    int iterations = 0;
};

/// Derivative-free Nelder-Mead simplex minimization with box constraints
/// (candidate vertices are clamped into [lo, hi]). Monotone in the best
/// vertex; used to get multi-start initial points into a good basin.
OptimResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                        const Eigen::VectorXd& x0, const Eigen::VectorXd& lo,
                        const Eigen::VectorXd& hi, const OptimOptions& opt = {});

/// Damped least squares (Levenberg-Marquardt) on a residual vector with a
/// forward-difference Jacobian and box constraints via step clamping. Only
/// improving steps are accepted, so the cost sequence is monotone.
OptimResult levenberg_marquardt(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residuals,
    const Eigen::VectorXd& x0, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
    const OptimOptions& opt = {});

}  // namespace evib
