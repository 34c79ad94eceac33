#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace evib {

/// OLS fit of value ~ 1 + force + speed + force*speed.
struct LinearFit {
    double intercept = 0.0;
    double coef_force = 0.0;
    double coef_speed = 0.0;
    double coef_interaction = 0.0;
    std::array<double, 4> std_errors{};
    double r_squared = 0.0;
    std::size_t n = 0;
    std::vector<double> residuals;
};

struct RegressionSample {
    double force = 0.0;
    double speed = 0.0;
    double value = 0.0;
};

/// Least-squares solve via column-pivoted QR; throws DataError on n < 8 or a
/// rank-deficient design (e.g. a single speed level makes speed and
/// force*speed collinear with the intercept block). Standard errors come from
/// the unbiased residual variance.
LinearFit ols_fit(const std::vector<RegressionSample>& samples);

struct Correlation {
    double r = 0.0;
    double p = 1.0;
    std::size_t n = 0;
};

/// Pearson correlation with a two-sided p-value from the exact t distribution
/// (regularized incomplete beta), t = r*sqrt((n-2)/(1-r^2)).
Correlation pearson(const std::vector<double>& xs, const std::vector<double>& ys);

/// Regularized incomplete beta I_x(a, b) by continued fraction (Lentz), used
/// for the t-distribution CDF. Exposed for oracle cross-checks.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided p-value for a t statistic with `dof` degrees of freedom.
double t_two_sided_p(double t, double dof);

}  // namespace evib
