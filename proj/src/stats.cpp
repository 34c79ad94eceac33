#include "evib/stats.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "evib/errors.hpp"

namespace evib {

LinearFit ols_fit(const std::vector<RegressionSample>& samples) {
    const std::size_t n = samples.size();
    if (n < 8) throw DataError("ols_fit: need at least 8 samples, got " + std::to_string(n));

    Eigen::MatrixXd x(n, 4);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = samples[i];
        if (!std::isfinite(s.value) || !std::isfinite(s.force) || !std::isfinite(s.speed))
            throw DataError("ols_fit: non-finite sample");
        x(i, 0) = 1.0;
        x(i, 1) = s.force;
        x(i, 2) = s.speed;
        x(i, 3) = s.force * s.speed;
        y(i) = s.value;
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < 4)
        throw DataError("ols_fit: rank-deficient design (fewer than 2 distinct "
                        "speed or force levels?)");

    Eigen::VectorXd beta = qr.solve(y);
    Eigen::VectorXd resid = y - x * beta;
    const double rss = resid.squaredNorm();
    const double sigma2 = rss / static_cast<double>(n - 4);
    Eigen::MatrixXd xtx_inv =
        (x.transpose() * x).ldlt().solve(Eigen::MatrixXd::Identity(4, 4));

    LinearFit fit;
    fit.intercept = beta(0);
    fit.coef_force = beta(1);
    fit.coef_speed = beta(2);
    fit.coef_interaction = beta(3);
    for (int j = 0; j < 4; ++j) fit.std_errors[size_t(j)] = std::sqrt(sigma2 * xtx_inv(j, j));
    const double mean_y = y.mean();
    const double tss = (y.array() - mean_y).matrix().squaredNorm();
    fit.r_squared = tss > 0.0 ? std::max(0.0, 1.0 - rss / tss) : 1.0;
    fit.n = n;
    fit.residuals.assign(resid.data(), resid.data() + n);
    return fit;
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw DataError("incomplete beta: a, b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    // symmetry keeps the continued fraction in its fast-converging region
    if (x > (a + 1.0) / (a + b + 2.0))
        return 1.0 - regularized_incomplete_beta(b, a, 1.0 - x);

    const double ln_front = a * std::log(x) + b * std::log1p(-x) - std::log(a) +
                            std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    const double front = std::exp(ln_front);

    // Lentz's algorithm for the standard incomplete-beta continued fraction
    const double tiny = std::numeric_limits<double>::min() * 1e10;
    double f = 1.0, c = 1.0, d = 0.0;
    for (int i = 0; i <= 400; ++i) {
        const int m = i / 2;
        double num;
        if (i == 0)
            num = 1.0;
        else if (i % 2 == 0)
            num = m * (b - m) * x / ((a + 2.0 * m - 1.0) * (a + 2.0 * m));
        else
            num = -(a + m) * (a + b + m) * x / ((a + 2.0 * m) * (a + 2.0 * m + 1.0));
        d = 1.0 + num * d;
        if (std::abs(d) < tiny) d = tiny;
        d = 1.0 / d;
        c = 1.0 + num / c;
        if (std::abs(c) < tiny) c = tiny;
        const double ratio = c * d;
        f *= ratio;
        if (std::abs(1.0 - ratio) < 1e-15) break;
    }
    return front * (f - 1.0);
}

double t_two_sided_p(double t, double dof) {
    if (!(dof > 0.0)) throw DataError("t_two_sided_p: dof must be positive");
    if (!std::isfinite(t)) return 0.0;
    const double x = dof / (dof + t * t);
    return regularized_incomplete_beta(dof / 2.0, 0.5, x);
}

Correlation pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw DataError("pearson: length mismatch");
    const std::size_t n = xs.size();
    if (n < 3) throw DataError("pearson: need at least 3 points");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) throw DataError("pearson: zero variance input");

    Correlation out;
    out.n = n;
    out.r = sxy / std::sqrt(sxx * syy);
    // clamp rounding residue so the t transform stays defined at |r| = 1
    out.r = std::max(-1.0, std::min(1.0, out.r));
    if (std::abs(out.r) >= 1.0) {
        out.p = 0.0;
        return out;
    }
    const double dof = double(n - 2);
    const double t = out.r * std::sqrt(dof / (1.0 - out.r * out.r));
    out.p = t_two_sided_p(t, dof);
    return out;
}

}  // namespace evib
