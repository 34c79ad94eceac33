#include "evib/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "evib/errors.hpp"

namespace evib {

namespace {

Eigen::VectorXd clamp_box(Eigen::VectorXd x, const Eigen::VectorXd& lo,
                          const Eigen::VectorXd& hi) {
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x[i] = std::clamp(x[i], lo[i], hi[i]);
    return x;
}

void check_box(const Eigen::VectorXd& x0, const Eigen::VectorXd& lo,
               const Eigen::VectorXd& hi, const char* who) {
    if (x0.size() == 0 || lo.size() != x0.size() || hi.size() != x0.size())
        throw DataError(std::string(who) + ": dimension mismatch");
    for (Eigen::Index i = 0; i < x0.size(); ++i)
        if (!(lo[i] < hi[i])) throw DataError(std::string(who) + ": empty box");
}

}  // namespace

OptimResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                        const Eigen::VectorXd& x0, const Eigen::VectorXd& lo,
                        const Eigen::VectorXd& hi, const OptimOptions& opt) {
    check_box(x0, lo, hi, "nelder_mead");
    const Eigen::Index dim = x0.size();

    std::vector<Eigen::VectorXd> vx;
    std::vector<double> vf;
    vx.push_back(clamp_box(x0, lo, hi));
    vf.push_back(f(vx[0]));
    for (Eigen::Index i = 0; i < dim; ++i) {
        Eigen::VectorXd p = vx[0];
        const double step = 0.05 * (hi[i] - lo[i]);
        p[i] = p[i] + step <= hi[i] ? p[i] + step : p[i] - step;
        vx.push_back(clamp_box(p, lo, hi));
        vf.push_back(f(vx.back()));
    }

    auto order = [&] {
        std::vector<std::size_t> idx(vx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return vf[a] < vf[b];
        });
        std::vector<Eigen::VectorXd> nx(vx.size());
        std::vector<double> nf(vf.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            nx[i] = vx[idx[i]];
            nf[i] = vf[idx[i]];
        }
        vx.swap(nx);
        vf.swap(nf);
    };

    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        order();
        if (std::abs(vf.back() - vf.front()) <=
            opt.tolerance * (1.0 + std::abs(vf.front())))
            break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
        for (std::size_t i = 0; i + 1 < vx.size(); ++i) centroid += vx[i];
        centroid /= double(dim);

        const Eigen::VectorXd worst = vx.back();
        Eigen::VectorXd refl = clamp_box(centroid + (centroid - worst), lo, hi);
        const double f_refl = f(refl);

        if (f_refl < vf.front()) {
            Eigen::VectorXd expd = clamp_box(centroid + 2.0 * (centroid - worst), lo, hi);
            const double f_expd = f(expd);
            if (f_expd < f_refl) {
                vx.back() = expd;
                vf.back() = f_expd;
            } else {
                vx.back() = refl;
                vf.back() = f_refl;
            }
        } else if (f_refl < vf[vf.size() - 2]) {
            vx.back() = refl;
            vf.back() = f_refl;
        } else {
            Eigen::VectorXd contr = clamp_box(centroid + 0.5 * (worst - centroid), lo, hi);
            const double f_contr = f(contr);
            if (f_contr < vf.back()) {
                vx.back() = contr;
                vf.back() = f_contr;
            } else {
                for (std::size_t i = 1; i < vx.size(); ++i) {
                    vx[i] = clamp_box(vx[0] + 0.5 * (vx[i] - vx[0]), lo, hi);
                    vf[i] = f(vx[i]);
                }
            }
        }
    }
    order();
    return {vx.front(), vf.front(), it};
}

OptimResult levenberg_marquardt(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residuals,
    const Eigen::VectorXd& x0, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
    const OptimOptions& opt) {
    check_box(x0, lo, hi, "levenberg_marquardt");
    const Eigen::Index dim = x0.size();

    Eigen::VectorXd x = clamp_box(x0, lo, hi);
    Eigen::VectorXd r = residuals(x);
    double cost = r.squaredNorm();
    double lambda = 1e-3;

    int it = 0;
    bool done = false;
    for (; it < opt.max_iterations && !done; ++it) {
        Eigen::MatrixXd jac(r.size(), dim);
        for (Eigen::Index j = 0; j < dim; ++j) {
            const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
            Eigen::VectorXd xp = x;
            xp[j] = std::min(x[j] + h, hi[j]);
            const double dh = xp[j] - x[j];
            if (dh == 0.0) {
                xp[j] = x[j] - h;
                jac.col(j) = (residuals(xp) - r) / (xp[j] - x[j]);
            } else {
                jac.col(j) = (residuals(xp) - r) / dh;
            }
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;
        if (jtr.norm() <= opt.tolerance * (1.0 + cost)) break;

        bool improved = false;
        for (int tries = 0; tries < 12; ++tries) {
            Eigen::MatrixXd damped = jtj;
            damped.diagonal().array() += lambda;
            const Eigen::VectorXd step = damped.ldlt().solve(-jtr);
            const Eigen::VectorXd cand = clamp_box(x + step, lo, hi);
            const Eigen::VectorXd rc = residuals(cand);
            const double cost_c = rc.squaredNorm();
            if (cost_c < cost) {
                const double step_norm = (cand - x).norm();
                x = cand;
                r = rc;
                cost = cost_c;
                lambda = std::max(lambda * 0.4, 1e-12);
                improved = true;
                done = step_norm <= opt.tolerance * (1.0 + x.norm());
                break;
            }
            lambda *= 5.0;
        }
        if (!improved) break;
    }
    return {x, cost, it};
}

}  // namespace evib
