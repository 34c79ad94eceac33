#include "evib/sysid.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <set>
#include <vector>

#include "evib/optimize.hpp"

namespace evib {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kConvergedResidual = 0.25;

struct PreparedFrf {
    std::vector<double> freq;      // ascending, duplicates kept (one per sweep)
    std::vector<double> logmag;
    std::vector<double> phase;     // unwrapped along the sorted sequence
    int distinct = 0;
};

PreparedFrf prepare(const FrfPointSet& points, double lo_hz, double hi_hz) {
    std::vector<const FrfPoint*> sel;
    for (const FrfPoint& p : points.entries)
        if (p.freq_hz >= lo_hz && p.freq_hz <= hi_hz) sel.push_back(&p);
    std::sort(sel.begin(), sel.end(), [](const FrfPoint* a, const FrfPoint* b) {
        if (a->freq_hz != b->freq_hz) return a->freq_hz < b->freq_hz;
        return a->sweep < b->sweep;
    });

    PreparedFrf out;
    std::set<double> freqs;
    for (const FrfPoint* p : sel) {
        const double mag = std::abs(p->response);
        if (!(mag > 0.0) || !std::isfinite(mag))
            throw DataError("fit: zero or non-finite response magnitude in point set");
        out.freq.push_back(p->freq_hz);
        out.logmag.push_back(std::log(mag));
        double ph = std::arg(p->response);
        if (!out.phase.empty()) {
            // unwrap toward the previous point along the frequency ordering
            const double prev = out.phase.back();
            ph = prev + wrap_phase(ph - prev);
        }
        out.phase.push_back(ph);
        freqs.insert(p->freq_hz);
    }
    out.distinct = int(freqs.size());
    return out;
}

using ModelFn = std::function<std::complex<double>(double freq_hz, const Eigen::VectorXd& x)>;

// Residuals of the complex-log cost: log-magnitude difference and the
// difference between the model's unwrapped phase sequence and the data's.
Eigen::VectorXd complex_log_residuals(const PreparedFrf& d, const ModelFn& model,
                                      const Eigen::VectorXd& x) {
    const std::size_t n = d.freq.size();
    Eigen::VectorXd r(2 * n);
    double prev_model_phase = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::complex<double> h = model(d.freq[i], x);
        const double mag = std::abs(h);
        r[Eigen::Index(i)] = (mag > 0.0 && std::isfinite(mag))
                                 ? std::log(mag) - d.logmag[i]
                                 : 1e3;
        double ph = std::arg(h);
        if (i > 0) ph = prev_model_phase + wrap_phase(ph - prev_model_phase);
        prev_model_phase = ph;
        r[Eigen::Index(n + i)] = ph - d.phase[i];
    }
    return r;
}

struct GenericFit {
    Eigen::VectorXd x;
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool at_bound = false;
};

// Multi-start simplex + damped least squares in log-parameter space.
GenericFit fit_generic(const PreparedFrf& d, const ModelFn& model_log,
                       const std::vector<Eigen::VectorXd>& starts_log,
                       const Eigen::VectorXd& lo_log, const Eigen::VectorXd& hi_log) {
    auto residuals = [&](const Eigen::VectorXd& x) {
        return complex_log_residuals(d, model_log, x);
    };
    auto cost = [&](const Eigen::VectorXd& x) { return residuals(x).squaredNorm(); };

    GenericFit best;
    for (const Eigen::VectorXd& s : starts_log) {
        OptimOptions nm_opt;
        nm_opt.max_iterations = 250;
        nm_opt.tolerance = 1e-10;
        OptimResult coarse = nelder_mead(cost, s, lo_log, hi_log, nm_opt);
        OptimOptions lm_opt;
        lm_opt.max_iterations = 200;
        lm_opt.tolerance = 1e-12;
        OptimResult fine = levenberg_marquardt(residuals, coarse.x, lo_log, hi_log, lm_opt);
        const OptimResult& win = fine.cost <= coarse.cost ? fine : coarse;
        best.iterations += coarse.iterations + fine.iterations;
        if (win.cost < best.residual) {
            best.residual = win.cost;
            best.x = win.x;
        }
    }
    best.residual /= double(d.freq.size());
    for (Eigen::Index i = 0; i < best.x.size(); ++i) {
        const double span = hi_log[i] - lo_log[i];
        if (best.x[i] - lo_log[i] < 1e-6 * span || hi_log[i] - best.x[i] < 1e-6 * span)
            best.at_bound = true;
    }
    return best;
}

Eigen::VectorXd log_vec(std::initializer_list<double> vals) {
    Eigen::VectorXd v(Eigen::Index(vals.size()));
    Eigen::Index i = 0;
    for (double x : vals) v[i++] = std::log(x);
    return v;
}

double mag_at_lowest(const PreparedFrf& d) {
    double best = d.logmag.front();
    const double f0 = d.freq.front();
    for (std::size_t i = 0; i < d.freq.size() && d.freq[i] == f0; ++i)
        best = std::max(best, d.logmag[i]);
    return std::exp(best);
}

double peak_freq(const PreparedFrf& d) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < d.freq.size(); ++i)
        if (d.logmag[i] > d.logmag[arg]) arg = i;
    return d.freq[arg];
}

}  // namespace

FrfPointSet remove_setup(const FrfPointSet& points, const SetupModel& setup,
                         Warnings* warnings) {
    validate_setup_model(setup);
    FrfPointSet out;
    if (points.entries.empty()) return out;

    double peak = 0.0;
    std::vector<std::complex<double>> coloring(points.entries.size());
    for (std::size_t i = 0; i < points.entries.size(); ++i) {
        coloring[i] = setup_lateral_coloring(setup, points.entries[i].freq_hz);
        peak = std::max(peak, std::abs(coloring[i]));
    }
    for (std::size_t i = 0; i < points.entries.size(); ++i) {
        if (std::abs(coloring[i]) < 1e-6 * peak) {
            warn(warnings, "remove_setup: dropped entry at " +
                               std::to_string(points.entries[i].freq_hz) +
                               " Hz (rig response vanishes there)");
            continue;
        }
        FrfPoint p = points.entries[i];
        p.response /= coloring[i];
        out.entries.push_back(p);
    }
    return out;
}

FitResult fit_first_order(const FrfPointSet& points, double band_max_hz) {
    const PreparedFrf d = prepare(points, 0.0, band_max_hz);
    if (d.distinct < 4)
        throw DataError("fit_first_order: need at least 4 distinct frequencies in band");

    ModelFn model = [](double f, const Eigen::VectorXd& x) {
        const double k = std::exp(x[0]);
        const double wo = kTwoPi * std::exp(x[1]);
        const std::complex<double> jw(0.0, kTwoPi * f);
        return k * wo / (jw + wo);
    };
    const Eigen::VectorXd lo = log_vec({1e-5, 50.0});
    const Eigen::VectorXd hi = log_vec({1.0, 5000.0});

    const double k0 = std::clamp(mag_at_lowest(d), 2e-5, 0.5);
    std::vector<Eigen::VectorXd> starts;
    for (double ks : {k0 / 3.0, k0, 3.0 * k0})
        for (double fo : {100.0, 500.0, 2000.0})
            starts.push_back(log_vec({std::clamp(ks, 1e-5, 1.0), fo}));

    const GenericFit g = fit_generic(d, model, starts, lo, hi);
    FitResult r;
    r.kind = FitKind::first_order;
    r.first.k = std::exp(g.x[0]);
    r.first.omega_o = kTwoPi * std::exp(g.x[1]);
    r.residual = g.residual;
    r.iterations = g.iterations;
    r.converged = g.residual < kConvergedResidual && !g.at_bound;
    r.band_lo_hz = d.freq.front();
    r.band_hi_hz = d.freq.back();
    r.n_points = int(d.freq.size());
    return r;
}

FitResult fit_second_order(const FrfPointSet& points, double band_max_hz) {
    const PreparedFrf d = prepare(points, 0.0, band_max_hz);
    if (d.distinct < 5)
        throw DataError("fit_second_order: need at least 5 distinct frequencies in band");

    ModelFn model = [](double f, const Eigen::VectorXd& x) {
        const double m = std::exp(x[0]);
        const double b = std::exp(x[1]);
        const double k = std::exp(x[2]);
        const std::complex<double> jw(0.0, kTwoPi * f);
        return jw / (m * jw * jw + b * jw + k);
    };
    const Eigen::VectorXd lo = log_vec({1e-4, 0.05, 10.0});
    const Eigen::VectorXd hi = log_vec({0.1, 50.0, 1e5});

    const double w_pk = kTwoPi * peak_freq(d);
    double mag_pk = 0.0;
    for (std::size_t i = 0; i < d.freq.size(); ++i)
        mag_pk = std::max(mag_pk, std::exp(d.logmag[i]));
    const double b0 = std::clamp(1.0 / mag_pk, 0.1, 25.0);

    std::vector<Eigen::VectorXd> starts;
    for (double m0 : {3e-4, 1.5e-3, 7e-3})
        for (double bs : {b0 / 3.0, b0, 3.0 * b0})
            for (double kscale : {0.5, 1.0, 2.0}) {
                const double k0 = std::clamp(m0 * w_pk * w_pk * kscale, 10.0, 1e5);
                starts.push_back(log_vec({m0, std::clamp(bs, 0.05, 50.0), k0}));
            }

    const GenericFit g = fit_generic(d, model, starts, lo, hi);
    FitResult r;
    r.kind = FitKind::second_order;
    r.skin.m = std::exp(g.x[0]);
    r.skin.b = std::exp(g.x[1]);
    r.skin.k = std::exp(g.x[2]);
    r.residual = g.residual;
    r.iterations = g.iterations;
    r.converged = g.residual < kConvergedResidual && !g.at_bound;
    r.band_lo_hz = d.freq.front();
    r.band_hi_hz = d.freq.back();
    r.n_points = int(d.freq.size());
    return r;
}

FitResult fit_setup_normal(const FrfPointSet& impact_frf) {
    const PreparedFrf d = prepare(impact_frf, 0.0, 1e12);
    if (d.distinct < 5 || d.freq.back() / d.freq.front() < 5.0)
        throw DataError("fit_setup_normal: need >=5 distinct frequencies spanning a wide band");

    ModelFn model = [](double f, const Eigen::VectorXd& x) {
        const double k = std::exp(x[0]);
        const double wn = kTwoPi * std::exp(x[1]);
        const double zeta = std::exp(x[2]);
        const std::complex<double> jw(0.0, kTwoPi * f);
        return jw * k * wn * wn / (jw * jw + 2.0 * zeta * wn * jw + wn * wn);
    };
    const Eigen::VectorXd lo = log_vec({1e-4, 50.0, 1e-4});
    const Eigen::VectorXd hi = log_vec({100.0, 5000.0, 0.999});

    const double k0 = std::clamp(mag_at_lowest(d) / (kTwoPi * d.freq.front()), 2e-4, 50.0);
    std::vector<Eigen::VectorXd> starts;
    for (double ks : {k0 / 3.0, k0, 3.0 * k0})
        for (double fn : {500.0, 1500.0, 2500.0})
            for (double z : {0.01, 0.1, 0.4})
                starts.push_back(log_vec({std::clamp(ks, 1e-4, 100.0), fn, z}));

    const GenericFit g = fit_generic(d, model, starts, lo, hi);
    FitResult r;
    r.kind = FitKind::setup_normal;
    r.setup.normal.k_snd = std::exp(g.x[0]);
    r.setup.normal.f_n_hz = std::exp(g.x[1]);
    r.setup.normal.zeta = std::exp(g.x[2]);
    r.residual = g.residual;
    r.iterations = g.iterations;
    r.converged = g.residual < kConvergedResidual && !g.at_bound;
    r.band_lo_hz = d.freq.front();
    r.band_hi_hz = d.freq.back();
    r.n_points = int(d.freq.size());
    return r;
}

FitResult fit_setup_lateral(const FrfPointSet& impact_frf) {
    const PreparedFrf d = prepare(impact_frf, 0.0, 1e12);
    if (d.distinct < 7 || d.freq.back() / d.freq.front() < 5.0)
        throw DataError("fit_setup_lateral: need >=7 distinct frequencies spanning a wide band");

    // parameters: f_n, zeta (main resonance), f_z (numerator notch), b2,
    // f_p (biquad resonance), a2 -- all positive, fitted in log space
    ModelFn model = [](double f, const Eigen::VectorXd& x) {
        const double wn = kTwoPi * std::exp(x[0]);
        const double zeta = std::exp(x[1]);
        const double b1 = std::pow(kTwoPi * std::exp(x[2]), 2);
        const double b2 = std::exp(x[3]);
        const double a1 = std::pow(kTwoPi * std::exp(x[4]), 2);
        const double a2 = std::exp(x[5]);
        const std::complex<double> jw(0.0, kTwoPi * f);
        const std::complex<double> sec = jw * jw + 2.0 * zeta * wn * jw + wn * wn;
        const std::complex<double> bq_num = jw * jw + b2 * jw + b1;
        const std::complex<double> bq_den = jw * jw + a2 * jw + a1;
        return jw * wn * wn / sec * bq_num / bq_den;
    };
    const Eigen::VectorXd lo = log_vec({200.0, 1e-4, 100.0, 1e-2, 100.0, 1e-8});
    const Eigen::VectorXd hi = log_vec({5000.0, 0.999, 5000.0, 1e5, 5000.0, 1e4});

    // peak picking on distinct frequencies: the two largest local maxima seed
    // the biquad pole (lower) and main resonance (upper)
    std::vector<std::pair<double, double>> uniq;  // freq, max logmag
    for (std::size_t i = 0; i < d.freq.size(); ++i) {
        if (!uniq.empty() && uniq.back().first == d.freq[i])
            uniq.back().second = std::max(uniq.back().second, d.logmag[i]);
        else
            uniq.emplace_back(d.freq[i], d.logmag[i]);
    }
    std::vector<std::pair<double, double>> maxima;  // logmag, freq
    for (std::size_t i = 1; i + 1 < uniq.size(); ++i)
        if (uniq[i].second > uniq[i - 1].second && uniq[i].second >= uniq[i + 1].second)
            maxima.emplace_back(uniq[i].second, uniq[i].first);
    std::sort(maxima.rbegin(), maxima.rend());
    double f_p0 = 800.0, f_n0 = 1700.0;
    if (maxima.size() >= 2) {
        f_p0 = std::min(maxima[0].second, maxima[1].second);
        f_n0 = std::max(maxima[0].second, maxima[1].second);
    } else if (maxima.size() == 1) {
        f_p0 = maxima[0].second * 0.5;
        f_n0 = maxima[0].second;
    }
    double f_z0 = std::sqrt(f_p0 * f_n0);
    double z_min = std::numeric_limits<double>::infinity();
    for (const auto& [f, lm] : uniq)
        if (f > f_p0 && f < f_n0 && lm < z_min) {
            z_min = lm;
            f_z0 = f;
        }
    f_p0 = std::clamp(f_p0, 100.0, 5000.0);
    f_n0 = std::clamp(f_n0, 200.0, 5000.0);
    f_z0 = std::clamp(f_z0, 100.0, 5000.0);

    std::vector<Eigen::VectorXd> starts;
    for (double z : {0.01, 0.06, 0.3})
        for (double a2 : {1e-4, 1.0, 100.0})
            for (double b2 : {1.0, 50.0, 500.0})
                starts.push_back(log_vec({f_n0, z, f_z0, b2, f_p0, a2}));

    const GenericFit g = fit_generic(d, model, starts, lo, hi);
    FitResult r;
    r.kind = FitKind::setup_lateral;
    r.setup.lateral.f_n_hz = std::exp(g.x[0]);
    r.setup.lateral.zeta = std::exp(g.x[1]);
    r.setup.lateral.b1 = std::pow(kTwoPi * std::exp(g.x[2]), 2);
    r.setup.lateral.b2 = std::exp(g.x[3]);
    r.setup.lateral.a1 = std::pow(kTwoPi * std::exp(g.x[4]), 2);
    r.setup.lateral.a2 = std::exp(g.x[5]);
    r.setup.lateral.b3 = 1.0;
    r.setup.lateral.a3 = 1.0;
    r.residual = g.residual;
    r.iterations = g.iterations;
    r.converged = g.residual < kConvergedResidual && !g.at_bound;
    r.band_lo_hz = d.freq.front();
    r.band_hi_hz = d.freq.back();
    r.n_points = int(d.freq.size());
    return r;
}

}  // namespace evib
