#include "evib/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "evib/modulation.hpp"
#include "evib/spectrum.hpp"

namespace evib {

Waveform reduce_lateral_to_1d(const Waveform& fx, const Waveform& fy) {
    if (fx.size() != fy.size() || fx.size() == 0)
        throw DataError("reduce_lateral_to_1d: channels must be equal-length and non-empty");
    if (fx.rate_hz != fy.rate_hz)
        throw DataError("reduce_lateral_to_1d: channels must share a sample rate");

    const Spectrum sx = spectrum(fx);
    const Spectrum sy = spectrum(fy);

    // dominant principal axis of the ensemble of per-bin complex 2-vectors:
    // eigenvector of the real part of the aggregated coherency matrix
    double a = 0.0, b = 0.0, c = 0.0;
    for (std::size_t k = 0; k < sx.size(); ++k) {
        a += std::norm(sx.bins[k]);
        b += std::norm(sy.bins[k]);
        c += (sx.bins[k] * std::conj(sy.bins[k])).real();
    }
    double ux, uy;
    const double disc = std::hypot(0.5 * (a - b), c);
    if (disc < 1e-30 * std::max(1.0, a + b)) {
        ux = 0.0;  // fully degenerate: fall back to the y-axis
        uy = 1.0;
    } else if (std::abs(c) < 1e-30 * std::max(1.0, a + b)) {
        ux = a > b ? 1.0 : 0.0;  // axis-aligned; ties resolve toward y
        uy = a > b ? 0.0 : 1.0;
    } else {
        const double lam = 0.5 * (a + b) + disc;
        ux = c;
        uy = lam - a;
        const double norm = std::hypot(ux, uy);
        ux /= norm;
        uy /= norm;
    }
    if (uy < 0.0 || (uy == 0.0 && ux < 0.0)) {
        ux = -ux;
        uy = -uy;
    }

    Spectrum out = sx;
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double mag = std::sqrt(std::norm(sx.bins[k]) + std::norm(sy.bins[k]));
        std::complex<double> proj = ux * sx.bins[k] + uy * sy.bins[k];
        if (std::abs(proj) < 1e-300) {
            // bin orthogonal to the dominant axis: phase from its own larger channel
            proj = std::abs(sy.bins[k]) >= std::abs(sx.bins[k]) ? sy.bins[k] : sx.bins[k];
        }
        const bool real_bin = k == 0 || (fx.size() % 2 == 0 && k == out.size() - 1);
        if (real_bin) {
            out.bins[k] = proj.real() >= 0.0 ? mag : -mag;
        } else if (std::abs(proj) < 1e-300) {
            out.bins[k] = 0.0;
        } else {
            out.bins[k] = mag * (proj / std::abs(proj));
        }
    }
    return irfft(out, fx.unit);
}

void align_accelerometer(const Waveform& ax, const Waveform& ay, const Waveform& az,
                         Waveform& out_x, Waveform& out_y, Waveform& out_z) {
    if (ax.size() != ay.size() || ax.size() != az.size())
        throw DataError("align_accelerometer: channels must be equal-length");
    // R_y(180) * R_x(155): symmetric and involutory, so the same matrix maps
    // force frame -> sensor frame and back
    const double th = kAzimuthDeg * std::numbers::pi / 180.0;
    const double ct = std::cos(th), st = std::sin(th);
    const double r[3][3] = {{-1.0, 0.0, 0.0}, {0.0, ct, -st}, {0.0, -st, -ct}};

    for (Waveform* o : {&out_x, &out_y, &out_z}) {
        o->rate_hz = ax.rate_hz;
        o->unit = Unit::meter_per_second_sq;
        o->samples.resize(ax.size());
    }
    for (std::size_t i = 0; i < ax.size(); ++i) {
        const double v[3] = {ax.samples[i], ay.samples[i], az.samples[i]};
        out_x.samples[i] = 9.8 * (r[0][0] * v[0] + r[0][1] * v[1] + r[0][2] * v[2]);
        out_y.samples[i] = 9.8 * (r[1][0] * v[0] + r[1][1] * v[1] + r[1][2] * v[2]);
        out_z.samples[i] = 9.8 * (r[2][0] * v[0] + r[2][1] * v[1] + r[2][2] * v[2]);
    }
}

std::vector<SweepSegment> detect_sweeps(const Waveform& friction_1d) {
    if (friction_1d.samples.empty()) throw DataError("detect_sweeps: empty signal");
    const std::size_t n = friction_1d.size();
    const double global_mean = mean(friction_1d);

    // centered 50 ms moving average, odd length, partial windows at the edges
    std::size_t w = static_cast<std::size_t>(std::llround(0.05 * friction_1d.rate_hz));
    if (w < 1) w = 1;
    if (w % 2 == 0) ++w;
    const std::size_t h = w / 2;
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + friction_1d.samples[i];

    std::vector<SweepSegment> segments;
    bool in_run = false;
    std::size_t run_start = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= h ? i - h : 0;
        const std::size_t hi = std::min(n - 1, i + h);
        const double avg = (prefix[hi + 1] - prefix[lo]) / double(hi - lo + 1);
        const bool above = avg > global_mean;
        if (above && !in_run) {
            in_run = true;
            run_start = i;
        }
        if ((!above || i == n - 1) && in_run) {
            const std::size_t run_end = above ? i : i - 1;
            in_run = false;
            if (run_end - run_start + 1 >= 4000) {
                SweepSegment seg;
                seg.start_index = run_start;
                seg.end_index = run_end;
                seg.middle_index = static_cast<std::size_t>(
                    std::llround(0.5 * double(run_start + run_end)));
                segments.push_back(seg);
            }
        }
    }
    return segments;
}

std::vector<SweepWindow> extract_windows(const TrialRecord& trial,
                                         const std::vector<SweepSegment>& sweeps,
                                         Warnings* warnings) {
    const std::size_t n = trial.voltage.size();
    if (trial.force_x.size() != n || trial.force_y.size() != n ||
        trial.accel_x.size() != n || trial.accel_y.size() != n || trial.accel_z.size() != n)
        throw DataError("extract_windows: trial channels disagree in length");

    const double est_speed = trial.position.size() >= 2
                                 ? estimate_speed(trial.position)
                                 : 0.0;

    auto slice = [](const Waveform& w, std::size_t lo) {
        Waveform out;
        out.rate_hz = w.rate_hz;
        out.unit = w.unit;
        out.samples.assign(w.samples.begin() + long(lo), w.samples.begin() + long(lo) + 4000);
        return out;
    };
    auto position_at = [&](double t) {
        // nearest 60 Hz sample; the track is piecewise smooth so this is ample
        // for a direction decision
        const auto& pos = trial.position;
        std::size_t best = 0;
        double best_dt = std::abs(pos[0].time_s - t);
        for (std::size_t i = 1; i < pos.size(); ++i) {
            const double dt = std::abs(pos[i].time_s - t);
            if (dt < best_dt) {
                best_dt = dt;
                best = i;
            }
        }
        return pos[best].position_mm;
    };

    std::vector<SweepWindow> windows;
    for (const SweepSegment& seg : sweeps) {
        if (seg.middle_index < 1999 || seg.middle_index + 2000 >= n) {
            warn(warnings, "extract_windows: sweep window at middle index " +
                               std::to_string(seg.middle_index) + " leaves the record; skipped");
            continue;
        }
        bool l2r = seg.left_to_right;
        if (!trial.position.empty()) {
            const double x0 = position_at(double(seg.start_index) / trial.voltage.rate_hz);
            const double x1 = position_at(double(seg.end_index) / trial.voltage.rate_hz);
            l2r = x1 >= x0;
        }
        if (!l2r) {
            warn(warnings, "extract_windows: right-to-left sweep at middle index " +
                               std::to_string(seg.middle_index) + " skipped");
            continue;
        }

        const std::size_t lo = seg.middle_index - 1999;
        SweepWindow win;
        win.voltage = slice(trial.voltage, lo);
        win.friction_1d = reduce_lateral_to_1d(slice(trial.force_x, lo), slice(trial.force_y, lo));

        Waveform gx, gy, gz;
        align_accelerometer(slice(trial.accel_x, lo), slice(trial.accel_y, lo),
                            slice(trial.accel_z, lo), gx, gy, gz);
        win.velocity = integrate_to_velocity(reduce_lateral_to_1d(gx, gy));

        win.ordinal = int(windows.size()) + 1;
        win.proto = trial.proto;
        win.participant = trial.participant;
        win.estimated_speed_mm_s = est_speed;
        windows.push_back(std::move(win));
    }
    return windows;
}

FrfPoint frf_point(const SweepWindow& window, double message_freq_hz, double carrier_hz) {
    const SinusoidEstimate est =
        am_demodulate_sideband(window.voltage, carrier_hz, message_freq_hz);
    const Waveform recon = reconstruct_sinusoid(est, window.voltage.size(),
                                                window.voltage.rate_hz, Unit::volt);
    const std::complex<double> den = fft_coefficient(recon, message_freq_hz);
    const double full_scale = window.proto.amplitude_vpp > 0.0
                                  ? window.proto.amplitude_vpp * window.proto.amplitude_vpp / 8.0
                                  : 1.0;
    if (std::abs(den) < 1e-9 * full_scale)
        throw DataError("frf_point: demodulated message coefficient is below 1e-9 of "
                        "full scale; response undefined");
    const std::complex<double> num = fft_coefficient(window.friction_1d, message_freq_hz);

    FrfPoint p;
    p.freq_hz = message_freq_hz;
    p.response = num / den;
    if (!std::isfinite(p.response.real()) || !std::isfinite(p.response.imag()))
        throw DataError("frf_point: non-finite response");
    p.sweep = window.ordinal;
    p.speed_mm_s = window.proto.speed_mm_s;
    p.force_n = window.proto.force_n;
    p.participant = window.participant;
    return p;
}

FrfPoint skin_point(const SweepWindow& window, double message_freq_hz) {
    const std::complex<double> den = fft_coefficient(window.friction_1d, message_freq_hz);
    if (std::abs(den) < 1e-12)
        throw DataError("skin_point: friction coefficient vanishes; response undefined");
    FrfPoint p;
    p.freq_hz = message_freq_hz;
    p.response = fft_coefficient(window.velocity, message_freq_hz) / den;
    if (!std::isfinite(p.response.real()) || !std::isfinite(p.response.imag()))
        throw DataError("skin_point: non-finite response");
    p.sweep = window.ordinal;
    p.speed_mm_s = window.proto.speed_mm_s;
    p.force_n = window.proto.force_n;
    p.participant = window.participant;
    return p;
}

double estimate_speed(const std::vector<PositionSample>& position) {
    if (position.size() < 2) throw DataError("estimate_speed: need at least two samples");

    // ~0.1 s baselines: long enough that 0.1 mm quantization contributes <5%
    // at the slowest protocol speed, short enough to stay inside one sweep
    std::size_t stride = 1;
    if (position.size() > 2) {
        const double dt = (position.back().time_s - position.front().time_s) /
                          double(position.size() - 1);
        if (dt > 0.0) stride = std::max<std::size_t>(1, std::llround(0.1 / dt));
        stride = std::min(stride, position.size() - 1);
    }

    std::vector<double> slopes;
    for (std::size_t i = 0; i + stride < position.size(); ++i) {
        const double dt = position[i + stride].time_s - position[i].time_s;
        if (dt <= 0.0) throw DataError("estimate_speed: timestamps must increase");
        slopes.push_back(
            std::abs(position[i + stride].position_mm - position[i].position_mm) / dt);
    }
    if (slopes.empty()) return 0.0;

    const double peak = *std::max_element(slopes.begin(), slopes.end());
    const double floor = std::max(2.0, 0.2 * peak);
    std::vector<double> moving;
    for (double s : slopes)
        if (s > floor) moving.push_back(s);
    if (moving.empty()) return 0.0;

    std::nth_element(moving.begin(), moving.begin() + long(moving.size() / 2), moving.end());
    double med = moving[moving.size() / 2];
    if (moving.size() % 2 == 0) {
        const auto lower = std::max_element(moving.begin(), moving.begin() + long(moving.size() / 2));
        med = 0.5 * (med + *lower);
    }
    return med;
}

}  // namespace evib
