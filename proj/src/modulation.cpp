#include "evib/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "evib/filters.hpp"
#include "evib/spectrum.hpp"

namespace evib {

Waveform am_modulate(const Waveform& message, double carrier_hz, Warnings* warnings) {
    if (message.samples.empty()) throw DataError("am_modulate: empty message");
    if (!(message.rate_hz > 0.0)) throw DataError("am_modulate: nonpositive sample rate");
    if (!std::isfinite(carrier_hz) || carrier_hz <= 0.0)
        throw DataError("am_modulate: carrier frequency must be positive and finite");
    if (carrier_hz >= message.rate_hz / 2.0)
        throw DataError("am_modulate: carrier at or above Nyquist");
    if (carrier_hz < 7000.0)
        warn(warnings, "am_modulate: carrier below 7 kHz; envelope harmonics may reach the "
                       "perceptible band");

    double lo = 0.0;
    for (double v : message.samples) {
        if (std::isnan(v)) throw DataError("am_modulate: NaN in message");
        lo = std::min(lo, v);
    }
    const double shift = std::abs(lo);

    Waveform out;
    out.rate_hz = message.rate_hz;
    out.unit = Unit::volt;
    out.samples.resize(message.size());
    const double w = 2.0 * std::numbers::pi * carrier_hz / message.rate_hz;
    for (std::size_t i = 0; i < message.size(); ++i) {
        // radicand is nonnegative by construction; clamp rounding residue
        const double r = std::max(0.0, message.samples[i] + shift);
        out.samples[i] = std::sqrt(r) * std::cos(w * static_cast<double>(i));
    }
    return out;
}

Waveform am_demodulate_square(const Waveform& modulated, double lp_cutoff_hz) {
    if (modulated.samples.empty()) throw DataError("am_demodulate_square: empty input");
    if (!(lp_cutoff_hz > 0.0) || lp_cutoff_hz >= modulated.rate_hz / 2.0)
        throw DataError("am_demodulate_square: low-pass cutoff must lie in (0, Nyquist)");

    Waveform squared;
    squared.rate_hz = modulated.rate_hz;
    squared.unit = Unit::dimensionless;
    squared.samples.resize(modulated.size());
    for (std::size_t i = 0; i < modulated.size(); ++i)
        squared.samples[i] = modulated.samples[i] * modulated.samples[i];

    SosCascade lp = butterworth_lowpass(8, lp_cutoff_hz, modulated.rate_hz);
    Waveform base = lp.apply_zero_phase(squared, modulated.unit);
    for (double& v : base.samples) v *= 2.0;

    // 2*lowpass(v^2) = message + |min(message)|; the shift equals the mean of
    // the recovered signal whenever the message is zero-mean over the record,
    // which holds exactly for bin-centered tones (integer cycles per window).
    // Trimming the window before averaging would reintroduce partial-cycle
    // bias, so use the full-record mean.
    double mean = 0.0;
    for (double v : base.samples) mean += v;
    mean /= static_cast<double>(base.size());
    for (double& v : base.samples) v -= mean;
    return base;
}

namespace {

using CalKey = std::tuple<double, double, std::size_t, double>;

struct SidebandReference {
    std::complex<double> sideband;  // upper-sideband coefficient, unit message, phase 0
    std::complex<double> carrier;   // carrier-line coefficient of the same reference
};

SidebandReference sideband_reference(double message_hz, double carrier_hz, std::size_t n,
                                     double rate_hz) {
    static std::mutex mu;
    static std::map<CalKey, SidebandReference> cache;
    const CalKey key{message_hz, carrier_hz, n, rate_hz};
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    const double duration = static_cast<double>(n) / rate_hz;
    Waveform unit_msg = make_sine(message_hz, 1.0, 0.0, duration, rate_hz, Unit::dimensionless);
    Waveform mod = am_modulate(unit_msg, carrier_hz, nullptr);
    SidebandReference ref;
    ref.sideband = fft_coefficient(mod, carrier_hz + message_hz);
    ref.carrier = fft_coefficient(mod, carrier_hz);
    if (std::abs(ref.sideband) < 1e-12)
        throw DataError("am_demodulate_sideband: degenerate calibration reference");
    cache.emplace(key, ref);
    return ref;
}

}  // namespace

SinusoidEstimate am_demodulate_sideband(const Waveform& modulated, double carrier_hz,
                                        double message_hz) {
    if (modulated.samples.empty()) throw DataError("am_demodulate_sideband: empty input");
    if (!(message_hz > 0.0) || !(carrier_hz > 0.0))
        throw DataError("am_demodulate_sideband: frequencies must be positive");
    if (carrier_hz + message_hz >= modulated.rate_hz / 2.0)
        throw DataError("am_demodulate_sideband: upper sideband at or above Nyquist");

    const SidebandReference ref =
        sideband_reference(message_hz, carrier_hz, modulated.size(), modulated.rate_hz);
    const std::complex<double> x = fft_coefficient(modulated, carrier_hz + message_hz);
    const std::complex<double> est = x / ref.sideband;

    // The sideband phase carries the carrier phase at the record start on top
    // of the message phase. The carrier line itself measures that offset, so
    // divide it out; records sliced at an arbitrary sample then demodulate to
    // the message's own phase. Skip the correction when the carrier line is
    // absent (gated or carrier-free input).
    double theta = 0.0;
    if (std::abs(ref.carrier) > 1e-12) {
        const std::complex<double> c = fft_coefficient(modulated, carrier_hz) / ref.carrier;
        if (std::abs(c) > 1e-9) theta = std::arg(c);
    }

    SinusoidEstimate out;
    out.freq_hz = message_hz;
    // sqrt envelope makes the sideband coefficient scale with the square root
    // of the message amplitude, so the calibrated ratio must be squared
    out.amplitude = std::norm(est);
    out.phase_rad = wrap_phase(std::arg(est) - theta);
    return out;
}

Waveform reconstruct_sinusoid(const SinusoidEstimate& est, std::size_t n, double rate_hz,
                              Unit unit) {
    if (n == 0 || !(rate_hz > 0.0))
        throw DataError("reconstruct_sinusoid: need positive length and rate");
    Waveform out;
    out.rate_hz = rate_hz;
    out.unit = unit;
    out.samples.resize(n);
    const double w = 2.0 * std::numbers::pi * est.freq_hz / rate_hz;
    for (std::size_t i = 0; i < n; ++i)
        out.samples[i] = est.amplitude * std::cos(w * static_cast<double>(i) + est.phase_rad);
    return out;
}

}  // namespace evib
