#pragma once

#include "evib/errors.hpp"
#include "evib/waveform.hpp"

namespace evib {

/// Square-root envelope amplitude modulation:
///   out[i] = sqrt(message[i] + |min(message)|) * cos(2*pi*carrier*i/rate).
/// The DC shift makes the radicand nonnegative for every finite message. A
/// squaring receiver recovers message + |min(message)| in the baseband, which
/// is the point: the square root pre-compensates the plant's squaring law.
/// Warns (if a collector is given) when the carrier is below 7 kHz; errors on
/// NaN samples or a carrier at/above Nyquist.
Waveform am_modulate(const Waveform& message, double carrier_hz, Warnings* warnings = nullptr);

/// Squaring demodulator: 2 * lowpass(modulated^2) with the steady-state DC
/// shift removed. The low-pass is an 8th-order Butterworth-magnitude biquad
/// cascade applied forward-backward (zero phase); `lp_cutoff_hz` must sit
/// between the message band and twice the carrier. Exact inverse of
/// am_modulate for messages with zero mean over the record, up to filter
/// transients at the ends.
Waveform am_demodulate_square(const Waveform& modulated, double lp_cutoff_hz = 3200.0);

/// Sideband demodulator for single-tone messages: reads the complex FFT
/// coefficient at carrier+message and rescales it by a calibration constant
/// computed once per (message_freq, carrier, length, rate) from a round trip
/// through am_modulate with a unit sinusoid. The calibration is complex, so
/// systematic envelope-harmonic leakage (including aliased harmonics at high
/// message frequencies) cancels for protocol-style messages.
SinusoidEstimate am_demodulate_sideband(const Waveform& modulated, double carrier_hz,
                                        double message_hz);

/// Sampled cosine from a SinusoidEstimate, n samples at rate_hz.
Waveform reconstruct_sinusoid(const SinusoidEstimate& est, std::size_t n, double rate_hz,
                              Unit unit = Unit::volt);

}  // namespace evib
