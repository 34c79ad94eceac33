#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "evib/waveform.hpp"

namespace evib {

// One-sided spectrum of a real signal of length n: bins 0..n/2, spacing
// rate_hz / n. Coefficients are raw DFT sums (no normalization); DC and
// Nyquist are purely real.
struct Spectrum {
  std::vector<std::complex<double>> bins;
  double rate_hz = 0.0;
  std::size_t signal_length = 0;

  double bin_hz() const { return rate_hz / double(signal_length); }
  double freq_of(std::size_t k) const { return double(k) * bin_hz(); }
  std::size_t size() const { return bins.size(); }
};

/// Forward real FFT (FFTW-backed).
Spectrum spectrum(const Waveform& w);

/// Inverse of spectrum(): reconstructs the length-n real signal, including the
/// 1/n normalization.
Waveform irfft(const Spectrum& s, Unit unit = Unit::dimensionless);

/// Complex amplitude of the bin at freq_hz, normalized so a unit-amplitude
/// bin-centered cosine returns 1+0j (DC and Nyquist return the plain mean
/// scale). Direct DFT summation, independent of the FFT backend. Errors if
/// freq_hz is not bin-centered within 1e-6 relative.
std::complex<double> fft_coefficient(const Waveform& w, double freq_hz);

/// Frequency-domain time integration: divide by j*omega, zero the DC bin.
/// Input in m/s^2, output in m/s; drift-free by construction.
Waveform integrate_to_velocity(const Waveform& accel);

/// Frequency-domain LTI application: multiplies each bin by h(f). Exact for
/// periodic (bin-centered) content. Shared plumbing for plant and render code.
Waveform apply_frequency_response(
    const Waveform& w,
    const std::function<std::complex<double>(double)>& h, Unit out_unit);

}  // namespace evib
