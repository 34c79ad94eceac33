#pragma once

#include <complex>
#include <vector>

#include "evib/waveform.hpp"

namespace evib {

// Discrete biquad, direct form II transposed:
//   y[i] = b0*x[i] + b1*x[i-1] + b2*x[i-2] - a1*y[i-1] - a2*y[i-2]
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  bool stable() const;
};

// Continuous second-order section (B2 s^2 + B1 s + B0) / (A2 s^2 + A1 s + A0).
// First-order sections set the s^2 coefficients to zero.
struct ContinuousSos {
  double B2 = 0.0, B1 = 0.0, B0 = 1.0;
  double A2 = 0.0, A1 = 0.0, A0 = 1.0;
};

// Cascade of discrete biquads with a scalar gain.
struct SosCascade {
  std::vector<Biquad> sections;
  double gain = 1.0;

  Waveform apply(const Waveform& w, Unit out_unit) const;
  // Forward-backward (zero-phase) application with odd reflection padding.
  Waveform apply_zero_phase(const Waveform& w, Unit out_unit, std::size_t pad = 256) const;
  std::complex<double> response_at(double freq_hz, double rate_hz) const;
};

/// Bilinear transform of one continuous section at `rate_hz` (no prewarping).
/// Throws if the discretized section has a pole at or outside the unit circle.
Biquad bilinear(const ContinuousSos& cs, double rate_hz);

/// Butterworth-magnitude low-pass of even order as continuous sections.
std::vector<ContinuousSos> butterworth_lowpass_sections(int order, double cutoff_hz);

/// Discretized Butterworth low-pass cascade.
SosCascade butterworth_lowpass(int order, double cutoff_hz, double rate_hz);

/// Continuous transfer function with coefficient vectors in descending powers
/// of s, e.g. num={1,0}, den={m,b,k} for s/(m s^2 + b s + k).
std::complex<double> evaluate_tf(const std::vector<double>& num,
                                 const std::vector<double>& den,
                                 std::complex<double> s);

/// Factor a proper continuous transfer function into second-order sections
/// (companion-matrix roots, conjugate pairs grouped).
struct FactoredTf {
  std::vector<ContinuousSos> sections;
  double gain = 1.0;
};
FactoredTf factor_tf(const std::vector<double>& num, const std::vector<double>& den);

}  // namespace evib
