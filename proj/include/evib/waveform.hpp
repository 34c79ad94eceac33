#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "evib/errors.hpp"

namespace evib {

enum class Unit {
  dimensionless,
  volt,
  newton,
  meter_per_second,
  meter_per_second_sq,
  millimeter,
};

std::string unit_to_string(Unit u);
Unit unit_from_string(const std::string& s);

// Uniformly sampled real-valued signal with a sample rate and a unit tag.
struct Waveform {
  std::vector<double> samples;
  double rate_hz = 0.0;
  Unit unit = Unit::dimensionless;

  std::size_t size() const { return samples.size(); }
  double duration_s() const { return rate_hz > 0 ? double(samples.size()) / rate_hz : 0.0; }
  double operator[](std::size_t i) const { return samples[i]; }
  double& operator[](std::size_t i) { return samples[i]; }
};

double mean(const Waveform& w);
double rms(const Waveform& w);
double min_sample(const Waveform& w);
double max_sample(const Waveform& w);

// Single-tone measurement result. phase_rad is normalized to (-pi, pi].
struct SinusoidEstimate {
  double freq_hz = 0.0;
  double amplitude = 0.0;
  double phase_rad = 0.0;
};

double wrap_phase(double rad);

/// amplitude * cos(2*pi*freq*t + phase) sampled at `rate_hz` for `duration_s`.
/// duration_s * rate_hz must land on an integer sample count; freq must be
/// below the Nyquist rate.
Waveform make_sine(double freq_hz, double amplitude, double phase_rad,
                   double duration_s, double rate_hz, Unit unit = Unit::volt);

/// n geometrically spaced frequencies over [f_min, f_max], each rounded to the
/// nearest 5 Hz bin (the bin width of a 4000-sample window at 20 kHz).
std::vector<double> log_spaced_frequencies(double f_min_hz, double f_max_hz, int n);

}  // namespace evib
