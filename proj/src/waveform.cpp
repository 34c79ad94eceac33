#include "evib/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace evib {

std::string unit_to_string(Unit u) {
  switch (u) {
    case Unit::dimensionless: return "-";
    case Unit::volt: return "V";
    case Unit::newton: return "N";
    case Unit::meter_per_second: return "m/s";
    case Unit::meter_per_second_sq: return "m/s2";
    case Unit::millimeter: return "mm";
  }
  throw DataError("unit_to_string: bad enum value");
}

Unit unit_from_string(const std::string& s) {
  if (s == "-" || s == "1" || s.empty()) return Unit::dimensionless;
  if (s == "V") return Unit::volt;
  if (s == "N") return Unit::newton;
  if (s == "m/s") return Unit::meter_per_second;
  if (s == "m/s2" || s == "m/s^2") return Unit::meter_per_second_sq;
  if (s == "mm") return Unit::millimeter;
  throw DataError("unknown unit string: '" + s + "'");
}

double mean(const Waveform& w) {
  if (w.samples.empty()) return 0.0;
  double acc = 0.0;
  for (double x : w.samples) acc += x;
  return acc / double(w.samples.size());
}

double rms(const Waveform& w) {
  if (w.samples.empty()) return 0.0;
  double acc = 0.0;
  for (double x : w.samples) acc += x * x;
  return std::sqrt(acc / double(w.samples.size()));
}

double min_sample(const Waveform& w) {
  return *std::min_element(w.samples.begin(), w.samples.end());
}

double max_sample(const Waveform& w) {
  return *std::max_element(w.samples.begin(), w.samples.end());
}

double wrap_phase(double rad) {
  const double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(rad, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  if (r > std::numbers::pi) r -= two_pi;
  return r;
}

Waveform make_sine(double freq_hz, double amplitude, double phase_rad,
                   double duration_s, double rate_hz, Unit unit) {
  if (!(rate_hz > 0.0)) throw DataError("make_sine: rate must be positive");
  if (!(duration_s > 0.0)) throw DataError("make_sine: duration must be positive");
  if (!std::isfinite(freq_hz) || !std::isfinite(amplitude) || !std::isfinite(phase_rad))
    throw DataError("make_sine: non-finite argument");
  if (freq_hz < 0.0) throw DataError("make_sine: negative frequency");
  if (freq_hz >= rate_hz / 2.0) throw DataError("make_sine: frequency at or above Nyquist");

  const double count = duration_s * rate_hz;
  const auto n = static_cast<std::size_t>(std::llround(count));
  if (std::abs(count - double(n)) > 1e-6 * std::max(1.0, count))
    throw DataError("make_sine: duration*rate is not an integer sample count");

  Waveform w;
  w.rate_hz = rate_hz;
  w.unit = unit;
  w.samples.resize(n);
  const double step = 2.0 * std::numbers::pi * freq_hz / rate_hz;
  for (std::size_t i = 0; i < n; ++i)
    w.samples[i] = amplitude * std::cos(step * double(i) + phase_rad);
  return w;
}

std::vector<double> log_spaced_frequencies(double f_min_hz, double f_max_hz, int n) {
  if (n < 2) throw DataError("log_spaced_frequencies: need at least 2 points");
  if (!(f_min_hz > 0.0) || !(f_max_hz > f_min_hz))
    throw DataError("log_spaced_frequencies: need 0 < f_min < f_max");

  const double bin_hz = 5.0;  // 20 kHz / 4000-sample analysis window
  std::vector<double> out(n);
  const double ratio = std::log(f_max_hz / f_min_hz) / double(n - 1);
  for (int i = 0; i < n; ++i) {
    const double raw = f_min_hz * std::exp(ratio * double(i));
    out[i] = bin_hz * std::round(raw / bin_hz);
  }
  return out;
}

}  // namespace evib
