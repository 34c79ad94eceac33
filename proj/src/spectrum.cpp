#include "evib/spectrum.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace evib {
namespace {

// FFTW plan creation is not thread safe; execution on distinct buffers is.
// Plans are cached per length and created with FFTW_UNALIGNED so they can be
// executed on ordinary std::vector storage via the new-array interface.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache c;
    return c;
  }

  fftw_plan forward(std::size_t n) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = fwd_.find(n);
    if (it != fwd_.end()) return it->second;
    std::vector<double> in(n);
    std::vector<fftw_complex> out(n / 2 + 1);
    fftw_plan p = fftw_plan_dft_r2c_1d(int(n), in.data(), out.data(),
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
    fwd_[n] = p;
    return p;
  }

  fftw_plan backward(std::size_t n) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = bwd_.find(n);
    if (it != bwd_.end()) return it->second;
    std::vector<fftw_complex> in(n / 2 + 1);
    std::vector<double> out(n);
    fftw_plan p = fftw_plan_dft_c2r_1d(int(n), in.data(), out.data(),
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_[n] = p;
    return p;
  }

 private:
  std::mutex mu_;
  std::map<std::size_t, fftw_plan> fwd_;
  std::map<std::size_t, fftw_plan> bwd_;
};

}  // namespace

Spectrum spectrum(const Waveform& w) {
  const std::size_t n = w.size();
  if (n == 0) throw DataError("spectrum: empty waveform");
  if (!(w.rate_hz > 0)) throw DataError("spectrum: rate must be positive");

  Spectrum s;
  s.rate_hz = w.rate_hz;
  s.signal_length = n;
  s.bins.resize(n / 2 + 1);

  std::vector<double> in(w.samples);
  fftw_plan p = PlanCache::instance().forward(n);
  fftw_execute_dft_r2c(p, in.data(), reinterpret_cast<fftw_complex*>(s.bins.data()));
  return s;
}

Waveform irfft(const Spectrum& s, Unit unit) {
  const std::size_t n = s.signal_length;
  if (n == 0 || s.bins.size() != n / 2 + 1) throw DataError("irfft: inconsistent spectrum");

  Waveform w;
  w.rate_hz = s.rate_hz;
  w.unit = unit;
  w.samples.resize(n);

  // c2r destroys its input, so work on a copy.
  std::vector<std::complex<double>> in(s.bins);
  fftw_plan p = PlanCache::instance().backward(n);
  fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(in.data()), w.samples.data());
  const double inv_n = 1.0 / double(n);
  for (double& x : w.samples) x *= inv_n;
  return w;
}

std::complex<double> fft_coefficient(const Waveform& w, double freq_hz) {
  const std::size_t n = w.size();
  if (n == 0) throw DataError("fft_coefficient: empty waveform");
  if (!(w.rate_hz > 0)) throw DataError("fft_coefficient: rate must be positive");
  if (freq_hz < 0 || freq_hz > w.rate_hz / 2.0)
    throw DataError("fft_coefficient: frequency outside [0, Nyquist]");

  const double k_exact = freq_hz * double(n) / w.rate_hz;
  const auto k = static_cast<std::size_t>(std::llround(k_exact));
  if (std::abs(k_exact - double(k)) > 1e-6 * std::max(1.0, k_exact))
    throw DataError("fft_coefficient: frequency is not bin-centered");

  // Direct summation with exact integer phase arithmetic: angle for sample i
  // is -2*pi*((k*i) mod n)/n, which avoids large-argument trig loss and keeps
  // this path independent of the FFT backend.
  double re = 0.0, im = 0.0;
  const double two_pi_over_n = 2.0 * std::numbers::pi / double(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ang = two_pi_over_n * double((k * i) % n);
    re += w.samples[i] * std::cos(ang);
    im -= w.samples[i] * std::sin(ang);
  }

  const bool is_dc = (k == 0);
  const bool is_nyquist = (n % 2 == 0) && (k == n / 2);
  const double scale = (is_dc || is_nyquist) ? 1.0 / double(n) : 2.0 / double(n);
  return {re * scale, im * scale};
}

Waveform integrate_to_velocity(const Waveform& accel) {
  Spectrum s = spectrum(accel);
  s.bins[0] = 0.0;
  for (std::size_t k = 1; k < s.bins.size(); ++k) {
    const double omega = 2.0 * std::numbers::pi * s.freq_of(k);
    s.bins[k] /= std::complex<double>(0.0, omega);
  }
  return irfft(s, Unit::meter_per_second);
}

Waveform apply_frequency_response(
    const Waveform& w,
    const std::function<std::complex<double>(double)>& h, Unit out_unit) {
  Spectrum s = spectrum(w);
  for (std::size_t k = 0; k < s.bins.size(); ++k) {
    const std::complex<double> hk = h(s.freq_of(k));
    // Real output requires real DC/Nyquist response; drop any imaginary part
    // there (h should already be real at those bins for physical systems).
    if (k == 0 || (s.signal_length % 2 == 0 && k == s.signal_length / 2))
      s.bins[k] *= hk.real();
    else
      s.bins[k] *= hk;
  }
  return irfft(s, out_unit);
}

}  // namespace evib
