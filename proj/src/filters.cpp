#include "evib/filters.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace evib {
namespace {

// Roots of a real polynomial given in descending powers, via the companion
// matrix. Leading zeros are stripped first.
std::vector<std::complex<double>> poly_roots(const std::vector<double>& coeffs) {
  std::size_t first = 0;
  while (first < coeffs.size() && coeffs[first] == 0.0) ++first;
  std::vector<double> c(coeffs.begin() + long(first), coeffs.end());
  if (c.size() <= 1) return {};

  const std::size_t d = c.size() - 1;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(long(d), long(d));
  for (std::size_t i = 0; i < d; ++i) companion(0, long(i)) = -c[i + 1] / c[0];
  for (std::size_t i = 1; i < d; ++i) companion(long(i), long(i - 1)) = 1.0;

  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, /*computeEigenvectors=*/false);
  std::vector<std::complex<double>> roots(d);
  for (std::size_t i = 0; i < d; ++i) roots[i] = es.eigenvalues()(long(i));
  return roots;
}

// Group roots into real-coefficient polynomial sections of degree <= 2.
// Conjugate pairs become quadratics; real roots pair up, the odd one out
// becomes a linear section.
std::vector<ContinuousSos> sections_from_roots(const std::vector<std::complex<double>>& roots,
                                               bool numerator) {
  std::vector<std::complex<double>> complex_roots;
  std::vector<double> real_roots;
  for (const auto& r : roots) {
    if (std::abs(r.imag()) > 1e-9 * std::max(1.0, std::abs(r)))
      complex_roots.push_back(r);
    else
      real_roots.push_back(r.real());
  }

  // Keep only one of each conjugate pair (positive imaginary part).
  std::vector<std::complex<double>> upper;
  for (const auto& r : complex_roots)
    if (r.imag() > 0) upper.push_back(r);
  std::sort(upper.begin(), upper.end(),
            [](auto a, auto b) { return std::abs(a) < std::abs(b); });
  std::sort(real_roots.begin(), real_roots.end());

  std::vector<ContinuousSos> out;
  for (const auto& r : upper) {
    ContinuousSos s;
    s.B2 = s.B1 = 0.0;
    s.B0 = 1.0;
    s.A2 = 1.0;
    s.A1 = -2.0 * r.real();
    s.A0 = std::norm(r);
    out.push_back(s);
  }
  std::size_t i = 0;
  for (; i + 1 < real_roots.size(); i += 2) {
    ContinuousSos s;
    s.A2 = 1.0;
    s.A1 = -(real_roots[i] + real_roots[i + 1]);
    s.A0 = real_roots[i] * real_roots[i + 1];
    out.push_back(s);
  }
  if (i < real_roots.size()) {
    ContinuousSos s;
    s.A2 = 0.0;
    s.A1 = 1.0;
    s.A0 = -real_roots[i];
    out.push_back(s);
  }

  if (numerator)
    for (auto& s : out) {
      std::swap(s.A2, s.B2);
      std::swap(s.A1, s.B1);
      std::swap(s.A0, s.B0);
    }
  return out;
}

}  // namespace

bool Biquad::stable() const {
  // Poles of z^2 + a1 z + a2.
  const std::complex<double> disc = std::sqrt(std::complex<double>(a1 * a1 - 4.0 * a2, 0.0));
  const std::complex<double> p1 = (-a1 + disc) / 2.0;
  const std::complex<double> p2 = (-a1 - disc) / 2.0;
  return std::abs(p1) < 1.0 && std::abs(p2) < 1.0;
}

Biquad bilinear(const ContinuousSos& cs, double rate_hz) {
  if (!(rate_hz > 0)) throw DataError("bilinear: rate must be positive");
  const double K = 2.0 * rate_hz;
  const double K2 = K * K;

  if (cs.A2 == 0.0 && cs.B2 == 0.0) {
    // true first-order section; the quadratic path would add a spurious
    // pole/zero pair pinned to z = -1 that the stability check rejects
    const double d0 = cs.A1 * K + cs.A0;
    if (d0 == 0.0) throw DataError("bilinear: degenerate denominator");
    Biquad b;
    b.b0 = (cs.B1 * K + cs.B0) / d0;
    b.b1 = (cs.B0 - cs.B1 * K) / d0;
    b.a1 = (cs.A0 - cs.A1 * K) / d0;
    if (!b.stable()) throw DataError("bilinear: discretized pole on or outside the unit circle");
    return b;
  }

  const double nb0 = cs.B2 * K2 + cs.B1 * K + cs.B0;
  const double nb1 = -2.0 * cs.B2 * K2 + 2.0 * cs.B0;
  const double nb2 = cs.B2 * K2 - cs.B1 * K + cs.B0;
  const double na0 = cs.A2 * K2 + cs.A1 * K + cs.A0;
  const double na1 = -2.0 * cs.A2 * K2 + 2.0 * cs.A0;
  const double na2 = cs.A2 * K2 - cs.A1 * K + cs.A0;
  if (na0 == 0.0) throw DataError("bilinear: degenerate denominator");

  Biquad b;
  b.b0 = nb0 / na0;
  b.b1 = nb1 / na0;
  b.b2 = nb2 / na0;
  b.a1 = na1 / na0;
  b.a2 = na2 / na0;
  if (!b.stable()) throw DataError("bilinear: discretized pole on or outside the unit circle");
  return b;
}

Waveform SosCascade::apply(const Waveform& w, Unit out_unit) const {
  Waveform out = w;
  out.unit = out_unit;
  for (const auto& s : sections) {
    double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
    for (double& x : out.samples) {
      const double x0 = x;
      const double y0 = s.b0 * x0 + s.b1 * x1 + s.b2 * x2 - s.a1 * y1 - s.a2 * y2;
      x2 = x1;
      x1 = x0;
      y2 = y1;
      y1 = y0;
      x = y0;
    }
  }
  if (gain != 1.0)
    for (double& x : out.samples) x *= gain;
  return out;
}

Waveform SosCascade::apply_zero_phase(const Waveform& w, Unit out_unit, std::size_t pad) const {
  const std::size_t n = w.size();
  if (n == 0) return w;
  pad = std::min(pad, n - 1);

  // Odd reflection about the end samples reduces edge transients.
  Waveform ext;
  ext.rate_hz = w.rate_hz;
  ext.unit = w.unit;
  ext.samples.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i)
    ext.samples.push_back(2.0 * w.samples[0] - w.samples[i]);
  ext.samples.insert(ext.samples.end(), w.samples.begin(), w.samples.end());
  for (std::size_t i = 1; i <= pad; ++i)
    ext.samples.push_back(2.0 * w.samples[n - 1] - w.samples[n - 1 - i]);

  Waveform fwd = apply(ext, out_unit);
  std::reverse(fwd.samples.begin(), fwd.samples.end());
  Waveform bwd = apply(fwd, out_unit);
  std::reverse(bwd.samples.begin(), bwd.samples.end());

  Waveform out;
  out.rate_hz = w.rate_hz;
  out.unit = out_unit;
  out.samples.assign(bwd.samples.begin() + long(pad), bwd.samples.begin() + long(pad + n));
  return out;
}

std::complex<double> SosCascade::response_at(double freq_hz, double rate_hz) const {
  const std::complex<double> z =
      std::polar(1.0, 2.0 * std::numbers::pi * freq_hz / rate_hz);
  const std::complex<double> zi = 1.0 / z;
  std::complex<double> h = gain;
  for (const auto& s : sections)
    h *= (s.b0 + s.b1 * zi + s.b2 * zi * zi) / (1.0 + s.a1 * zi + s.a2 * zi * zi);
  return h;
}

std::vector<ContinuousSos> butterworth_lowpass_sections(int order, double cutoff_hz) {
  if (order < 2 || order % 2 != 0)
    throw DataError("butterworth_lowpass: order must be even and >= 2");
  if (!(cutoff_hz > 0)) throw DataError("butterworth_lowpass: cutoff must be positive");

  const double wc = 2.0 * std::numbers::pi * cutoff_hz;
  std::vector<ContinuousSos> out;
  for (int k = 1; k <= order / 2; ++k) {
    const double zeta = std::sin(double(2 * k - 1) * std::numbers::pi / double(2 * order));
    ContinuousSos s;
    s.B0 = wc * wc;
    s.A2 = 1.0;
    s.A1 = 2.0 * zeta * wc;
    s.A0 = wc * wc;
    out.push_back(s);
  }
  return out;
}

SosCascade butterworth_lowpass(int order, double cutoff_hz, double rate_hz) {
  if (cutoff_hz >= rate_hz / 2.0)
    throw DataError("butterworth_lowpass: cutoff at or above Nyquist");
  SosCascade c;
  for (const auto& s : butterworth_lowpass_sections(order, cutoff_hz))
    c.sections.push_back(bilinear(s, rate_hz));
  return c;
}

std::complex<double> evaluate_tf(const std::vector<double>& num,
                                 const std::vector<double>& den,
                                 std::complex<double> s) {
  auto horner = [&](const std::vector<double>& c) {
    std::complex<double> acc = 0.0;
    for (double v : c) acc = acc * s + v;
    return acc;
  };
  if (den.empty()) throw DataError("evaluate_tf: empty denominator");
  return horner(num) / horner(den);
}

FactoredTf factor_tf(const std::vector<double>& num, const std::vector<double>& den) {
  auto strip = [](const std::vector<double>& c) {
    std::size_t first = 0;
    while (first + 1 < c.size() && c[first] == 0.0) ++first;
    return std::vector<double>(c.begin() + long(first), c.end());
  };
  const std::vector<double> n = strip(num);
  const std::vector<double> d = strip(den);
  if (d.empty() || d[0] == 0.0) throw DataError("factor_tf: zero denominator");
  if (n.empty()) throw DataError("factor_tf: empty numerator");
  if (n.size() > d.size()) throw DataError("factor_tf: improper transfer function");

  FactoredTf f;
  f.gain = n[0] / d[0];
  std::vector<ContinuousSos> num_secs = sections_from_roots(poly_roots(n), true);
  std::vector<ContinuousSos> den_secs = sections_from_roots(poly_roots(d), false);

  // Merge numerator sections into denominator sections one-for-one; leftover
  // denominator sections keep a constant numerator.
  for (std::size_t i = 0; i < den_secs.size(); ++i) {
    ContinuousSos s = den_secs[i];
    if (i < num_secs.size()) {
      s.B2 = num_secs[i].B2;
      s.B1 = num_secs[i].B1;
      s.B0 = num_secs[i].B0;
      // A first-order zero in a second-order section: shift coefficients so
      // the polynomial is (B1 s + B0), already representable.
    }
    f.sections.push_back(s);
  }
  if (num_secs.size() > den_secs.size())
    throw DataError("factor_tf: numerator order exceeds denominator order");
  if (f.sections.empty()) {
    ContinuousSos s;  // pure gain
    s.B0 = 1.0;
    s.A0 = 1.0;
    f.sections.push_back(s);
  }
  return f;
}

}  // namespace evib
