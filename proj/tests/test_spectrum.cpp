#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "evib/errors.hpp"
#include "evib/spectrum.hpp"
#include "evib/waveform.hpp"

using namespace evib;

namespace {

constexpr double kPi = std::numbers::pi;

// direct O(n^2) DFT of one bin, the oracle the FFT path must match
std::complex<double> dft_bin(const Waveform& w, size_t k) {
    std::complex<double> acc = 0.0;
    const double step = -2.0 * kPi * double(k) / double(w.size());
    for (size_t i = 0; i < w.size(); ++i)
        acc += w.samples[i] * std::exp(std::complex<double>(0.0, step * double(i)));
    return acc;
}

Waveform random_waveform(size_t n, double rate, unsigned seed) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Waveform w;
    w.rate_hz = rate;
    w.samples.resize(n);
    for (double& x : w.samples) x = dist(gen);
    return w;
}

}  // namespace

TEST_CASE("spectrum matches a direct DFT oracle bin by bin") {
    for (size_t n : {64ul, 100ul, 257ul}) {
        const Waveform w = random_waveform(n, 1000.0, unsigned(12345 + n));
        const Spectrum s = spectrum(w);
        REQUIRE(s.size() == n / 2 + 1);
        CHECK(s.signal_length == n);
        CHECK(s.bin_hz() == doctest::Approx(1000.0 / double(n)));
        for (size_t k = 0; k < s.size(); k += 3) {
            const std::complex<double> want = dft_bin(w, k);
            CHECK(std::abs(s.bins[k] - want) < 1e-9 * double(n));
        }
        // DC and Nyquist are purely real
        CHECK(s.bins[0].imag() == doctest::Approx(0.0).epsilon(1e-12));
        if (n % 2 == 0) CHECK(s.bins[n / 2].imag() == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("fft_coefficient normalizes a unit cosine to 1+0j") {
    const Waveform c = make_sine(50.0, 1.0, 0.0, 0.2, 20000.0);
    const std::complex<double> got = fft_coefficient(c, 50.0);
    CHECK(std::abs(got - std::complex<double>(1.0, 0.0)) < 1e-12);

    // quadrature: sin = cos shifted by -pi/2
    const Waveform s = make_sine(50.0, 1.0, -kPi / 2.0, 0.2, 20000.0);
    const std::complex<double> got_sin = fft_coefficient(s, 50.0);
    CHECK(std::abs(got_sin - std::complex<double>(0.0, -1.0)) < 1e-12);
}

TEST_CASE("fft_coefficient is linear and reads only its own bin") {
    Waveform a = make_sine(50.0, 1.0, 0.0, 0.2, 20000.0);
    const Waveform b = make_sine(75.0, 1.0, 0.0, 0.2, 20000.0);
    Waveform sum = a;
    for (size_t i = 0; i < sum.size(); ++i) sum.samples[i] += b.samples[i];

    CHECK(std::abs(fft_coefficient(sum, 75.0) - std::complex<double>(1.0, 0.0)) < 1e-12);
    CHECK(std::abs(fft_coefficient(sum, 50.0) - std::complex<double>(1.0, 0.0)) < 1e-12);

    // coeff(2a + 3b) = 2 coeff(a) + 3 coeff(b) at machine precision
    Waveform mix = a;
    for (size_t i = 0; i < mix.size(); ++i)
        mix.samples[i] = 2.0 * a.samples[i] + 3.0 * b.samples[i];
    const auto ca = fft_coefficient(a, 50.0);
    const auto cb = fft_coefficient(b, 50.0);
    CHECK(std::abs(fft_coefficient(mix, 50.0) - (2.0 * ca + 3.0 * cb)) < 1e-12);
}

TEST_CASE("fft_coefficient rejects off-bin queries") {
    const Waveform w = make_sine(50.0, 1.0, 0.0, 0.2, 20000.0);
    CHECK_THROWS_AS(fft_coefficient(w, 50.3), DataError);
    CHECK_NOTHROW(fft_coefficient(w, 55.0));
}

TEST_CASE("Parseval's identity ties samples to spectrum energy") {
    const Waveform w = random_waveform(512, 2000.0, 777);
    const Spectrum s = spectrum(w);
    double time_energy = 0.0;
    for (double x : w.samples) time_energy += x * x;
    double freq_energy = std::norm(s.bins[0]);
    for (size_t k = 1; k + 1 < s.size(); ++k) freq_energy += 2.0 * std::norm(s.bins[k]);
    freq_energy += std::norm(s.bins[s.size() - 1]);  // even length: Nyquist unpaired
    freq_energy /= double(w.size());
    CHECK(freq_energy == doctest::Approx(time_energy).epsilon(1e-10));
}

TEST_CASE("irfft inverts spectrum to machine precision") {
    const Waveform w = random_waveform(300, 20000.0, 4242);
    const Waveform back = irfft(spectrum(w), w.unit);
    REQUIRE(back.size() == w.size());
    CHECK(back.rate_hz == w.rate_hz);
    double worst = 0.0;
    for (size_t i = 0; i < w.size(); ++i)
        worst = std::max(worst, std::abs(back.samples[i] - w.samples[i]));
    CHECK(worst < 1e-12);
}

TEST_CASE("integrate_to_velocity matches the analytic antiderivative") {
    // d/dt [sin(wt)/w] = cos(wt)
    const double f = 100.0;
    const Waveform a = make_sine(f, 1.0, 0.0, 1.0, 20000.0, Unit::meter_per_second_sq);
    const Waveform v = integrate_to_velocity(a);
    CHECK(v.unit == Unit::meter_per_second);
    double err = 0.0, ref = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
        const double want = std::sin(2.0 * kPi * f * double(i) / 20000.0) / (2.0 * kPi * f);
        err += (v.samples[i] - want) * (v.samples[i] - want);
        ref += want * want;
    }
    CHECK(std::sqrt(err / ref) < 0.005);
}

TEST_CASE("integrate_to_velocity superposes and kills DC") {
    Waveform a = make_sine(30.0, 1.0, 0.0, 1.0, 20000.0, Unit::meter_per_second_sq);
    const Waveform b = make_sine(300.0, 1.0, 0.0, 1.0, 20000.0, Unit::meter_per_second_sq);
    for (size_t i = 0; i < a.size(); ++i) a.samples[i] += b.samples[i] + 5.0;  // +5 drift source
    const Waveform v = integrate_to_velocity(a);
    CHECK(std::abs(mean(v)) < 1e-9);
    double err = 0.0, ref = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
        const double t = double(i) / 20000.0;
        const double want = std::sin(2.0 * kPi * 30.0 * t) / (2.0 * kPi * 30.0) +
                            std::sin(2.0 * kPi * 300.0 * t) / (2.0 * kPi * 300.0);
        err += (v.samples[i] - want) * (v.samples[i] - want);
        ref += want * want;
    }
    CHECK(std::sqrt(err / ref) < 0.01);

    Waveform z;
    z.rate_hz = 20000.0;
    z.samples.assign(100, 0.0);
    z.unit = Unit::meter_per_second_sq;
    const Waveform vz = integrate_to_velocity(z);
    for (double x : vz.samples) CHECK(x == 0.0);
}

TEST_CASE("apply_frequency_response scales each line by the sampled response") {
    Waveform w = make_sine(100.0, 1.0, 0.0, 0.2, 20000.0);
    const Waveform b = make_sine(400.0, 0.5, 0.3, 0.2, 20000.0);
    for (size_t i = 0; i < w.size(); ++i) w.samples[i] += b.samples[i];

    const Waveform out = apply_frequency_response(
        w, [](double f) { return std::complex<double>(0.0, f / 100.0); }, Unit::newton);
    CHECK(out.unit == Unit::newton);

    // 100 Hz line: gain j (=+90 deg); 400 Hz line: gain 4j
    const auto c100 = fft_coefficient(out, 100.0);
    const auto c400 = fft_coefficient(out, 400.0);
    CHECK(std::abs(c100 - std::complex<double>(0.0, 1.0)) < 1e-10);
    const std::complex<double> want400 =
        std::complex<double>(0.0, 4.0) * 0.5 * std::exp(std::complex<double>(0.0, 0.3));
    CHECK(std::abs(c400 - want400) < 1e-10);
}
