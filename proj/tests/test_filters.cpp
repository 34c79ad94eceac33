#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "evib/errors.hpp"
#include "evib/filters.hpp"
#include "evib/spectrum.hpp"
#include "evib/waveform.hpp"

using namespace evib;

namespace {

constexpr double kPi = std::numbers::pi;

// analytic Butterworth magnitude at analog frequency w (rad/s)
double butter_mag(int order, double cutoff_hz, double w) {
    const double wc = 2.0 * kPi * cutoff_hz;
    return 1.0 / std::sqrt(1.0 + std::pow(w / wc, 2.0 * order));
}

}  // namespace

TEST_CASE("discrete Butterworth matches the warped analog magnitude") {
    const double rate = 20000.0;
    for (int order : {2, 4, 8}) {
        const SosCascade lp = butterworth_lowpass(order, 2800.0, rate);
        // bilinear mapping evaluates the analog prototype at 2 fs tan(pi f/fs)
        for (double f : {100.0, 500.0, 1000.0, 2000.0, 2800.0, 5000.0, 9000.0}) {
            const double warped = 2.0 * rate * std::tan(kPi * f / rate);
            const double want = butter_mag(order, 2800.0, warped);
            const double got = std::abs(lp.response_at(f, rate));
            CHECK(got == doctest::Approx(want).epsilon(1e-9));
        }
        // DC passes exactly
        CHECK(std::abs(lp.response_at(0.0, rate)) == doctest::Approx(1.0).epsilon(1e-12));
        for (const Biquad& bq : lp.sections) CHECK(bq.stable());
    }
}

TEST_CASE("butterworth_lowpass validates its arguments") {
    CHECK_THROWS_AS(butterworth_lowpass(0, 1000.0, 20000.0), DataError);
    CHECK_THROWS_AS(butterworth_lowpass(4, 0.0, 20000.0), DataError);
    CHECK_THROWS_AS(butterworth_lowpass(4, 10000.0, 20000.0), DataError);  // at Nyquist
}

TEST_CASE("single-pass filtering settles to the predicted steady-state tone") {
    const double rate = 20000.0;
    const SosCascade lp = butterworth_lowpass(4, 1000.0, rate);
    const double f = 400.0;
    const Waveform x = make_sine(f, 1.0, 0.0, 1.0, rate);
    const Waveform y = lp.apply(x, x.unit);
    REQUIRE(y.size() == x.size());

    // compare the final 80% against the analytic steady state
    const std::complex<double> h = lp.response_at(f, rate);
    double err = 0.0;
    size_t count = 0;
    for (size_t i = x.size() / 5; i < x.size(); ++i, ++count) {
        const double want = std::abs(h) * std::cos(2.0 * kPi * f * double(i) / rate + std::arg(h));
        err += (y.samples[i] - want) * (y.samples[i] - want);
    }
    CHECK(std::sqrt(err / double(count)) < 1e-6);
}

TEST_CASE("zero-phase filtering leaves tone phase untouched and squares the magnitude") {
    const double rate = 20000.0;
    const SosCascade lp = butterworth_lowpass(8, 3000.0, rate);
    const double f = 500.0;
    const Waveform x = make_sine(f, 1.0, 0.4, 0.5, rate);
    const Waveform y = lp.apply_zero_phase(x, x.unit);
    REQUIRE(y.size() == x.size());

    // interior coefficient: |H|^2 gain, zero phase shift
    Waveform xi, yi;
    xi.rate_hz = yi.rate_hz = rate;
    xi.samples.assign(x.samples.begin() + 1000, x.samples.begin() + 9000);
    yi.samples.assign(y.samples.begin() + 1000, y.samples.begin() + 9000);
    const auto cx = fft_coefficient(xi, f);
    const auto cy = fft_coefficient(yi, f);
    const double gain = std::abs(cy / cx);
    const double dphase = std::arg(cy / cx);
    CHECK(gain == doctest::Approx(std::norm(lp.response_at(f, rate))).epsilon(1e-4));
    CHECK(std::abs(dphase) < 1e-5);
}

TEST_CASE("evaluate_tf computes rational functions by Horner's rule") {
    // H(s) = s / (s^2 + 3 s + 2); H(j1) = j/(1+3j) = (3+j)/10
    const std::vector<double> num{1.0, 0.0};
    const std::vector<double> den{1.0, 3.0, 2.0};
    const std::complex<double> got = evaluate_tf(num, den, {0.0, 1.0});
    CHECK(std::abs(got - std::complex<double>(0.3, 0.1)) < 1e-12);

    // constant over quadratic at s=0: 5/2
    CHECK(std::abs(evaluate_tf({5.0}, {1.0, 0.0, 2.0}, {0.0, 0.0}) -
                   std::complex<double>(2.5, 0.0)) < 1e-12);
    CHECK_THROWS_AS(evaluate_tf({1.0}, {}, {0.0, 0.0}), DataError);
}

TEST_CASE("factor_tf reconstructs the original rational function") {
    // real roots: den = (s+1)(s+2)(s+3) = s^3 + 6 s^2 + 11 s + 6
    const std::vector<double> num{2.0, 4.0};  // 2(s+2)
    const std::vector<double> den{1.0, 6.0, 11.0, 6.0};
    const FactoredTf ft = factor_tf(num, den);

    for (const std::complex<double> s :
         {std::complex<double>(0.0, 0.5), std::complex<double>(0.0, 4.0),
          std::complex<double>(0.0, 50.0)}) {
        std::complex<double> prod = ft.gain;
        for (const ContinuousSos& sec : ft.sections) {
            const std::complex<double> n = (sec.B2 * s + sec.B1) * s + sec.B0;
            const std::complex<double> d = (sec.A2 * s + sec.A1) * s + sec.A0;
            prod *= n / d;
        }
        const std::complex<double> want = evaluate_tf(num, den, s);
        CHECK(std::abs(prod - want) < 1e-9 * std::abs(want));
    }
}

TEST_CASE("factor_tf handles complex pole pairs") {
    // den = (s^2 + 2 s + 10)(s + 5): complex pair at -1 +- 3j plus a real pole
    const std::vector<double> den{1.0, 7.0, 20.0, 50.0};
    const FactoredTf ft = factor_tf({1.0}, den);
    const std::complex<double> s{0.0, 2.0};
    std::complex<double> prod = ft.gain;
    for (const ContinuousSos& sec : ft.sections) {
        const std::complex<double> n = (sec.B2 * s + sec.B1) * s + sec.B0;
        const std::complex<double> d = (sec.A2 * s + sec.A1) * s + sec.A0;
        prod *= n / d;
    }
    CHECK(std::abs(prod - evaluate_tf({1.0}, den, s)) < 1e-9);
    // every factored section must be second order or lower with real coefficients
    for (const ContinuousSos& sec : ft.sections) {
        CHECK(std::isfinite(sec.A0));
        CHECK(std::isfinite(sec.A1));
        CHECK(std::isfinite(sec.A2));
    }
}

TEST_CASE("bilinear discretization rejects unstable continuous sections") {
    ContinuousSos rhs;  // pole at s = +1: (s - 1) denominator
    rhs.A2 = 0.0;
    rhs.A1 = 1.0;
    rhs.A0 = -1.0;
    rhs.B0 = 1.0;
    CHECK_THROWS_AS(bilinear(rhs, 20000.0), DataError);

    ContinuousSos lhs;  // pole at s = -1
    lhs.A2 = 0.0;
    lhs.A1 = 1.0;
    lhs.A0 = 1.0;
    lhs.B0 = 1.0;
    const Biquad bq = bilinear(lhs, 20000.0);
    CHECK(bq.stable());
}

TEST_CASE("bilinear preserves DC gain") {
    ContinuousSos sec;
    sec.B0 = 3.0;
    sec.A2 = 1.0;
    sec.A1 = 2.0;
    sec.A0 = 1.5;  // DC gain 2
    const Biquad bq = bilinear(sec, 20000.0);
    // normalized coefficients cancel almost completely at z = 1, so the
    // reconstructed DC gain carries amplified rounding
    const double dc = (bq.b0 + bq.b1 + bq.b2) / (1.0 + bq.a1 + bq.a2);
    CHECK(dc == doctest::Approx(2.0).epsilon(1e-6));

    ContinuousSos first;  // first-order branch: DC gain 4
    first.B1 = 0.2;
    first.B0 = 6.0;
    first.A1 = 1.0;
    first.A0 = 1.5;
    const Biquad fb = bilinear(first, 20000.0);
    CHECK((fb.b0 + fb.b1 + fb.b2) / (1.0 + fb.a1 + fb.a2) ==
          doctest::Approx(4.0).epsilon(1e-9));
}
