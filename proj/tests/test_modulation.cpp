#include "doctest.h"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "evib/errors.hpp"
#include "evib/modulation.hpp"
#include "evib/plant.hpp"
#include "evib/spectrum.hpp"
#include "evib/waveform.hpp"

using namespace evib;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr size_t kEdge = 64;  // ~2 settling lengths of the demod low-pass

// RMS error over the interior, relative to the message RMS
double interior_rms_error(const Waveform& got, const Waveform& want) {
    double err = 0.0, ref = 0.0;
    for (size_t i = kEdge; i + kEdge < want.size(); ++i) {
        err += (got.samples[i] - want.samples[i]) * (got.samples[i] - want.samples[i]);
        ref += want.samples[i] * want.samples[i];
    }
    return std::sqrt(err / ref);
}

}  // namespace

TEST_CASE("am_modulate applies the shifted square-root envelope sample by sample") {
    const Waveform msg = make_sine(30.0, 1.0, 0.0, 0.2, 20000.0, Unit::dimensionless);
    const Waveform mod = am_modulate(msg, 7000.0);
    REQUIRE(mod.size() == msg.size());
    CHECK(mod.unit == Unit::volt);
    CHECK(mod[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    const double shift = std::abs(min_sample(msg));
    for (size_t i : {3ul, 431ul, 1999ul, 3998ul}) {
        const double want = std::sqrt(msg.samples[i] + shift) *
                            std::cos(2.0 * kPi * 7000.0 * double(i) / 20000.0);
        CHECK(mod[i] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("am_modulate keeps the radicand nonnegative for any finite message") {
    Waveform msg;
    msg.rate_hz = 20000.0;
    msg.samples = {-5.0, 2.0, -7.25, 0.0, 3.5};
    const Waveform mod = am_modulate(msg, 7000.0);
    for (double x : mod.samples) CHECK(std::isfinite(x));

    Waveform zeros;
    zeros.rate_hz = 20000.0;
    zeros.samples.assign(100, 0.0);
    const Waveform silent = am_modulate(zeros, 7000.0);
    for (double x : silent.samples) CHECK(x == 0.0);
}

TEST_CASE("am_modulate rejects bad input and warns below 7 kHz carriers") {
    Waveform msg = make_sine(30.0, 1.0, 0.0, 0.2, 20000.0);
    CHECK_THROWS_AS(am_modulate(msg, 10000.0), DataError);
    CHECK_THROWS_AS(am_modulate(msg, -100.0), DataError);

    Waveform bad = msg;
    bad.samples[7] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(am_modulate(bad, 7000.0), DataError);

    Warnings w;
    am_modulate(msg, 5000.0, &w);
    CHECK(!w.empty());
    Warnings w2;
    am_modulate(msg, 7000.0, &w2);
    CHECK(w2.empty());
}

TEST_CASE("squared envelope has modulation index one for a pure sinusoid") {
    // 50 Hz at 20 kHz hits cos = -1 exactly, so the envelope bottoms at zero
    const Waveform msg = make_sine(50.0, 1.7, 0.0, 0.2, 20000.0, Unit::dimensionless);
    const double shift = std::abs(min_sample(msg));
    double e2_min = 1e300, e2_max = -1e300;
    for (double x : msg.samples) {
        e2_min = std::min(e2_min, x + shift);
        e2_max = std::max(e2_max, x + shift);
    }
    CHECK(e2_min == doctest::Approx(0.0));
    CHECK((e2_max - e2_min) / (e2_max + e2_min) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("squaring demodulator inverts the modulator at every protocol frequency") {
    for (double f : protocol_frequencies()) {
        const Waveform msg = make_sine(f, 2.0, 0.0, 0.2, 20000.0, Unit::dimensionless);
        const Waveform rec = am_demodulate_square(am_modulate(msg, 7000.0));
        REQUIRE(rec.size() == msg.size());
        CHECK_MESSAGE(interior_rms_error(rec, msg) < 0.01, "f = ", f);
    }
    // half-amplitude example at 100 Hz
    const Waveform msg = make_sine(100.0, 0.5, 0.0, 0.2, 20000.0, Unit::dimensionless);
    const Waveform rec = am_demodulate_square(am_modulate(msg, 7000.0));
    CHECK(interior_rms_error(rec, msg) < 0.01);
}

TEST_CASE("squaring demodulator recovers a zero-mean multi-tone message") {
    Waveform msg = make_sine(55.0, 1.0, 0.0, 0.2, 20000.0, Unit::dimensionless);
    const Waveform b = make_sine(330.0, 0.6, 0.0, 0.2, 20000.0);
    const Waveform c = make_sine(600.0, 0.3, 0.0, 0.2, 20000.0);
    for (size_t i = 0; i < msg.size(); ++i) msg.samples[i] += b.samples[i] + c.samples[i];
    const Waveform rec = am_demodulate_square(am_modulate(msg, 7000.0));
    CHECK(interior_rms_error(rec, msg) < 0.01);
}

TEST_CASE("squaring demodulator returns near-zero for a bare carrier") {
    const Waveform carrier = make_sine(7000.0, 1.0, 0.0, 0.2, 20000.0);
    const Waveform rec = am_demodulate_square(carrier, 1000.0);
    // the 1 kHz cutoff stretches the end transients, so skip a wider margin
    const size_t margin = 256;
    for (size_t i = margin; i + margin < rec.size(); ++i)
        CHECK(std::abs(rec.samples[i]) < 1e-3);
}

TEST_CASE("squaring demodulator validates the cutoff") {
    const Waveform mod = am_modulate(make_sine(100.0, 1.0, 0.0, 0.2, 20000.0), 7000.0);
    CHECK_THROWS_AS(am_demodulate_square(mod, 0.0), DataError);
    CHECK_THROWS_AS(am_demodulate_square(mod, 10000.0), DataError);
}

TEST_CASE("sideband demodulator is exact on sliced windows") {
    // windows cut from a longer record at arbitrary sample offsets are the
    // production case: the estimate must return the window-local phase
    for (double f : {30.0, 445.0, 1000.0, 2000.0}) {
        const Waveform msg = make_sine(f, 2.0, 0.0, 0.5, 20000.0, Unit::dimensionless);
        const Waveform mod = am_modulate(msg, 7000.0);
        for (size_t off : {0ul, 617ul, 1234ul, 4000ul}) {
            Waveform win;
            win.rate_hz = mod.rate_hz;
            win.unit = mod.unit;
            win.samples.assign(mod.samples.begin() + long(off),
                               mod.samples.begin() + long(off + 4000));
            const SinusoidEstimate est = am_demodulate_sideband(win, 7000.0, f);
            CHECK(est.freq_hz == f);
            CHECK(est.amplitude == doctest::Approx(2.0).epsilon(1e-9));
            const double want_phase = wrap_phase(2.0 * kPi * f * double(off) / 20000.0);
            CHECK(std::abs(wrap_phase(est.phase_rad - want_phase)) < 1e-9);
        }
    }
}

TEST_CASE("sideband demodulator round-trips a unit sinusoid") {
    const Waveform msg = make_sine(30.0, 1.0, 0.0, 0.2, 20000.0, Unit::dimensionless);
    const SinusoidEstimate est = am_demodulate_sideband(am_modulate(msg, 7000.0), 7000.0, 30.0);
    CHECK(est.amplitude == doctest::Approx(1.0).epsilon(0.02));
    CHECK(std::abs(est.phase_rad) < 0.05);
}

TEST_CASE("sideband estimate vanishes for silence") {
    Waveform zeros;
    zeros.rate_hz = 20000.0;
    zeros.samples.assign(4000, 0.0);
    const SinusoidEstimate est = am_demodulate_sideband(zeros, 7000.0, 100.0);
    CHECK(est.amplitude == doctest::Approx(0.0));
}

TEST_CASE("sideband demodulator rejects out-of-range or off-bin frequencies") {
    const Waveform mod = am_modulate(make_sine(100.0, 1.0, 0.0, 0.2, 20000.0), 7000.0);
    CHECK_THROWS_AS(am_demodulate_sideband(mod, 7000.0, 3000.0), DataError);  // 10 kHz = Nyquist
    CHECK_THROWS_AS(am_demodulate_sideband(mod, 7000.0, 102.3), DataError);   // off-bin
    CHECK_THROWS_AS(am_demodulate_sideband(mod, 7000.0, -5.0), DataError);
}

TEST_CASE("the two demodulators agree on tone amplitude across the tactile band") {
    for (double f : protocol_frequencies()) {
        if (f > 1000.0) continue;
        const Waveform msg = make_sine(f, 1.4, 0.0, 0.2, 20000.0, Unit::dimensionless);
        const Waveform mod = am_modulate(msg, 7000.0);
        const SinusoidEstimate sb = am_demodulate_sideband(mod, 7000.0, f);
        const Waveform sq = am_demodulate_square(mod);
        const double amp_sq = std::abs(fft_coefficient(sq, f));
        CHECK_MESSAGE(std::abs(sb.amplitude / amp_sq - 1.0) < 0.03, "f = ", f);
    }
}

TEST_CASE("reconstruct_sinusoid agrees with direct synthesis") {
    SinusoidEstimate est;
    est.freq_hz = 135.0;
    est.amplitude = 0.8;
    est.phase_rad = -1.1;
    const Waveform a = reconstruct_sinusoid(est, 4000, 20000.0, Unit::newton);
    const Waveform b = make_sine(135.0, 0.8, -1.1, 0.2, 20000.0, Unit::newton);
    CHECK(a.unit == Unit::newton);
    double worst = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a.samples[i] - b.samples[i]));
    CHECK(worst < 1e-12);
}
