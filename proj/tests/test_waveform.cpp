#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "evib/errors.hpp"
#include "evib/waveform.hpp"

using namespace evib;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("log_spaced_frequencies matches an independent geometric recomputation") {
    const auto freqs = log_spaced_frequencies(30.0, 2000.0, 15);
    REQUIRE(freqs.size() == 15);
    CHECK(freqs.front() == doctest::Approx(30.0));
    CHECK(freqs.back() == doctest::Approx(2000.0));

    // oracle: geometric progression snapped to the 5 Hz grid of a
    // 4000-sample window at 20 kHz
    const double ratio = std::pow(2000.0 / 30.0, 1.0 / 14.0);
    double raw = 30.0;
    for (int i = 0; i < 15; ++i) {
        const double snapped = 5.0 * std::round(raw / 5.0);
        CHECK(freqs[size_t(i)] == doctest::Approx(snapped).epsilon(1e-12));
        raw *= ratio;
    }

    for (size_t i = 1; i < freqs.size(); ++i) CHECK(freqs[i] > freqs[i - 1]);
}

TEST_CASE("log_spaced_frequencies endpoints and argument validation") {
    const auto two = log_spaced_frequencies(30.0, 2000.0, 2);
    REQUIRE(two.size() == 2);
    CHECK(two[0] == doctest::Approx(30.0));
    CHECK(two[1] == doctest::Approx(2000.0));

    CHECK_THROWS_AS(log_spaced_frequencies(30.0, 2000.0, 1), DataError);
    CHECK_THROWS_AS(log_spaced_frequencies(0.0, 2000.0, 5), DataError);
    CHECK_THROWS_AS(log_spaced_frequencies(100.0, 100.0, 5), DataError);
}

TEST_CASE("make_sine evaluates the cosine convention exactly") {
    const Waveform w = make_sine(30.0, 1.0, 0.0, 0.2, 20000.0);
    REQUIRE(w.size() == 4000);
    CHECK(w.rate_hz == 20000.0);
    CHECK(w[0] == doctest::Approx(1.0));
    for (size_t i : {1ul, 7ul, 123ul, 3999ul}) {
        const double expect = std::cos(2.0 * kPi * 30.0 * double(i) / 20000.0);
        CHECK(w[i] == doctest::Approx(expect).epsilon(1e-12));
    }

    const Waveform shifted = make_sine(50.0, 2.5, 0.7, 0.1, 20000.0);
    CHECK(shifted[0] == doctest::Approx(2.5 * std::cos(0.7)).epsilon(1e-12));
}

TEST_CASE("make_sine rejects aliasing and malformed arguments") {
    CHECK_NOTHROW(make_sine(2000.0, 1.0, 0.0, 1.0, 20000.0));
    CHECK_THROWS_AS(make_sine(12000.0, 1.0, 0.0, 1.0, 20000.0), DataError);
    CHECK_THROWS_AS(make_sine(10000.0, 1.0, 0.0, 1.0, 20000.0), DataError);
    CHECK_THROWS_AS(make_sine(100.0, 1.0, 0.0, 0.0, 20000.0), DataError);
    CHECK_THROWS_AS(make_sine(100.0, 1.0, 0.0, 1.0, -5.0), DataError);
    CHECK_THROWS_AS(make_sine(-30.0, 1.0, 0.0, 1.0, 20000.0), DataError);
    // duration*rate must land on an integer sample count
    CHECK_THROWS_AS(make_sine(100.0, 1.0, 0.0, 0.20001, 20000.0), DataError);
    CHECK_NOTHROW(make_sine(100.0, 1.0, 0.0, 0.20005, 20000.0));
}

TEST_CASE("wrap_phase maps onto the half-open principal interval") {
    CHECK(wrap_phase(0.0) == 0.0);
    CHECK(wrap_phase(kPi) == doctest::Approx(kPi));
    CHECK(wrap_phase(-kPi) == doctest::Approx(kPi));
    CHECK(wrap_phase(2.0 * kPi) == doctest::Approx(0.0));
    CHECK(wrap_phase(3.5 * kPi) == doctest::Approx(-0.5 * kPi));
    CHECK(wrap_phase(-7.25 * kPi) == doctest::Approx(0.75 * kPi));
    for (double x : {0.1, 1.0, 2.9, -2.9, 15.7, -33.3}) {
        const double r = wrap_phase(x);
        CHECK(r > -kPi);
        CHECK(r <= kPi);
        // wrapped value differs from the input by a whole number of turns
        CHECK(std::abs(std::remainder(r - x, 2.0 * kPi)) < 1e-9);
    }
}

TEST_CASE("summary statistics on known samples") {
    Waveform w;
    w.rate_hz = 10.0;
    w.samples = {3.0, -1.0, 4.0, 0.0};
    CHECK(mean(w) == doctest::Approx(1.5));
    CHECK(rms(w) == doctest::Approx(std::sqrt((9.0 + 1.0 + 16.0) / 4.0)));
    CHECK(min_sample(w) == -1.0);
    CHECK(max_sample(w) == 4.0);
    CHECK(w.duration_s() == doctest::Approx(0.4));
}

TEST_CASE("unit tags round-trip through their string form") {
    for (Unit u : {Unit::dimensionless, Unit::volt, Unit::newton, Unit::meter_per_second,
                   Unit::meter_per_second_sq, Unit::millimeter}) {
        CHECK(unit_from_string(unit_to_string(u)) == u);
    }
    CHECK(unit_from_string("m/s^2") == Unit::meter_per_second_sq);
    CHECK_THROWS_AS(unit_from_string("furlongs"), DataError);
}
