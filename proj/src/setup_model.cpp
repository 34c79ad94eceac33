#include "evib/setup_model.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "json.hpp"

#include "evib/errors.hpp"
#include "evib/filters.hpp"

namespace evib {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double omega(double f_hz) { return kTwoPi * f_hz; }
}  // namespace

SetupModel default_setup_model() {
    SetupModel m;
    m.lateral.b1 = omega(922.0) * omega(922.0);
    m.lateral.a1 = omega(856.0) * omega(856.0);
    return m;
}

void validate_setup_model(const SetupModel& m) {
    if (!(m.normal.f_n_hz > 0.0) || !(m.lateral.f_n_hz > 0.0))
        throw DataError("setup model: natural frequencies must be positive");
    if (!(m.normal.zeta > 0.0) || m.normal.zeta >= 1.0 || !(m.lateral.zeta > 0.0) ||
        m.lateral.zeta >= 1.0)
        throw DataError("setup model: damping ratios must lie in (0, 1)");
    // left-half-plane check for a3 s^2 + a2 s + a1 (positive coefficients)
    if (!(m.lateral.a3 > 0.0) || !(m.lateral.a2 > 0.0) || !(m.lateral.a1 > 0.0))
        throw DataError("setup model: lateral a-polynomial must be stable "
                        "(all coefficients positive)");
    if (!(m.lateral.b1 > 0.0))
        throw DataError("setup model: lateral b1 must be positive (DC normalization)");
}

std::complex<double> setup_normal_response(const SetupModel& m, double freq_hz) {
    if (!(freq_hz > 0.0)) throw DataError("setup_normal_response: frequency must be positive");
    const double wn = omega(m.normal.f_n_hz);
    const std::complex<double> s(0.0, omega(freq_hz));
    return s * m.normal.k_snd * wn * wn / (s * s + 2.0 * m.normal.zeta * wn * s + wn * wn);
}

namespace {

// H_sld(s) without the differentiator: w_n^2/(s^2+2 z w_n s+w_n^2) * biquad
std::complex<double> lateral_without_zero(const SetupLateralModel& l, std::complex<double> s) {
    const double wn = omega(l.f_n_hz);
    const std::complex<double> res = wn * wn / (s * s + 2.0 * l.zeta * wn * s + wn * wn);
    const std::complex<double> mount =
        (l.b3 * s * s + l.b2 * s + l.b1) / (l.a3 * s * s + l.a2 * s + l.a1);
    return res * mount;
}

}  // namespace

std::complex<double> setup_lateral_response(const SetupModel& m, double freq_hz) {
    if (!(freq_hz > 0.0)) throw DataError("setup_lateral_response: frequency must be positive");
    const std::complex<double> s(0.0, omega(freq_hz));
    return s * lateral_without_zero(m.lateral, s);
}

std::complex<double> setup_lateral_coloring(const SetupModel& m, double freq_hz) {
    if (freq_hz == 0.0) return 1.0;
    if (freq_hz < 0.0) throw DataError("setup_lateral_coloring: negative frequency");
    const std::complex<double> s(0.0, omega(freq_hz));
    return lateral_without_zero(m.lateral, s) * (m.lateral.a1 / m.lateral.b1);
}

void setup_coloring_tf(const SetupModel& m, std::vector<double>& num,
                       std::vector<double>& den) {
    const auto& l = m.lateral;
    const double wn = omega(l.f_n_hz);
    const double g = wn * wn * l.a1 / l.b1;
    // (g*(b3 s^2 + b2 s + b1)) / ((s^2 + 2 z wn s + wn^2)(a3 s^2 + a2 s + a1))
    num = {g * l.b3, g * l.b2, g * l.b1};
    const double c1 = 2.0 * l.zeta * wn, c0 = wn * wn;
    den = {l.a3, l.a2 + c1 * l.a3, l.a1 + c1 * l.a2 + c0 * l.a3,
           c1 * l.a1 + c0 * l.a2, c0 * l.a1};
}

void write_setup_model_json(const SetupModel& m, const std::filesystem::path& path) {
    nlohmann::json j;
    j["version"] = 1;
    j["normal"] = {{"K_snd", m.normal.k_snd},
                   {"f_n_hz", m.normal.f_n_hz},
                   {"zeta", m.normal.zeta}};
    j["lateral"] = {{"f_n_hz", m.lateral.f_n_hz}, {"zeta", m.lateral.zeta},
                    {"b3", m.lateral.b3},         {"b2", m.lateral.b2},
                    {"b1", m.lateral.b1},         {"a3", m.lateral.a3},
                    {"a2", m.lateral.a2},         {"a1", m.lateral.a1}};
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw DataError("write failed for " + path.string());
}

SetupModel read_setup_model_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("bad JSON in " + path.string() + ": " + e.what());
    }
    SetupModel m = default_setup_model();
    try {
        const auto& n = j.at("normal");
        m.normal.k_snd = n.at("K_snd").get<double>();
        m.normal.f_n_hz = n.at("f_n_hz").get<double>();
        m.normal.zeta = n.at("zeta").get<double>();
        const auto& l = j.at("lateral");
        m.lateral.f_n_hz = l.at("f_n_hz").get<double>();
        m.lateral.zeta = l.at("zeta").get<double>();
        m.lateral.b3 = l.at("b3").get<double>();
        m.lateral.b2 = l.at("b2").get<double>();
        m.lateral.b1 = l.at("b1").get<double>();
        m.lateral.a3 = l.at("a3").get<double>();
        m.lateral.a2 = l.at("a2").get<double>();
        m.lateral.a1 = l.at("a1").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError("bad setup model in " + path.string() + ": " + e.what());
    }
    validate_setup_model(m);
    return m;
}

}  // namespace evib
