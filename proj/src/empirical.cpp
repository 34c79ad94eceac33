#include "evib/empirical.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "json.hpp"

namespace evib {

double cutoff_for_speed(const EmpiricalSpeedModel& model, double speed_mm_s,
                        Warnings* warnings) {
    if (!(speed_mm_s > 0.0))
        throw DataError("cutoff_for_speed: speed must be positive");
    if (speed_mm_s < model.speed_min || speed_mm_s > model.speed_max)
        warn(warnings, "cutoff_for_speed: speed " + std::to_string(speed_mm_s) +
                           " mm/s outside the model's validity range [" +
                           std::to_string(model.speed_min) + ", " +
                           std::to_string(model.speed_max) + "]");
    return model.intercept_hz + model.slope_hz_per_mm_s * speed_mm_s;
}

std::complex<double> evaluate_model(const EmpiricalSpeedModel& model, double freq_hz,
                                    double speed_mm_s, Warnings* warnings) {
    if (!(freq_hz > 0.0)) throw DataError("evaluate_model: frequency must be positive");
    const double w_o = 2.0 * std::numbers::pi * cutoff_for_speed(model, speed_mm_s, warnings);
    const std::complex<double> s(0.0, 2.0 * std::numbers::pi * freq_hz);
    return model.k_bar * w_o / (s + w_o);
}

EmpiricalSpeedModel build_empirical_model(const std::vector<ParameterSample>& k_samples,
                                          const std::vector<ParameterSample>& omega_samples) {
    if (k_samples.empty() || omega_samples.empty())
        throw DataError("build_empirical_model: empty sample set");

    double k_sum = 0.0;
    for (const auto& s : k_samples) {
        if (!std::isfinite(s.value)) throw DataError("build_empirical_model: non-finite gain");
        k_sum += s.value;
    }

    std::vector<RegressionSample> reg;
    reg.reserve(omega_samples.size());
    for (const auto& s : omega_samples)
        reg.push_back({s.force_n, s.speed_mm_s, s.value});
    LinearFit fit = ols_fit(reg);  // throws if the grid cannot support a slope

    EmpiricalSpeedModel model;
    model.k_bar = k_sum / double(k_samples.size());
    model.intercept_hz = fit.intercept;
    model.slope_hz_per_mm_s = fit.coef_speed;
    return model;
}

void write_empirical_model_json(const EmpiricalSpeedModel& model,
                                const std::filesystem::path& path) {
    nlohmann::json j;
    j["version"] = 1;
    j["K_bar"] = model.k_bar;
    j["intercept_hz"] = model.intercept_hz;
    j["slope_hz_per_mm_s"] = model.slope_hz_per_mm_s;
    j["validity"] = {
        {"speed_mm_s", {model.speed_min, model.speed_max}},
        {"force_n", {model.force_min, model.force_max}},
        {"amplitude_vpp", model.amplitude_vpp},
    };
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw DataError("write failed for " + path.string());
}

EmpiricalSpeedModel read_empirical_model_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("bad JSON in " + path.string() + ": " + e.what());
    }
    EmpiricalSpeedModel model;
    try {
        model.k_bar = j.at("K_bar").get<double>();
        model.intercept_hz = j.at("intercept_hz").get<double>();
        model.slope_hz_per_mm_s = j.at("slope_hz_per_mm_s").get<double>();
        if (j.contains("validity")) {
            const auto& v = j.at("validity");
            model.speed_min = v.at("speed_mm_s").at(0).get<double>();
            model.speed_max = v.at("speed_mm_s").at(1).get<double>();
            model.force_min = v.at("force_n").at(0).get<double>();
            model.force_max = v.at("force_n").at(1).get<double>();
            model.amplitude_vpp = v.at("amplitude_vpp").get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError("bad empirical model in " + path.string() + ": " + e.what());
    }
    if (!(model.intercept_hz > 0.0))
        throw DataError("empirical model in " + path.string() + " has nonpositive intercept");
    return model;
}

}  // namespace evib
