#pragma once

#include <complex>
#include <filesystem>
#include <string>
#include <vector>

#include "evib/errors.hpp"
#include "evib/stats.hpp"

namespace evib {

/// Speed-dependent first-order friction law: gain K_bar with cutoff
/// f_o(speed) = intercept + slope*speed (Hz). Valid over the tested grid.
struct EmpiricalSpeedModel {
    double k_bar = 0.0123;          // N/V
    double intercept_hz = 385.68;   // Hz
    double slope_hz_per_mm_s = 13.811;
    double speed_min = 20.0, speed_max = 100.0;    // mm/s
    double force_min = 0.2, force_max = 0.6;       // N
    double amplitude_vpp = 150.0;                  // V
};

/// Cutoff frequency in Hz at sliding speed `speed_mm_s`; warns outside the
/// validity range.
double cutoff_for_speed(const EmpiricalSpeedModel& model, double speed_mm_s,
                        Warnings* warnings = nullptr);

/// H(j2*pi*f) = K_bar*w_o / (j*w + w_o) with w_o = 2*pi*cutoff_for_speed.
std::complex<double> evaluate_model(const EmpiricalSpeedModel& model, double freq_hz,
                                    double speed_mm_s, Warnings* warnings = nullptr);

/// One fitted parameter value at a grid cell.
struct ParameterSample {
    double speed_mm_s = 0.0;
    double force_n = 0.0;
    int participant = 0;
    double value = 0.0;
};

/// K_bar = mean of the gain samples; (intercept, slope) from the full
/// force+speed+interaction OLS on the cutoff samples with the force terms
/// discarded afterwards (they carry no significant effect in this model
/// family, so the reported law is speed-only).
EmpiricalSpeedModel build_empirical_model(const std::vector<ParameterSample>& k_samples,
                                          const std::vector<ParameterSample>& omega_samples);

void write_empirical_model_json(const EmpiricalSpeedModel& model,
                                const std::filesystem::path& path);
EmpiricalSpeedModel read_empirical_model_json(const std::filesystem::path& path);

}  // namespace evib
