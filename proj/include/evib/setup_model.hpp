#pragma once

#include <complex>
#include <filesystem>
#include <vector>

namespace evib {

/// Second-order velocity-referenced response of the rig in the normal
/// direction: H_snd(s) = s*K*w_n^2 / (s^2 + 2*zeta*w_n*s + w_n^2).
struct SetupNormalModel {
    double k_snd = 0.58;
    double f_n_hz = 1454.0;
    double zeta = 0.011;
};

/// Fourth-order lateral response: a sharply damped main resonance times a
/// mounting-tape biquad. Defaults place the magnitude peaks near 856 Hz (the
/// nearly undamped mounting mode, a2 tiny) and 1714 Hz.
/// H_sld(s) = s*w_n^2/(s^2 + 2*zeta*w_n*s + w_n^2) * (b3 s^2 + b2 s + b1)/(a3 s^2 + a2 s + a1)
struct SetupLateralModel {
    double f_n_hz = 1714.0;
    double zeta = 0.06;
    double b3 = 1.0;
    double b2 = 92.0;
    double b1 = 0.0;  // default (2*pi*922)^2, set in default_setup_model()
    double a3 = 1.0;
    double a2 = 0.0001;
    double a1 = 0.0;  // default (2*pi*856)^2
};

struct SetupModel {
    SetupNormalModel normal;
    SetupLateralModel lateral;
};

/// Shipped baseline with the measured rig coefficients filled in.
SetupModel default_setup_model();

/// Validity checks shared by simulator and fitters; throws DataError.
void validate_setup_model(const SetupModel& m);

/// H_snd(j*2*pi*f): impact-hammer velocity-out response, normal direction.
std::complex<double> setup_normal_response(const SetupModel& m, double freq_hz);

/// H_sld(j*2*pi*f): impact-hammer velocity-out response, lateral direction.
/// Has a differentiator zero at DC.
std::complex<double> setup_lateral_response(const SetupModel& m, double freq_hz);

/// Force-transmissibility form of the lateral response: H_sld(s)/s normalized
/// so T(0) = 1. This is the coloring the rig applies to a force signal before
/// it reaches the sensor, and the factor the pipeline divides back out; the
/// raw mobility H_sld is not dimensionally a force-to-force map.
std::complex<double> setup_lateral_coloring(const SetupModel& m, double freq_hz);

/// Continuous numerator/denominator (descending powers of s) of the
/// transmissibility form, for time-domain filtering.
void setup_coloring_tf(const SetupModel& m, std::vector<double>& num,
                       std::vector<double>& den);

void write_setup_model_json(const SetupModel& m, const std::filesystem::path& path);
SetupModel read_setup_model_json(const std::filesystem::path& path);

}  // namespace evib
