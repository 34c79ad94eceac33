#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evib/empirical.hpp"
#include "evib/errors.hpp"
#include "evib/setup_model.hpp"
#include "evib/waveform.hpp"

namespace evib {

/// First-order message-to-friction response: H(s) = K*w_o/(s + w_o).
struct FirstOrderFrictionModel {
    double k = 0.0147;      // N/V
    double omega_o = 0.0;   // rad/s; f_o_hz() reported in Hz
    double f_o_hz() const;
};
FirstOrderFrictionModel make_first_order(double k, double f_o_hz);

/// Fingertip as mass-spring-damper: H_f(s) = v(s)/F(s) = s/(m s^2 + b s + k).
struct SkinModel {
    double m = 0.0015;  // kg
    double b = 1.3;     // N*s/m
    double k = 444.0;   // N/m
};

/// Friction law driving the simulator: either the speed-dependent empirical
/// law or a fixed first-order model.
struct FrictionLaw {
    bool empirical = true;
    EmpiricalSpeedModel speed_model;     // used when empirical
    FirstOrderFrictionModel fixed;       // used otherwise
    /// Model at sliding speed nu (gain, cutoff).
    FirstOrderFrictionModel at_speed(double speed_mm_s, Warnings* w = nullptr) const;
};

enum class PlantMode { linear, physical };

struct PlantConfig {
    FrictionLaw law;
    SkinModel skin;
    SetupModel setup;
    double mu = 0.5;        // friction coefficient, (0, 2]
    double k_e = 0.0;       // N/V^2; 0 = auto-calibrate so identified gain == K
    double noise_rms = 0.0; // N, white Gaussian on measured channels
    PlantMode mode = PlantMode::linear;
};
void validate_plant_config(const PlantConfig& cfg);

struct TrialProtocol {
    double message_freq_hz = 30.0;
    double speed_mm_s = 40.0;
    double force_n = 0.2;
    double carrier_hz = 7000.0;
    double amplitude_vpp = 150.0;
    double duration_s = 10.0;
    int sweeps = 6;
    double rate_hz = 20000.0;
};
void validate_protocol(const TrialProtocol& proto, Warnings* warnings = nullptr);

/// Canonical tested grid.
std::vector<double> protocol_frequencies();  // 15 log-spaced, 5 Hz bins
std::vector<double> protocol_speeds();       // mm/s
std::vector<double> protocol_forces();       // N

struct PositionSample {
    double time_s = 0.0;
    double position_mm = 0.0;
};

struct TrialRecord {
    Waveform voltage;       // V
    Waveform force_x;       // N
    Waveform force_y;       // N
    Waveform force_normal;  // N
    Waveform accel_x;       // sensor frame, g units until aligned
    Waveform accel_y;
    Waveform accel_z;
    std::vector<PositionSample> position;  // 60 Hz, 0.1 mm quantized
    TrialProtocol proto;
    int participant = 1;
    std::uint64_t seed = 0;
    std::optional<PlantConfig> ground_truth;  // synthetic records carry it
};

/// Electrostatic attraction from drive voltage: out[i] = k_e * v[i]^2.
Waveform electrostatic_force(const Waveform& v_i, double k_e);

/// Bilinear-discretized continuous transfer function (descending-power
/// coefficient vectors) applied as cascaded second-order sections.
Waveform apply_lti(const std::vector<double>& num, const std::vector<double>& den,
                   const Waveform& w, Unit out_unit);

/// Fingertip velocity response to friction: apply_lti of s/(m s^2 + b s + k).
Waveform skin_velocity(const Waveform& friction, const SkinModel& skin);

/// Deterministic per-trial RNG seed from trial coordinates (order-independent
/// so serial and parallel batch runs generate identical records).
std::uint64_t trial_seed(std::uint64_t base_seed, int participant,
                         const TrialProtocol& proto);

/// Synthesize one trial: gated sqrt-envelope AM drive, friction with the
/// mu*F_n + K*A baseline and the filtered message line, lateral setup
/// coloring, azimuth-split 2D forces, skin acceleration in the rotated sensor
/// frame, and a 60 Hz quantized position track. Deterministic given
/// (cfg, proto, seed).
TrialRecord simulate_trial(const PlantConfig& cfg, const TrialProtocol& proto,
                           std::uint64_t seed, Warnings* warnings = nullptr);

/// Accelerometer mounting azimuth used by the simulator and the alignment op.
inline constexpr double kAzimuthDeg = 155.0;

}  // namespace evib
