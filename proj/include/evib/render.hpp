#pragma once

#include <vector>

#include "evib/empirical.hpp"
#include "evib/plant.hpp"
#include "evib/waveform.hpp"

namespace evib {

struct RenderConfig {
    double carrier_hz = 7000.0;
    double v_limit_vpp = 150.0;
    double boost_ceiling = 10.0;  // linear cap on the inverse filter's boost (20 dB)
    std::size_t block_len = 4000;
    double band_lo_hz = 30.0;
    double band_hi_hz = 1000.0;  // tactile bandwidth; must stay <= 1 kHz
};

void validate_render_config(const RenderConfig& cfg);

/// Third-octave comparison of achieved vs target friction magnitude spectra.
/// error_db is 0 for bands the target leaves empty; worst_error_db covers only
/// bands with target content.
struct SpectralMatchReport {
    std::vector<double> band_center_hz;
    std::vector<double> target_rms;
    std::vector<double> achieved_rms;
    std::vector<double> error_db;
    double worst_error_db = 0.0;
    double band_lo_hz = 0.0;
    double band_hi_hz = 0.0;
    double saturation_fraction = 0.0;
};

/// Speed-adaptive inverse of the friction model: per block, multiplies each
/// in-band spectral line of the target friction by (jw + w_o(v)) / (K w_o(v)),
/// with the boost above DC clamped at cfg.boost_ceiling. Out-of-band bins and
/// DC are zeroed (static friction is the baseline's job, not the filter's).
/// Returns the message voltage to feed render_voltage.
Waveform inverse_filter(const Waveform& target_friction, double speed_mm_s,
                        const EmpiricalSpeedModel& model, const RenderConfig& cfg,
                        Warnings* warnings = nullptr);

/// Sqrt-envelope AM synthesis of the drive: am_modulate at cfg.carrier_hz,
/// then hard-limited to cfg.v_limit_vpp peak-to-peak. The clipped sample
/// fraction is reported through saturation_fraction when non-null.
Waveform render_voltage(const Waveform& message, const RenderConfig& cfg,
                        double* saturation_fraction = nullptr);

/// Closed-loop check: inverse_filter (designed at design_speed, or at
/// speed_mm_s when design_speed <= 0) -> render_voltage -> the plant's
/// electrostatic/friction chain at speed_mm_s -> spectral comparison against
/// the target over cfg's band. The rendered record is periodic, so the chain
/// is applied as exact steady state.
SpectralMatchReport verify_render(const Waveform& target_friction, double speed_mm_s,
                                  const RenderConfig& cfg, const PlantConfig& plant,
                                  const EmpiricalSpeedModel& model,
                                  double design_speed_mm_s = 0.0,
                                  Warnings* warnings = nullptr);

}  // namespace evib
