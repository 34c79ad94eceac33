#include "evib/render.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "evib/errors.hpp"
#include "evib/modulation.hpp"
#include "evib/spectrum.hpp"

namespace evib {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

void validate_render_config(const RenderConfig& cfg) {
    if (!(cfg.carrier_hz > 0.0)) throw DataError("render: carrier_hz must be positive");
    if (!(cfg.v_limit_vpp > 0.0)) throw DataError("render: v_limit_vpp must be positive");
    if (!(cfg.boost_ceiling >= 1.0))
        throw DataError("render: boost_ceiling must be >= 1 (unity allows no boost at all)");
    if (cfg.block_len < 16) throw DataError("render: block_len must be at least 16");
    if (!(cfg.band_lo_hz > 0.0) || !(cfg.band_hi_hz > cfg.band_lo_hz))
        throw DataError("render: band must satisfy 0 < lo < hi");
    if (cfg.band_hi_hz > 1000.0)
        throw DataError("render: band_hi_hz above 1 kHz exceeds the tactile bandwidth");
}

Waveform inverse_filter(const Waveform& target_friction, double speed_mm_s,
                        const EmpiricalSpeedModel& model, const RenderConfig& cfg,
                        Warnings* warnings) {
    validate_render_config(cfg);
    if (target_friction.samples.empty()) throw DataError("inverse_filter: empty target");
    if (!(target_friction.rate_hz > 0.0)) throw DataError("inverse_filter: rate must be positive");
    if (!(model.k_bar > 0.0)) throw DataError("inverse_filter: model gain must be positive");

    const double cutoff_hz = cutoff_for_speed(model, speed_mm_s, warnings);
    const double w_o = kTwoPi * cutoff_hz;

    Waveform out;
    out.rate_hz = target_friction.rate_hz;
    out.unit = Unit::volt;
    out.samples.reserve(target_friction.samples.size());

    bool ceiling_engaged = false;
    std::size_t pos = 0;
    const std::size_t n_total = target_friction.samples.size();
    while (pos < n_total) {
        const std::size_t len = std::min(cfg.block_len, n_total - pos);
        Waveform block;
        block.rate_hz = target_friction.rate_hz;
        block.unit = target_friction.unit;
        block.samples.assign(target_friction.samples.begin() + long(pos),
                             target_friction.samples.begin() + long(pos + len));

        Spectrum s = spectrum(block);
        for (std::size_t k = 0; k < s.size(); ++k) {
            const double f = s.freq_of(k);
            if (k == 0 || f < cfg.band_lo_hz || f > cfg.band_hi_hz) {
                // DC belongs to the static friction baseline; out-of-band
                // content is outside the model's validity and is not rendered.
                s.bins[k] = 0.0;
                continue;
            }
            const double w = kTwoPi * f;
            std::complex<double> gain =
                std::complex<double>(w_o, w) / (model.k_bar * w_o);
            const double boost = std::abs(gain) * model.k_bar;  // relative to DC gain 1/K
            if (boost > cfg.boost_ceiling) {
                gain *= cfg.boost_ceiling / boost;
                ceiling_engaged = true;
            }
            s.bins[k] *= gain;
        }
        Waveform msg = irfft(s, Unit::volt);
        out.samples.insert(out.samples.end(), msg.samples.begin(), msg.samples.end());
        pos += len;
    }

    if (ceiling_engaged)
        warn(warnings, "inverse_filter: boost ceiling engaged; high-frequency target "
                       "content is rendered below its requested level");
    return out;
}

Waveform render_voltage(const Waveform& message, const RenderConfig& cfg,
                        double* saturation_fraction) {
    validate_render_config(cfg);
    Waveform v = am_modulate(message, cfg.carrier_hz);
    const double limit = 0.5 * cfg.v_limit_vpp;
    std::size_t clipped = 0;
    for (double& x : v.samples) {
        if (x > limit) {
            x = limit;
            ++clipped;
        } else if (x < -limit) {
            x = -limit;
            ++clipped;
        }
    }
    if (saturation_fraction)
        *saturation_fraction =
            v.samples.empty() ? 0.0 : double(clipped) / double(v.samples.size());
    return v;
}

SpectralMatchReport verify_render(const Waveform& target_friction, double speed_mm_s,
                                  const RenderConfig& cfg, const PlantConfig& plant,
                                  const EmpiricalSpeedModel& model,
                                  double design_speed_mm_s, Warnings* warnings) {
    validate_render_config(cfg);
    validate_plant_config(plant);
    const double design_speed = design_speed_mm_s > 0.0 ? design_speed_mm_s : speed_mm_s;

    Waveform message = inverse_filter(target_friction, design_speed, model, cfg, warnings);
    double saturation = 0.0;
    Waveform drive = render_voltage(message, cfg, &saturation);
    if (saturation > 0.0)
        warn(warnings, "verify_render: drive saturated on " +
                       std::to_string(100.0 * saturation) + "% of samples");

    // Plant chain at the running speed: electrostatic squaring of the actual
    // drive, then the first-order friction response. The comparison targets
    // the friction modulation at the contact; the rig's sensing coloration is
    // excluded here, exactly as the analysis pipeline divides it back out of
    // measured data. The drive record is periodic (bin-centered content), so
    // the LTI part is applied as exact circular steady state.
    const FirstOrderFrictionModel run = plant.law.at_speed(speed_mm_s, warnings);
    const double k_e = plant.k_e > 0.0 ? plant.k_e : 2.0 * run.k / plant.mu;
    Waveform ev = electrostatic_force(drive, k_e);
    const double mu = plant.mu;
    const double w_run = run.omega_o;
    Waveform achieved = apply_frequency_response(
        ev,
        [&](double f) {
            const std::complex<double> lp =
                w_run / std::complex<double>(w_run, kTwoPi * f);
            return mu * lp;
        },
        Unit::newton);

    const Spectrum spec_target = spectrum(target_friction);
    const Spectrum spec_achieved = spectrum(achieved);

    SpectralMatchReport report;
    report.band_lo_hz = cfg.band_lo_hz;
    report.band_hi_hz = cfg.band_hi_hz;
    report.saturation_fraction = saturation;

    // Third-octave centers descending from band_hi; a band is included while
    // it still overlaps the configured range.
    const double kEdge = std::pow(2.0, 1.0 / 6.0);
    std::vector<double> centers;
    for (double c = cfg.band_hi_hz; c * kEdge >= cfg.band_lo_hz; c /= std::cbrt(2.0))
        centers.push_back(c);
    std::reverse(centers.begin(), centers.end());

    const double n = double(spec_target.signal_length);
    auto band_rms = [&](const Spectrum& s, double lo, double hi) {
        double acc = 0.0;
        for (std::size_t k = 1; k < s.size(); ++k) {
            const double f = s.freq_of(k);
            if (f < lo || f >= hi) continue;
            acc += 2.0 * std::norm(s.bins[k]) / (n * n);
        }
        return std::sqrt(acc);
    };

    double max_target = 0.0;
    for (double c : centers) {
        const double lo = std::max(c / kEdge, cfg.band_lo_hz);
        const double hi = std::min(c * kEdge, cfg.band_hi_hz + 1e-9);
        report.band_center_hz.push_back(c);
        report.target_rms.push_back(band_rms(spec_target, lo, hi));
        report.achieved_rms.push_back(band_rms(spec_achieved, lo, hi));
        max_target = std::max(max_target, report.target_rms.back());
    }

    report.worst_error_db = 0.0;
    const double floor = 1e-9 * max_target;
    for (std::size_t i = 0; i < report.band_center_hz.size(); ++i) {
        if (max_target <= 0.0 || report.target_rms[i] <= floor) {
            report.error_db.push_back(0.0);  // band empty in the target; skipped
            continue;
        }
        const double err =
            20.0 * std::log10(std::max(report.achieved_rms[i], 1e-300) / report.target_rms[i]);
        report.error_db.push_back(err);
        report.worst_error_db = std::max(report.worst_error_db, std::abs(err));
    }
    return report;
}

}  // namespace evib
