#include "evib/plant.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "evib/filters.hpp"
#include "evib/modulation.hpp"

namespace evib {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kGravity = 9.8;     // m/s^2 per sensor unit
constexpr double kRampS = 0.05;      // raised-cosine gate ramp
constexpr double kSweepTravelMm = 37.5;
constexpr double kReturnSpeed = 150.0;  // mm/s, faster than any tested speed
}  // namespace

double FirstOrderFrictionModel::f_o_hz() const { return omega_o / kTwoPi; }

FirstOrderFrictionModel make_first_order(double k, double f_o_hz) {
    FirstOrderFrictionModel m;
    m.k = k;
    m.omega_o = kTwoPi * f_o_hz;
    if (!(m.k > 0.0) || !(m.omega_o > 0.0))
        throw DataError("first-order friction model needs positive K and cutoff");
    return m;
}

FirstOrderFrictionModel FrictionLaw::at_speed(double speed_mm_s, Warnings* w) const {
    if (!empirical) return fixed;
    return make_first_order(speed_model.k_bar, cutoff_for_speed(speed_model, speed_mm_s, w));
}

void validate_plant_config(const PlantConfig& cfg) {
    if (!(cfg.mu > 0.0) || cfg.mu > 2.0)
        throw DataError("plant config: mu must lie in (0, 2]");
    if (cfg.noise_rms < 0.0) throw DataError("plant config: negative noise_rms");
    if (cfg.k_e < 0.0) throw DataError("plant config: negative k_e");
    if (!(cfg.skin.m > 0.0) || !(cfg.skin.b > 0.0) || !(cfg.skin.k > 0.0))
        throw DataError("plant config: skin m, b, k must be positive");
    if (!cfg.law.empirical &&
        (!(cfg.law.fixed.k > 0.0) || !(cfg.law.fixed.omega_o > 0.0)))
        throw DataError("plant config: fixed friction law needs positive K and cutoff");
    validate_setup_model(cfg.setup);
}

void validate_protocol(const TrialProtocol& proto, Warnings* warnings) {
    if (!(proto.rate_hz > 0.0) || !(proto.duration_s > 0.0))
        throw DataError("protocol: rate and duration must be positive");
    if (proto.sweeps < 1) throw DataError("protocol: need at least one sweep");
    if (!(proto.message_freq_hz > 0.0) ||
        proto.message_freq_hz >= proto.carrier_hz)
        throw DataError("protocol: message frequency must be positive and below carrier");
    // both sidebands of the modulated drive must stay representable
    if (proto.carrier_hz + proto.message_freq_hz >= 0.5 * proto.rate_hz)
        throw DataError("protocol: carrier plus message exceeds the Nyquist band");
    if (!(proto.speed_mm_s > 0.0)) throw DataError("protocol: speed must be positive");
    if (!(proto.force_n > 0.0)) throw DataError("protocol: force must be positive");
    if (proto.amplitude_vpp < 0.0) throw DataError("protocol: negative amplitude");

    const auto freqs = protocol_frequencies();
    const bool canonical = std::any_of(freqs.begin(), freqs.end(), [&](double f) {
        return std::abs(f - proto.message_freq_hz) < 1e-9;
    });
    if (!canonical)
        warn(warnings, "protocol: message frequency " +
                           std::to_string(proto.message_freq_hz) +
                           " Hz is outside the canonical 15-frequency set");
    if (proto.speed_mm_s < 20.0 || proto.speed_mm_s > 100.0)
        warn(warnings, "protocol: speed outside the tested 20-100 mm/s grid");
    if (proto.force_n < 0.2 || proto.force_n > 0.6)
        warn(warnings, "protocol: force outside the tested 0.2-0.6 N grid");
}

std::vector<double> protocol_frequencies() {
    return log_spaced_frequencies(30.0, 2000.0, 15);
}
std::vector<double> protocol_speeds() { return {20.0, 40.0, 60.0, 80.0, 100.0}; }
std::vector<double> protocol_forces() { return {0.2, 0.3, 0.4, 0.5, 0.6}; }

Waveform electrostatic_force(const Waveform& v_i, double k_e) {
    if (v_i.unit != Unit::volt)
        throw DataError("electrostatic_force: input must be in volts");
    if (k_e < 0.0) throw DataError("electrostatic_force: negative k_e");
    Waveform out;
    out.rate_hz = v_i.rate_hz;
    out.unit = Unit::newton;
    out.samples.resize(v_i.size());
    for (std::size_t i = 0; i < v_i.size(); ++i)
        out.samples[i] = k_e * v_i.samples[i] * v_i.samples[i];
    return out;
}

Waveform apply_lti(const std::vector<double>& num, const std::vector<double>& den,
                   const Waveform& w, Unit out_unit) {
    FactoredTf tf = factor_tf(num, den);
    SosCascade cascade;
    cascade.gain = tf.gain;
    for (const auto& cs : tf.sections) cascade.sections.push_back(bilinear(cs, w.rate_hz));
    return cascade.apply(w, out_unit);
}

Waveform skin_velocity(const Waveform& friction, const SkinModel& skin) {
    if (friction.unit != Unit::newton)
        throw DataError("skin_velocity: friction must be in newtons");
    return apply_lti({1.0, 0.0}, {skin.m, skin.b, skin.k}, friction,
                     Unit::meter_per_second);
}

std::uint64_t trial_seed(std::uint64_t base_seed, int participant,
                         const TrialProtocol& proto) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    std::uint64_t h = mix(base_seed);
    h = mix(h ^ static_cast<std::uint64_t>(participant));
    h = mix(h ^ static_cast<std::uint64_t>(std::llround(proto.speed_mm_s * 1000.0)));
    h = mix(h ^ static_cast<std::uint64_t>(std::llround(proto.force_n * 1000.0)));
    h = mix(h ^ static_cast<std::uint64_t>(std::llround(proto.message_freq_hz * 1000.0)));
    return h;
}

namespace {

struct SweepSchedule {
    double plateau_s = 0.0;
    double gap_s = 0.0;
    std::vector<double> starts_s;  // full-level start of each plateau
};

SweepSchedule make_schedule(const TrialProtocol& proto) {
    const double window_s = 4000.0 / proto.rate_hz;
    if (double(proto.sweeps) * window_s > proto.duration_s)
        throw DataError("protocol: sweeps * window exceeds the trial duration");

    SweepSchedule sch;
    sch.plateau_s = std::clamp(kSweepTravelMm / proto.speed_mm_s, 0.25, 1.2);
    const double min_gap = 2.0 * kRampS + 0.05;
    double gap = (proto.duration_s - proto.sweeps * sch.plateau_s) / (proto.sweeps + 1);
    if (gap < min_gap) {
        sch.plateau_s =
            (proto.duration_s - (proto.sweeps + 1) * min_gap) / proto.sweeps;
        gap = min_gap;
        if (sch.plateau_s < 1.25 * window_s)
            throw DataError("protocol: duration too short for the requested sweep count");
    }
    sch.gap_s = gap;
    for (int p = 0; p < proto.sweeps; ++p)
        sch.starts_s.push_back(gap + p * (sch.plateau_s + gap));
    return sch;
}

// Raised-cosine sweep gate: 0 in gaps, 1 on plateaus, 50 ms ramps straddling
// the plateau edges on the gap side.
std::vector<double> make_gate(const SweepSchedule& sch, std::size_t n, double rate) {
    std::vector<double> e(n, 0.0);
    for (double start_s : sch.starts_s) {
        const double end_s = start_s + sch.plateau_s;
        const long i_ramp_up = std::lround((start_s - kRampS) * rate);
        const long i_start = std::lround(start_s * rate);
        const long i_end = std::lround(end_s * rate);
        const long i_ramp_down = std::lround((end_s + kRampS) * rate);
        for (long i = std::max(0L, i_ramp_up); i < i_start && i < long(n); ++i) {
            const double u = (double(i) / rate - (start_s - kRampS)) / kRampS;
            e[size_t(i)] = 0.5 - 0.5 * std::cos(std::numbers::pi * u);
        }
        for (long i = std::max(0L, i_start); i <= i_end && i < long(n); ++i)
            e[size_t(i)] = 1.0;
        for (long i = std::max(0L, i_end + 1); i <= i_ramp_down && i < long(n); ++i) {
            const double u = (double(i) / rate - end_s) / kRampS;
            e[size_t(i)] = 0.5 + 0.5 * std::cos(std::numbers::pi * u);
        }
    }
    return e;
}

// One period of cos/sin at a rate-commensurate frequency, indexed by
// sample mod period; exact (drift-free) for bin-centered protocol tones.
struct ToneTable {
    std::vector<double> cos_v, sin_v;
    std::size_t period = 0;

    ToneTable(double freq_hz, double rate_hz, std::size_t n) {
        const double cycles_per_sample = freq_hz / rate_hz;
        // find the smallest period P <= n with P*f/rate integral
        for (std::size_t p = 1; p <= 40000; ++p) {
            const double c = cycles_per_sample * double(p);
            if (std::abs(c - std::round(c)) < 1e-9) {
                period = p;
                break;
            }
        }
        if (period == 0) period = std::min<std::size_t>(n, 40000);
        cos_v.resize(period);
        sin_v.resize(period);
        for (std::size_t i = 0; i < period; ++i) {
            const double ph = kTwoPi * freq_hz * double(i) / rate_hz;
            cos_v[i] = std::cos(ph);
            sin_v[i] = std::sin(ph);
        }
    }
    double c(std::size_t i) const { return cos_v[i % period]; }
    double s(std::size_t i) const { return sin_v[i % period]; }
};

}  // namespace

TrialRecord simulate_trial(const PlantConfig& cfg, const TrialProtocol& proto,
                           std::uint64_t seed, Warnings* warnings) {
    validate_plant_config(cfg);
    validate_protocol(proto, warnings);

    const double rate = proto.rate_hz;
    const std::size_t n = static_cast<std::size_t>(std::llround(proto.duration_s * rate));
    const SweepSchedule sch = make_schedule(proto);
    const std::vector<double> gate = make_gate(sch, n, rate);

    const double amp = proto.amplitude_vpp * proto.amplitude_vpp / 8.0;
    const double w_m = kTwoPi * proto.message_freq_hz;
    const ToneTable tone(proto.message_freq_hz, rate, n);

    // drive voltage: message A*(e*(cos+1) - 1) has |min| = A exactly, so the
    // sqrt envelope is A*e*(cos+1) and the carrier gates off between sweeps
    Waveform feed;
    feed.rate_hz = rate;
    feed.unit = Unit::volt;
    feed.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        feed.samples[i] = amp * (gate[i] * (tone.c(i) + 1.0) - 1.0);
    TrialRecord rec;
    rec.voltage = am_modulate(feed, proto.carrier_hz, warnings);

    const FirstOrderFrictionModel fo = cfg.law.at_speed(proto.speed_mm_s, warnings);
    const std::complex<double> jw(0.0, w_m);
    const std::complex<double> h_msg = fo.k * fo.omega_o / (jw + fo.omega_o);
    const std::complex<double> t_col = setup_lateral_coloring(cfg.setup, proto.message_freq_hz);

    Waveform friction;  // measured (setup-colored) 1-D friction before noise
    friction.rate_hz = rate;
    friction.unit = Unit::newton;
    friction.samples.resize(n);

    if (cfg.mode == PlantMode::linear) {
        // per-line construction: exact steady-state LTI response for the
        // trial's line spectrum (baseline, EV DC shift, message tone)
        const std::complex<double> line = amp * h_msg * t_col;
        const double lre = line.real(), lim = line.imag();
        const double dc_ev = fo.k * amp;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = gate[i];
            friction.samples[i] = cfg.mu * proto.force_n * (0.5 + 0.5 * e) +
                                  e * (dc_ev + lre * tone.c(i) - lim * tone.s(i));
        }
    } else {
        const double k_e = cfg.k_e > 0.0 ? cfg.k_e : 2.0 * fo.k / cfg.mu;
        Waveform fe = electrostatic_force(rec.voltage, k_e);
        Waveform ev = apply_lti({fo.omega_o}, {1.0, fo.omega_o}, fe, Unit::newton);
        for (std::size_t i = 0; i < n; ++i)
            friction.samples[i] = cfg.mu * (proto.force_n * (0.5 + 0.5 * gate[i]) +
                                            ev.samples[i]);
        std::vector<double> cnum, cden;
        setup_coloring_tf(cfg.setup, cnum, cden);
        friction = apply_lti(cnum, cden, friction, Unit::newton);
    }

    // skin acceleration from the measured friction line: a = jw * H_f * F
    Waveform accel_lat;
    accel_lat.rate_hz = rate;
    accel_lat.unit = Unit::meter_per_second_sq;
    if (cfg.mode == PlantMode::linear) {
        const std::complex<double> h_f =
            jw / (cfg.skin.m * jw * jw + cfg.skin.b * jw + cfg.skin.k);
        const std::complex<double> aline = amp * h_msg * t_col * jw * h_f;
        const double are = aline.real(), aim = aline.imag();
        accel_lat.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            accel_lat.samples[i] = gate[i] * (are * tone.c(i) - aim * tone.s(i));
    } else {
        accel_lat = apply_lti({1.0, 0.0, 0.0}, {cfg.skin.m, cfg.skin.b, cfg.skin.k},
                              friction, Unit::meter_per_second_sq);
    }

    // noise, then the fixed-azimuth 2-D split the reduction stage must undo
    std::mt19937_64 rng(trial_seed(seed, rec.participant, proto));
    std::normal_distribution<double> gauss(0.0, 1.0);
    if (cfg.noise_rms > 0.0)
        for (double& f : friction.samples) f += cfg.noise_rms * gauss(rng);

    const double az = kAzimuthDeg * std::numbers::pi / 180.0;
    const double ca = std::cos(az), sa = std::sin(az);
    rec.force_x.rate_hz = rec.force_y.rate_hz = rate;
    rec.force_x.unit = rec.force_y.unit = Unit::newton;
    rec.force_x.samples.resize(n);
    rec.force_y.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        rec.force_x.samples[i] = ca * friction.samples[i];
        rec.force_y.samples[i] = sa * friction.samples[i];
    }

    rec.force_normal.rate_hz = rate;
    rec.force_normal.unit = Unit::newton;
    rec.force_normal.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double fn = proto.force_n * (0.5 + 0.5 * gate[i]);
        if (cfg.noise_rms > 0.0) fn += cfg.noise_rms * gauss(rng);
        rec.force_normal.samples[i] = fn;
    }

    // sensor frame: R = R_y(180 deg) * R_x(155 deg), a symmetric involution,
    // so the simulator applies the same matrix the alignment op does
    const double rx = kAzimuthDeg * std::numbers::pi / 180.0;
    const double cx = std::cos(rx), sx = std::sin(rx);
    const double r[3][3] = {{-1.0, 0.0, 0.0}, {0.0, cx, -sx}, {0.0, -sx, -cx}};
    const std::complex<double> h_f_acc =
        jw / (cfg.skin.m * jw * jw + cfg.skin.b * jw + cfg.skin.k);
    const double accel_noise_sensor =
        cfg.noise_rms * w_m * std::abs(h_f_acc) / kGravity;

    Waveform* acc_ch[3] = {&rec.accel_x, &rec.accel_y, &rec.accel_z};
    for (auto* ch : acc_ch) {
        ch->rate_hz = rate;
        ch->unit = Unit::dimensionless;  // sensor counts in g
        ch->samples.resize(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double v[3] = {accel_lat.samples[i] * ca, accel_lat.samples[i] * sa, 0.0};
        for (int axis = 0; axis < 3; ++axis) {
            double s = (r[axis][0] * v[0] + r[axis][1] * v[1] + r[axis][2] * v[2]) / kGravity;
            if (cfg.noise_rms > 0.0) s += accel_noise_sensor * gauss(rng);
            acc_ch[axis]->samples[i] = s;
        }
    }

    // 60 Hz position: constant-speed track during plateaus, fast smoothstep
    // return during gaps, 0.1 mm quantization
    const double travel_mm = proto.speed_mm_s * sch.plateau_s;
    const double x0 = 5.0;
    const double t_return = std::min(0.5 * sch.gap_s, travel_mm / kReturnSpeed);
    const std::size_t n_pos = static_cast<std::size_t>(std::floor(proto.duration_s * 60.0)) + 1;
    rec.position.reserve(n_pos);
    for (std::size_t k = 0; k < n_pos; ++k) {
        const double t = double(k) / 60.0;
        double x = x0;
        for (std::size_t p = 0; p < sch.starts_s.size(); ++p) {
            const double start = sch.starts_s[p], end = start + sch.plateau_s;
            if (t >= start && t <= end) {
                x = x0 + proto.speed_mm_s * (t - start);
                break;
            }
            if (t > end) {
                const double ret0 = end + kRampS + 0.1 * sch.gap_s;
                if (t < ret0)
                    x = x0 + travel_mm;
                else if (t < ret0 + t_return) {
                    const double u = (t - ret0) / t_return;
                    x = x0 + travel_mm * (1.0 - u * u * (3.0 - 2.0 * u));
                } else {
                    x = x0;
                }
            }
        }
        rec.position.push_back({t, std::round(x * 10.0) / 10.0});
    }

    rec.proto = proto;
    rec.seed = seed;
    rec.ground_truth = cfg;
    return rec;
}

}  // namespace evib
