#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "evib/plant.hpp"
#include "evib/waveform.hpp"

namespace evib {

/// One detected finger sweep in a trial record, in sample indices of the
/// high-rate channels. The analysis window is the 4000 samples centered on
/// middle_index (1999 left, 2000 right, inclusive).
struct SweepSegment {
    std::size_t start_index = 0;
    std::size_t end_index = 0;     // inclusive
    std::size_t middle_index = 0;  // round((start+end)/2)
    bool left_to_right = true;
};

/// Time-aligned 4000-sample analysis slices for one sweep: the raw AM drive
/// voltage, the reduced 1-D friction, and the skin velocity derived from the
/// aligned lateral acceleration. All three cover identical sample indices.
struct SweepWindow {
    Waveform voltage;
    Waveform friction_1d;
    Waveform velocity;
    int ordinal = 0;  // 1-based among the extracted windows
    TrialProtocol proto;
    int participant = 1;
    double estimated_speed_mm_s = 0.0;
};

/// One frequency-response sample: complex response at one message frequency
/// for one sweep, tagged with the trial conditions it came from.
struct FrfPoint {
    double freq_hz = 0.0;
    std::complex<double> response;
    int sweep = 0;
    double speed_mm_s = 0.0;
    double force_n = 0.0;
    int participant = 1;
};

struct FrfPointSet {
    std::vector<FrfPoint> entries;
};

/// Collapses the two lateral force axes into one friction signal per FFT bin:
/// the output bin keeps the total magnitude sqrt(|FX|^2 + |FY|^2) and takes
/// its phase from the projection onto the dominant principal axis of the
/// window's bin ensemble. Degenerate direction ties resolve toward the y-axis
/// (the axis that carries most of the friction in the measurement geometry).
Waveform reduce_lateral_to_1d(const Waveform& fx, const Waveform& fy);

/// Rotates raw accelerometer channels (sensor counts in g) into the force
/// sensor frame via R_y(180 deg) * R_x(155 deg) and scales by 9.8 to m/s^2.
void align_accelerometer(const Waveform& ax, const Waveform& ay, const Waveform& az,
                         Waveform& out_x, Waveform& out_y, Waveform& out_z);

/// Finds sweeps as contiguous runs where a 50 ms moving average of the 1-D
/// friction exceeds the signal's global mean; runs shorter than 4000 samples
/// are dropped. Returns disjoint segments in increasing index order (empty if
/// nothing qualifies).
std::vector<SweepSegment> detect_sweeps(const Waveform& friction_1d);

/// Cuts the per-sweep analysis windows out of a trial record. Sweeps whose
/// window would leave the record, or that move right-to-left per the position
/// track, are skipped with a warning.
std::vector<SweepWindow> extract_windows(const TrialRecord& trial,
                                         const std::vector<SweepSegment>& sweeps,
                                         Warnings* warnings = nullptr);

/// Voltage-to-friction response at one message frequency: demodulates the AM
/// drive window back to the message sinusoid and divides the friction
/// coefficient by the message coefficient. Errors when the message coefficient
/// is below 1e-9 of the trial's full-scale message amplitude.
FrfPoint frf_point(const SweepWindow& window, double message_freq_hz,
                   double carrier_hz);

/// Friction-to-skin-velocity response at one message frequency, from the same
/// window: fft_coefficient(velocity, f) / fft_coefficient(friction, f).
FrfPoint skin_point(const SweepWindow& window, double message_freq_hz);

/// Robust sliding-speed estimate from the 60 Hz, 0.1 mm position track:
/// median absolute slope over ~0.1 s baselines, restricted to intervals that
/// are actually moving. Returns 0 for a stationary track; errors on fewer
/// than two samples.
double estimate_speed(const std::vector<PositionSample>& position);

}  // namespace evib
