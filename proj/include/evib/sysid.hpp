#pragma once

#include "evib/plant.hpp"
#include "evib/preprocess.hpp"
#include "evib/setup_model.hpp"

namespace evib {

enum class FitKind { first_order, second_order, setup_normal, setup_lateral };

/// Result of one frequency-response fit. Only the parameter block matching
/// `kind` is meaningful. `residual` is the mean squared complex-log error per
/// point (log-magnitude and unwrapped-phase residuals combined); `converged`
/// is false when that residual is above threshold or any parameter stuck at a
/// search bound (unidentifiable directions).
struct FitResult {
    FitKind kind = FitKind::first_order;
    FirstOrderFrictionModel first;
    SkinModel skin;
    SetupModel setup;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    double band_lo_hz = 0.0;
    double band_hi_hz = 0.0;
    int n_points = 0;
};

/// Divides each response by the rig's lateral force coloring at its
/// frequency. Entries where the coloring magnitude is below 1e-6 of the
/// set's peak coloring magnitude are dropped with a warning (division there
/// only amplifies noise).
FrfPointSet remove_setup(const FrfPointSet& points, const SetupModel& setup,
                         Warnings* warnings = nullptr);

/// Fits K, omega_o of the first-order friction response to the point cloud,
/// using entries at or below band_max_hz. Multi-start simplex refined by
/// damped least squares on the complex-log cost.
FitResult fit_first_order(const FrfPointSet& points, double band_max_hz = 750.0);

/// Fits m, b, k of the force-to-velocity skin response the same way.
FitResult fit_second_order(const FrfPointSet& points, double band_max_hz = 750.0);

/// Fits the rig's normal-direction impact response (gain, natural frequency,
/// damping ratio).
FitResult fit_setup_normal(const FrfPointSet& impact_frf);

/// Fits the rig's fourth-order lateral impact response with the leading
/// numerator/denominator coefficients fixed at 1.
FitResult fit_setup_lateral(const FrfPointSet& impact_frf);

}  // namespace evib
