#ifndef GV95_STABILIZATION_HPP
#define GV95_STABILIZATION_HPP

#include <span>

namespace gv95 {

enum class LockSetpoint { Minimize, Maximize };

/// Perturb-and-observe dither controller state. Each step compares the
/// monitor photodiode reading against the previous one; moving away from
/// the setpoint flips the walk direction. The residual estimate feeding
/// `locked` is reconstructed from the fringe (needs the bright-fringe power
/// and classical visibility as calibration).
struct ControllerState {
    double dither_step = 0.01;      // [rad] per loop period
    double last_power = -1.0;       // last PD reading; < 0 means none yet
    int direction = +1;             // +1 or -1
    double loop_rate = 1000.0;      // [Hz]
    bool locked = false;
    LockSetpoint setpoint = LockSetpoint::Minimize;

    // Residual-phase estimator calibration.
    double p_bright = 1.0;          // monitor power at the bright fringe [W]
    double v_classical = 0.99;      // classical fringe visibility
    double lock_threshold = 0.2;    // locked iff residual EWMA below this [rad]
    double ewma_alpha = 0.01;
    double residual_ewma = 3.141592653589793; // starts pessimistic
};

/// One control iteration: reads the monitor power, updates the dither
/// direction, and returns the stretcher command for this period.
double controller_step(double pd_power, ControllerState& ctrl);

/// Fringe visibility supported by a residual-phase trace: v0 * mean(cos e_i).
double residual_to_visibility(std::span<const double> phase_error_trace, double v0);

struct LockQuality {
    double rms = 0.0;            // [rad]
    double slip_fraction = 0.0;  // fraction of samples with |error| > pi/2
};

/// RMS and fringe-slip fraction of a residual trace. Trace must be non-empty.
LockQuality lock_quality(std::span<const double> phase_error_trace);

} // namespace gv95

#endif
