#include "gv95/stabilization.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gv95/optics.hpp"

namespace gv95 {

namespace {

// Residual distance from the lock point, reconstructed from one PD reading.
// cos(phi) = (2 p / p_bright - 1) / v, phi in [0, pi]; the minimize setpoint
// sits at phi = pi.
double residual_from_power(double pd_power, const ControllerState& ctrl) {
    if (ctrl.p_bright <= 0.0 || ctrl.v_classical <= 0.0)
        return kPi;
    double c = (2.0 * pd_power / ctrl.p_bright - 1.0) / ctrl.v_classical;
    c = std::clamp(c, -1.0, 1.0);
    double phi = std::acos(c);
    return ctrl.setpoint == LockSetpoint::Minimize ? kPi - phi : phi;
}

} // namespace

double controller_step(double pd_power, ControllerState& ctrl) {
    if (pd_power < 0.0)
        throw std::invalid_argument("controller_step: pd_power must be >= 0");

    if (ctrl.last_power >= 0.0) {
        // Flip unless the last command strictly improved the reading.
        bool improved = ctrl.setpoint == LockSetpoint::Minimize
                            ? pd_power < ctrl.last_power
                            : pd_power > ctrl.last_power;
        if (!improved) ctrl.direction = -ctrl.direction;
    }
    ctrl.last_power = pd_power;

    double residual = residual_from_power(pd_power, ctrl);
    ctrl.residual_ewma += ctrl.ewma_alpha * (residual - ctrl.residual_ewma);
    ctrl.locked = ctrl.residual_ewma < ctrl.lock_threshold;

    return ctrl.direction * ctrl.dither_step;
}

double residual_to_visibility(std::span<const double> phase_error_trace, double v0) {
    if (v0 < 0.0 || v0 > 1.0)
        throw std::invalid_argument("residual_to_visibility: v0 outside [0,1]");
    if (phase_error_trace.empty()) return v0;
    double acc = 0.0;
    for (double e : phase_error_trace) acc += std::cos(e);
    return v0 * acc / static_cast<double>(phase_error_trace.size());
}

LockQuality lock_quality(std::span<const double> phase_error_trace) {
    if (phase_error_trace.empty())
        throw std::invalid_argument("lock_quality: empty trace");
    double sq = 0.0;
    std::size_t slips = 0;
    for (double e : phase_error_trace) {
        sq += e * e;
        if (std::abs(e) > kPi / 2.0) ++slips;
    }
    LockQuality q;
    q.rms = std::sqrt(sq / static_cast<double>(phase_error_trace.size()));
    q.slip_fraction = static_cast<double>(slips) / static_cast<double>(phase_error_trace.size());
    return q;
}

} // namespace gv95
