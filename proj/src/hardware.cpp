#include "gv95/hardware.hpp"

#include <cmath>
#include <stdexcept>

namespace gv95 {

void drift_step(PhaseState& phase, double dt, std::mt19937_64& rng) {
    if (dt <= 0.0)
        throw std::invalid_argument("drift_step: dt must be > 0");
    if (phase.drift_sigma > 0.0) {
        std::normal_distribution<double> step(0.0, phase.drift_sigma * std::sqrt(dt));
        phase.phi_ph += step(rng);
    }
    phase.phi_ph += phase.drift_ramp * dt;
}

bool stretcher_apply(PhaseState& phase, double command) {
    double next = phase.stretcher_offset + command;
    if (std::abs(next) <= phase.stretcher_range) {
        phase.stretcher_offset = next;
        return false;
    }
    // Saturated: rewind by whole fringes. k is the smallest multiple of
    // 2*pi that brings the offset back inside the range (exists for
    // range >= pi, which config validation guarantees).
    double sign = next > 0.0 ? 1.0 : -1.0;
    double k = std::ceil((std::abs(next) - phase.stretcher_range) / (2.0 * kPi));
    phase.stretcher_offset = next - sign * 2.0 * kPi * k;
    return true;
}

double attenuate(double transmission_budget, double loss_db) {
    if (transmission_budget < 0.0 || transmission_budget > 1.0)
        throw std::invalid_argument("attenuate: budget outside [0,1]");
    if (loss_db < 0.0)
        throw std::invalid_argument("attenuate: loss must be >= 0 dB");
    return transmission_budget * std::pow(10.0, -loss_db / 10.0);
}

bool gated_click(double p_signal, const DetectorParams& det, std::mt19937_64& rng) {
    if (p_signal < 0.0 || p_signal > 1.0)
        throw std::invalid_argument("gated_click: p_signal outside [0,1]");
    double p = 1.0 - (1.0 - det.dark_prob) * (1.0 - p_signal);
    return std::bernoulli_distribution(p)(rng);
}

double classical_pd_power(double p_in, double phase_ph, double v_classical) {
    if (p_in < 0.0)
        throw std::invalid_argument("classical_pd_power: p_in must be >= 0");
    if (v_classical < 0.0 || v_classical > 1.0)
        throw std::invalid_argument("classical_pd_power: visibility outside [0,1]");
    return p_in * 0.5 * (1.0 + v_classical * std::cos(phase_ph));
}

} // namespace gv95
