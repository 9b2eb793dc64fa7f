#ifndef GV95_HARDWARE_HPP
#define GV95_HARDWARE_HPP

#include <random>

#include "gv95/optics.hpp"

namespace gv95 {

/// Interferometer phase at the control wavelength plus the piezo stretcher
/// actuator state. phi_ph is kept unwrapped; consumers take it modulo 2*pi
/// through total_mod_2pi().
struct PhaseState {
    double phi_ph = 0.0;            // accumulated drift phase [rad]
    double drift_sigma = 0.0;       // Wiener drift strength [rad/sqrt(s)]
    double drift_ramp = 0.0;        // deterministic thermal ramp [rad/s]
    double stretcher_offset = 0.0;  // actuator contribution [rad]
    double stretcher_range = 60.0 * kPi; // saturation half-range [rad]

    double total() const { return phi_ph + stretcher_offset; }
    double total_mod_2pi() const {
        double a = std::fmod(total(), 2.0 * kPi);
        return a < 0.0 ? a + 2.0 * kPi : a;
    }
};

/// Gated single-photon detector. dark_prob is per gate; efficiency is the
/// calibrated end-to-end survival factor for a photon reaching this
/// detector's coupler output (it absorbs the unpublished loss ledger and
/// quantum efficiency, see analysis::calibrate_rates).
struct DetectorParams {
    double gate_rate = 500e3;       // gate repetition frequency [Hz]
    double gate_width = 2.5e-9;     // gate window [s]
    double dark_prob = 1.4e-5;      // dark count probability per gate
    double efficiency = 1.0;        // photon survival probability at this output
};

/// One Wiener-process step: phi_ph gains a zero-mean Gaussian increment of
/// std drift_sigma*sqrt(dt), plus the deterministic ramp.
void drift_step(PhaseState& phase, double dt, std::mt19937_64& rng);

/// Add a phase command to the stretcher. If the actuator would leave its
/// range it rewinds by the smallest 2*pi multiple that restores headroom
/// (fringe position is 2*pi periodic, so the interferometer stays locked)
/// and returns true. Requires stretcher_range >= pi.
bool stretcher_apply(PhaseState& phase, double command);

/// Power transmission after loss_db of attenuation applied to an existing
/// budget in [0,1].
double attenuate(double transmission_budget, double loss_db);

/// Gated detection: click with probability 1-(1-dark)*(1-p_signal); signal
/// and dark causes are independent.
bool gated_click(double p_signal, const DetectorParams& det, std::mt19937_64& rng);

/// Monitor photodiode power on the classical channel fringe.
double classical_pd_power(double p_in, double phase_ph, double v_classical);

} // namespace gv95

#endif
