#ifndef GV95_OPTICS_HPP
#define GV95_OPTICS_HPP

#include <complex>
#include <random>
#include <utility>

namespace gv95 {

// Vacuum speed of light [m/s].
constexpr double kSpeedOfLight = 299792458.0;

constexpr double kPi = 3.141592653589793238462643383279502884;

/// Two-mode superposition amplitudes over the spatial modes a and b of the
/// interferometer. |amp_a|^2 + |amp_b|^2 is the surviving transmission
/// budget of the pulse (1 for a lossless pure state, < 1 after attenuation
/// bookkeeping).
struct ModeAmplitudes {
    std::complex<double> amp_a{0.0, 0.0};
    std::complex<double> amp_b{0.0, 0.0};

    double norm2() const {
        return std::norm(amp_a) + std::norm(amp_b);
    }
    bool is_normalized(double tol = 1e-9) const {
        double n = norm2();
        return n > 0.0 && std::abs(n - 1.0) <= tol;
    }
};

inline std::complex<double> inner_product(const ModeAmplitudes& x,
                                          const ModeAmplitudes& y) {
    return std::conj(x.amp_a) * y.amp_a + std::conj(x.amp_b) * y.amp_b;
}

/// Physical constants of the link. Defaults are the demonstrated 1 km
/// telecom-fibre setup.
struct LinkParams {
    double lambda_q = 1546.12e-9;        // quantum channel wavelength [m]
    double lambda_ph = 1547.72e-9;       // classical control wavelength [m]
    double coh_len_q = 6.4;              // source coherence length [m]
    double coh_len_ph_min = 50.0;        // control laser coherence, lower bound [m]
    double mu = 0.1;                     // mean photons per detection window
    double group_index = 1.44;           // fibre group index (fits 40 m -> 192 ns)
    double tau_len = 40.0;               // wavepacket separation spool length [m]
    double fiber_len = 1000.0;           // Alice-Bob fibre length [m]
    double dwdm_loss_db = 1.6;           // DWDM insertion loss [dB]
    double delay_line_loss_db = 3.0;     // free-space delay line loss, mode b [dB]
    double alignment_visibility[2] = {0.978, 0.989}; // per sent state, in [0,1]
};

/// Source state for a key bit: bit 0 -> (1,1)/sqrt(2), bit 1 -> (1,-1)/sqrt(2).
/// The two states are orthogonal.
ModeAmplitudes make_state(int bit);

/// Output-coupler probabilities for a normalized two-mode state entering the
/// recombining 50:50 coupler with inter-arm phase error `phase_err` and
/// effective fringe visibility `v_eff`.
///
/// Convention: at phase_err = 0 the bit-0 state maps to D0 and the bit-1
/// state to D1 (the aligned condition has minimum probability at the
/// "wrong" detector). Returns (p_d0, p_d1), always summing to 1.
/// Throws std::invalid_argument for v_eff outside [0,1] or an unnormalized
/// state -- such inputs indicate a model bug upstream.
std::pair<double, double> interfere(const ModeAmplitudes& state, double phase_err,
                                    double v_eff);

/// Photon number in one detection window of an attenuated laser pulse.
int sample_photon_count(double mu, std::mt19937_64& rng);

/// Group propagation delay of `length` metres of fibre [s].
double fiber_delay(double length_m, double group_index);

/// Ratio mapping a phase excursion at lambda_ph onto the quantum channel:
/// a common path-length change dL gives phi proportional to 1/lambda, so
/// phi_q = phi_ph * (lambda_ph / lambda_q).
double wavelength_phase_ratio(double lambda_ph, double lambda_q);

/// Wrap an angle to (-pi, pi].
double wrap_pi(double angle);

} // namespace gv95

#endif
