#include "gv95/optics.hpp"

#include <cmath>
#include <stdexcept>

namespace gv95 {

ModeAmplitudes make_state(int bit) {
    if (bit != 0 && bit != 1)
        throw std::invalid_argument("make_state: bit must be 0 or 1");
    const double r = 1.0 / std::sqrt(2.0);
    return ModeAmplitudes{{r, 0.0}, {bit == 0 ? r : -r, 0.0}};
}

std::pair<double, double> interfere(const ModeAmplitudes& state, double phase_err,
                                    double v_eff) {
    if (!(v_eff >= 0.0 && v_eff <= 1.0))
        throw std::invalid_argument("interfere: v_eff outside [0,1]");
    if (!state.is_normalized(1e-6))
        throw std::invalid_argument("interfere: state not normalized");

    // Mach-Zehnder output law: the cross term 2*Re(conj(a)*b*e^{i phi})
    // carries the fringe; v_eff scales its contrast.
    std::complex<double> rot(std::cos(phase_err), std::sin(phase_err));
    double cross = 2.0 * std::real(std::conj(state.amp_a) * state.amp_b * rot);
    double p_d0 = 0.5 * (1.0 + v_eff * cross);
    // Clamp round-off; the pair must be a probability distribution.
    if (p_d0 < 0.0) p_d0 = 0.0;
    if (p_d0 > 1.0) p_d0 = 1.0;
    return {p_d0, 1.0 - p_d0};
}

int sample_photon_count(double mu, std::mt19937_64& rng) {
    if (mu < 0.0)
        throw std::invalid_argument("sample_photon_count: mu must be >= 0");
    if (mu == 0.0) return 0;
    std::poisson_distribution<int> dist(mu);
    return dist(rng);
}

double fiber_delay(double length_m, double group_index) {
    if (length_m < 0.0)
        throw std::invalid_argument("fiber_delay: length must be >= 0");
    return group_index * length_m / kSpeedOfLight;
}

double wavelength_phase_ratio(double lambda_ph, double lambda_q) {
    if (lambda_ph <= 0.0 || lambda_q <= 0.0)
        throw std::invalid_argument("wavelength_phase_ratio: wavelengths must be > 0");
    return lambda_ph / lambda_q;
}

double wrap_pi(double angle) {
    double a = std::fmod(angle, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    if (a > kPi) a -= 2.0 * kPi;
    return a;
}

} // namespace gv95
