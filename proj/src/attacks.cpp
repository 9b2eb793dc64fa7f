#include "gv95/attacks.hpp"

#include <cmath>
#include <stdexcept>

namespace gv95 {

namespace {

// Collapse the pair onto one spatial mode, keeping the total transmission
// budget (the presence measurement relocates the pulse, it does not
// attenuate it).
void localize(WavepacketPair& pair, bool onto_b) {
    double n2 = pair.amps.norm2();
    double mag = std::sqrt(n2);
    if (onto_b) {
        pair.amps.amp_a = 0.0;
        pair.amps.amp_b = mag;
    } else {
        pair.amps.amp_b = 0.0;
        pair.amps.amp_a = mag;
    }
}

} // namespace

AttackOutcome apply_intercept_first(const WavepacketPair& pair, const AttackConfig& cfg,
                                    std::mt19937_64& rng) {
    if (cfg.kind != AttackKind::InterceptFirst)
        throw std::invalid_argument("apply_intercept_first: wrong attack kind");

    AttackOutcome out;
    out.pair = pair;
    out.knowledge = EveKnowledge::None; // presence reveals location, never the bit

    // Photon found in b with probability |amp_b|^2 / norm^2 (1/2 for both
    // protocol states).
    double n2 = pair.amps.norm2();
    double p_b = n2 > 0.0 ? std::norm(pair.amps.amp_b) / n2 : 0.5;
    bool found_in_b = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p_b;

    if (!cfg.destroy_and_regenerate) {
        // Non-destructive projection: the collapsed packet travels on with
        // its original timing.
        localize(out.pair, found_in_b);
        return out;
    }

    // Destroy-and-regenerate: Eve blocks the pulse and injects a fresh one
    // (unit budget, her source sits past Alice's losses).
    out.pair.amps = ModeAmplitudes{};
    switch (cfg.resend) {
    case ResendStrategy::LocalizedB:
        out.pair.amps.amp_b = 1.0;
        break;
    case ResendStrategy::LocalizedA:
        out.pair.amps.amp_a = 1.0;
        break;
    case ResendStrategy::RandomGuessState: {
        int guess = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < 0.5 ? 0 : 1;
        out.pair.amps = make_state(guess);
        break;
    }
    }
    return out;
}

AttackOutcome apply_store_both(const WavepacketPair& pair, const AttackConfig& cfg,
                               double tau, std::mt19937_64& rng) {
    if (cfg.kind != AttackKind::StoreBoth)
        throw std::invalid_argument("apply_store_both: wrong attack kind");
    double delay = cfg.storage_delay >= 0.0 ? cfg.storage_delay : tau;
    if (delay + 1e-15 < tau)
        throw std::invalid_argument(
            "apply_store_both: storage_delay must be >= tau (Eve must wait for "
            "the second packet)");
    (void)rng;

    AttackOutcome out;
    out.pair = pair;
    // Ideal local interference distinguishes the two orthogonal states
    // exactly: the bit is the sign of the cross term.
    double cross = std::real(std::conj(pair.amps.amp_a) * pair.amps.amp_b);
    out.learned_bit = cross >= 0.0 ? 0 : 1;
    out.knowledge = EveKnowledge::Full;
    out.delay_added = delay;
    // Eve re-prepares the learned state and forwards both components late;
    // amplitudes are statistics-preserving (her apparatus is lossless).
    out.pair.t_channel_b = pair.t_channel_b + delay;
    out.pair.t_channel_a = pair.t_channel_a + delay;
    return out;
}

AttackSummary attack_report(const AttackCounters& c) {
    AttackSummary s;
    auto binom = [](double k, double n) {
        ValueWithSigma v;
        if (n <= 0.0) return v;
        v.value = k / n;
        v.sigma = std::sqrt(std::max(0.0, k * (n - k) / (n * n * n)));
        return v;
    };
    s.eve_info = binom(static_cast<double>(c.known_bit_clicks),
                       static_cast<double>(c.signal_clicks));
    s.induced_qber = binom(static_cast<double>(c.sifted_errors),
                           static_cast<double>(c.sifted_bits));
    double alarms = static_cast<double>(c.alarm_timing + c.alarm_double);
    if (c.duration > 0.0)
        s.alarm_rate = {alarms / c.duration, std::sqrt(alarms) / c.duration};
    return s;
}

} // namespace gv95
