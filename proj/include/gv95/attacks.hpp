#ifndef GV95_ATTACKS_HPP
#define GV95_ATTACKS_HPP

#include <cstdint>
#include <random>

#include "gv95/analysis.hpp"
#include "gv95/protocol.hpp"

namespace gv95 {

enum class AttackKind { None, InterceptFirst, StoreBoth };

/// What Eve injects downstream when she destroys the intercepted pulse
/// instead of forwarding the collapsed photon.
enum class ResendStrategy { LocalizedB, LocalizedA, RandomGuessState };

struct AttackConfig {
    AttackKind kind = AttackKind::None;
    double attack_fraction = 0.0;
    double storage_delay = -1.0;   // store_both hold time [s]; < 0 means "tau"
    ResendStrategy resend = ResendStrategy::LocalizedB;
    bool destroy_and_regenerate = false;
};

enum class EveKnowledge { None, Full };

struct AttackOutcome {
    WavepacketPair pair;
    EveKnowledge knowledge = EveKnowledge::None;
    int learned_bit = -1;
    double delay_added = 0.0;
};

/// Eve measures photon presence in the mode-b packet while it is alone in
/// the channel. Either collapse branch destroys the superposition and
/// leaves a localized packet carrying zero bit information (both states
/// have |amp_b|^2 = 1/2). Timing is preserved.
AttackOutcome apply_intercept_first(const WavepacketPair& pair, const AttackConfig& cfg,
                                    std::mt19937_64& rng);

/// Eve captures the mode-b packet, waits for mode a, interferes them in an
/// ideal local interferometer (orthogonal states are fully distinguishable
/// once both components are held), then re-prepares the learned state and
/// forwards it late by storage_delay.
AttackOutcome apply_store_both(const WavepacketPair& pair, const AttackConfig& cfg,
                               double tau, std::mt19937_64& rng);

/// Session-level tallies an attack run accumulates for reporting.
struct AttackCounters {
    std::int64_t emissions = 0;
    std::int64_t attacked_emissions = 0;
    std::int64_t signal_clicks = 0;    // single clicks caused by a photon
    std::int64_t known_bit_clicks = 0; // of those, from emissions Eve decoded
    std::int64_t alarm_timing = 0;
    std::int64_t alarm_double = 0;
    std::int64_t sifted_bits = 0;
    std::int64_t sifted_errors = 0;
    double duration = 0.0;
};

struct AttackSummary {
    ValueWithSigma eve_info;     // fraction of signal clicks whose bit Eve knows
    ValueWithSigma induced_qber; // error fraction of the sifted key
    ValueWithSigma alarm_rate;   // alarms per second
};

AttackSummary attack_report(const AttackCounters& counters);

} // namespace gv95

#endif
