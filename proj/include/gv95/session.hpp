#ifndef GV95_SESSION_HPP
#define GV95_SESSION_HPP

#include <cstdint>
#include <vector>

#include "gv95/analysis.hpp"
#include "gv95/attacks.hpp"
#include "gv95/config.hpp"
#include "gv95/protocol.hpp"

namespace gv95 {

struct SessionResult {
    std::vector<BinRecord> bins;
    RunStats stats;
    SiftedKey key;
    AttackCounters attack_counters;
    bool security_condition_ok = false;
    std::int64_t stretcher_saturations = 0;
    bool controller_locked_at_end = false;
    double tau_delay = 0.0;       // [s]
    double coherence_time = 0.0;  // [s]
    double multi_photon_fraction = 0.0; // P(n >= 2 | n >= 1) at the configured mu
};

/// Execute one full session on a single simulation clock: phase drift, the
/// stabilisation loop at its own rate, pulse emission per the switch
/// schedule, transport, detection and sifting.
///
/// Two engines are available and agree on count statistics: the per-gate
/// engine samples every detection window (exact; required for attacks and
/// timing studies), the binned-rate engine samples per-bin counts from the
/// closed-form click rates (fast path). Deterministic for a given
/// (config, seed).
SessionResult run_session(const ScenarioConfig& cfg);

} // namespace gv95

#endif
