#ifndef GV95_PROTOCOL_HPP
#define GV95_PROTOCOL_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "gv95/hardware.hpp"
#include "gv95/optics.hpp"

namespace gv95 {

enum class Detector { D0 = 0, D1 = 1 };

/// One source pulse: the key bit, its (gate-aligned) emission time, the
/// photon number drawn for this window and the mode amplitudes leaving
/// Alice (already carrying source-side losses).
struct Emission {
    int bit = 0;
    double t_emit = 0.0;
    int n_photons = 0;
    ModeAmplitudes state;
};

/// The two wavepacket components of one pulse on the channel. Mode a is
/// delayed by tau at Alice, so t_channel_a - t_channel_b = tau while the
/// pulse is in transit; mode b receives its tau at Bob before the output
/// coupler.
struct WavepacketPair {
    double t_channel_b = 0.0;
    double t_channel_a = 0.0;
    ModeAmplitudes amps;
};

struct DetectionRecord {
    double t_click = 0.0;
    Detector detector = Detector::D0;
    std::int64_t gate_index = 0;
    bool double_click = false;
    bool out_of_window = false;
};

struct SiftAlarms {
    std::int64_t timing_violations = 0;
    std::int64_t double_clicks = 0;
};

struct SiftedKey {
    std::vector<std::uint8_t> bits;
    std::vector<std::size_t> error_positions; // indices into bits disagreeing with Alice
    SiftAlarms alarms;
};

/// Detector gating relative to the source clock. Bob's gates are
/// transit-compensated: gate k opens at k*period + transit for width
/// seconds.
struct GateTiming {
    double period = 2e-6;
    double width = 2.5e-9;
    double transit = 0.0;
};

struct DetectorPair {
    DetectorParams d0;
    DetectorParams d1;
};

/// Result of one recombination attempt. `photon_caused` distinguishes
/// signal clicks from pure dark clicks for attack accounting.
struct RecombineResult {
    std::optional<DetectionRecord> record;
    bool photon_caused = false;
};

/// Homogeneous Poisson emission times on [0, duration), sorted and snapped
/// onto the gate grid (the source is pulsed inside detection windows).
std::vector<double> schedule_emissions(double mean_rate, double duration,
                                       double gate_rate, std::mt19937_64& rng);

/// Build the wavepacket pair for one pulse: make_state(bit) with the
/// source-side loss ledger applied (DWDM on the multiplexed input,
/// delay line on mode b), mode b entering the channel at t_emit and mode a
/// tau later.
WavepacketPair alice_emit(int bit, double t_emit, const LinkParams& params);

/// Bob's output coupler and gated detection for one pulse of n_photons.
/// Interference probabilities are taken from `probs` when both components
/// are present and re-synchronized within the coherence time; otherwise
/// each photon localizes on one component and splits 50:50. Dark counts of
/// the arrival gate are folded in. Returns no record when nothing clicked
/// (the dominant outcome at mu = 0.1).
RecombineResult recombine_with_probs(const WavepacketPair& pair, int n_photons,
                                     std::pair<double, double> probs,
                                     const DetectorPair& dets, const GateTiming& timing,
                                     double coherence_time, double tau_bob,
                                     std::mt19937_64& rng);

/// Convenience wrapper computing the interference probabilities from the
/// pair's own (normalized) amplitudes at the given quantum-channel phase
/// error and effective visibility.
RecombineResult bob_recombine(const WavepacketPair& pair, int n_photons,
                              double phase_q, double v_eff, const DetectorPair& dets,
                              const GateTiming& timing, double coherence_time,
                              double tau_bob, std::mt19937_64& rng);

/// GV95 timing requirement: the wavepacket separation must exceed every
/// emission/measurement uncertainty. Strict inequality.
bool check_security_condition(double tau, double coherence_time, double gate_width,
                              double emission_jitter);

/// Pair Bob's clicks with Alice's emissions by gate index. D0 decodes bit
/// 0, D1 bit 1. Out-of-window and double clicks are excluded and counted
/// as alarms, as are clicks with no (or an ambiguous) candidate emission.
SiftedKey sift(std::span<const Emission> alice_log,
               std::span<const DetectionRecord> bob_log, double gate_period);

/// Streaming core of sift(): classify one record given a lookup from gate
/// index to the emitted bit (negative return = no emission, -2 = ambiguous).
void sift_click(const DetectionRecord& rec,
                const std::function<int(std::int64_t)>& bit_at_gate, SiftedKey& key);

} // namespace gv95

#endif
