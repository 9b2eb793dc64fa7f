#include "gv95/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace gv95 {

std::vector<double> schedule_emissions(double mean_rate, double duration,
                                       double gate_rate, std::mt19937_64& rng) {
    if (mean_rate <= 0.0)
        throw std::invalid_argument("schedule_emissions: mean_rate must be > 0");
    if (gate_rate <= 0.0)
        throw std::invalid_argument("schedule_emissions: gate_rate must be > 0");
    std::vector<double> times;
    if (duration <= 0.0) return times;
    times.reserve(static_cast<std::size_t>(mean_rate * duration * 1.1) + 16);
    std::exponential_distribution<double> gap(mean_rate);
    double period = 1.0 / gate_rate;
    double t = gap(rng);
    while (t < duration) {
        // Snap to the start of the gate containing t; the source is pulsed
        // only inside detection windows.
        double snapped = std::floor(t / period) * period;
        times.push_back(snapped);
        t += gap(rng);
    }
    return times;
}

WavepacketPair alice_emit(int bit, double t_emit, const LinkParams& params) {
    ModeAmplitudes state = make_state(bit);
    // Source-side loss ledger: the DWDM on the multiplexed input applies to
    // the whole pulse, the free-space delay line to the mode-b share. The
    // operating interferometer is balanced (arm imbalance is compensated at
    // alignment and absorbed into alignment_visibility), so the budget
    // scales both modes equally while keeping its energy-weighted total.
    double budget = attenuate(1.0, params.dwdm_loss_db) *
                    (0.5 + 0.5 * attenuate(1.0, params.delay_line_loss_db));
    double scale = std::sqrt(budget);
    state.amp_a *= scale;
    state.amp_b *= scale;

    WavepacketPair pair;
    pair.t_channel_b = t_emit;
    pair.t_channel_a = t_emit + fiber_delay(params.tau_len, params.group_index);
    pair.amps = state;
    return pair;
}

namespace {

struct GateSlot {
    std::int64_t gate = 0;
    bool in_window = true;
    double t_open = 0.0;
};

// Assign an arrival time to a detection gate. A photon arriving inside
// gate k's window belongs to k; a late one registers on the next gate and
// is flagged out-of-window. The tolerance below absorbs the rounding noise
// of long simulated times (<< gate width, >> double precision at 1e5 s).
GateSlot assign_gate(double t_arrival, const GateTiming& timing) {
    const double tol = 1e-4 * timing.period;
    double rel = t_arrival - timing.transit;
    auto k = static_cast<std::int64_t>(std::llround(rel / timing.period));
    double delta = rel - static_cast<double>(k) * timing.period;
    GateSlot slot;
    if (delta >= -tol && delta <= timing.width + tol) {
        slot.gate = k;
        slot.in_window = true;
    } else if (delta > 0.0) {
        slot.gate = k + 1; // after k's window closed, before k+1 opened
        slot.in_window = false;
    } else {
        slot.gate = k; // early for gate k (cannot happen without an attack)
        slot.in_window = false;
    }
    slot.t_open = static_cast<double>(slot.gate) * timing.period + timing.transit;
    return slot;
}

} // namespace

RecombineResult recombine_with_probs(const WavepacketPair& pair, int n_photons,
                                     std::pair<double, double> probs,
                                     const DetectorPair& dets, const GateTiming& timing,
                                     double coherence_time, double tau_bob,
                                     std::mt19937_64& rng) {
    const ModeAmplitudes& amps = pair.amps;
    double norm2 = amps.norm2();
    double wa = std::norm(amps.amp_a);
    double wb = std::norm(amps.amp_b);
    bool has_a = wa > 0.0;
    bool has_b = wb > 0.0;

    // Bob's tau delay on mode b re-synchronizes the pair; interference
    // needs both components present and overlapping within the coherence
    // time at the output coupler. timing.transit is the full
    // emission-to-detection latency (fibre plus tau), so the fibre-only
    // part applies to mode a, which received its tau at Alice.
    double fiber_transit = timing.transit - tau_bob;
    double t_out_a = pair.t_channel_a + fiber_transit;
    double t_out_b = pair.t_channel_b + fiber_transit + tau_bob;
    bool interfering = has_a && has_b && std::abs(t_out_a - t_out_b) <= coherence_time;

    std::uniform_real_distribution<double> uni(0.0, 1.0);
    bool click[2] = {false, false};
    double t_photon[2] = {0.0, 0.0};

    for (int i = 0; i < n_photons; ++i) {
        double arrival;
        double p_d0;
        if (interfering) {
            arrival = t_out_a;
            p_d0 = probs.first;
        } else {
            // Which-path collapse or misalignment: the photon localizes on
            // one surviving component and splits 50:50 at the coupler.
            if (!has_a && !has_b) break;
            bool via_a = !has_b || (has_a && uni(rng) * (wa + wb) < wa);
            arrival = via_a ? t_out_a : t_out_b;
            p_d0 = 0.5;
        }
        int d = uni(rng) < p_d0 ? 0 : 1;
        double eff = d == 0 ? dets.d0.efficiency : dets.d1.efficiency;
        if (uni(rng) >= norm2 * eff) continue; // photon lost
        if (!click[d] || arrival < t_photon[d]) t_photon[d] = arrival;
        click[d] = true;
    }

    bool photon_caused = click[0] || click[1];

    // Nominal arrival for dark assignment when nothing clicked.
    double t_principal = has_a ? t_out_a : t_out_b;
    if (click[0] && (!click[1] || t_photon[0] <= t_photon[1]))
        t_principal = t_photon[0];
    else if (click[1])
        t_principal = t_photon[1];
    GateSlot slot = assign_gate(t_principal, timing);

    // Dark counts of the arrival gate, independent per detector.
    bool dark0 = uni(rng) < dets.d0.dark_prob;
    bool dark1 = uni(rng) < dets.d1.dark_prob;

    bool c0 = click[0] || dark0;
    bool c1 = click[1] || dark1;

    RecombineResult result;
    result.photon_caused = photon_caused;
    if (!c0 && !c1) return result;

    DetectionRecord rec;
    rec.gate_index = slot.gate;
    rec.out_of_window = photon_caused && !slot.in_window;
    rec.double_click = c0 && c1;
    if (c0 && c1) {
        rec.detector = Detector::D0;
        rec.t_click = click[0] ? t_photon[0] : slot.t_open;
    } else if (c0) {
        rec.detector = Detector::D0;
        rec.t_click = click[0] ? t_photon[0] : slot.t_open;
        if (!click[0]) rec.out_of_window = false; // pure dark is always gated
    } else {
        rec.detector = Detector::D1;
        rec.t_click = click[1] ? t_photon[1] : slot.t_open;
        if (!click[1]) rec.out_of_window = false;
    }
    result.record = rec;
    return result;
}

RecombineResult bob_recombine(const WavepacketPair& pair, int n_photons,
                              double phase_q, double v_eff, const DetectorPair& dets,
                              const GateTiming& timing, double coherence_time,
                              double tau_bob, std::mt19937_64& rng) {
    std::pair<double, double> probs{0.5, 0.5};
    double n2 = pair.amps.norm2();
    if (n2 > 0.0 && std::norm(pair.amps.amp_a) > 0.0 && std::norm(pair.amps.amp_b) > 0.0) {
        ModeAmplitudes unit = pair.amps;
        double r = 1.0 / std::sqrt(n2);
        unit.amp_a *= r;
        unit.amp_b *= r;
        probs = interfere(unit, phase_q, v_eff);
    }
    return recombine_with_probs(pair, n_photons, probs, dets, timing, coherence_time,
                                tau_bob, rng);
}

bool check_security_condition(double tau, double coherence_time, double gate_width,
                              double emission_jitter) {
    if (tau < 0.0 || coherence_time < 0.0 || gate_width < 0.0 || emission_jitter < 0.0)
        throw std::invalid_argument("check_security_condition: negative time");
    double uncertainty = std::max({coherence_time, gate_width, emission_jitter});
    return tau > uncertainty;
}

void sift_click(const DetectionRecord& rec,
                const std::function<int(std::int64_t)>& bit_at_gate, SiftedKey& key) {
    if (rec.double_click) {
        ++key.alarms.double_clicks;
        return;
    }
    if (rec.out_of_window) {
        ++key.alarms.timing_violations;
        return;
    }
    int alice_bit = bit_at_gate(rec.gate_index);
    if (alice_bit < 0) {
        // No unique emission expected in this gate: dark count in an empty
        // slot, attack injection, or an ambiguous double emission.
        ++key.alarms.timing_violations;
        return;
    }
    int bob_bit = rec.detector == Detector::D1 ? 1 : 0;
    key.bits.push_back(static_cast<std::uint8_t>(bob_bit));
    if (bob_bit != alice_bit)
        key.error_positions.push_back(key.bits.size() - 1);
}

SiftedKey sift(std::span<const Emission> alice_log,
               std::span<const DetectionRecord> bob_log, double gate_period) {
    if (gate_period <= 0.0)
        throw std::invalid_argument("sift: gate_period must be > 0");
    std::unordered_map<std::int64_t, int> by_gate;
    by_gate.reserve(alice_log.size());
    for (const Emission& e : alice_log) {
        auto g = static_cast<std::int64_t>(std::llround(e.t_emit / gate_period));
        auto [it, inserted] = by_gate.try_emplace(g, e.bit);
        if (!inserted) it->second = -2; // two emissions in one gate: ambiguous
    }
    SiftedKey key;
    auto lookup = [&by_gate](std::int64_t g) {
        auto it = by_gate.find(g);
        if (it == by_gate.end()) return -1;
        return it->second;
    };
    for (const DetectionRecord& rec : bob_log) sift_click(rec, lookup, key);
    return key;
}

} // namespace gv95
