#include "gv95/session.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "gv95/rng.hpp"
#include "gv95/stabilization.hpp"

namespace gv95 {

namespace {

// Shared clockwork: phase drift plus the stabilisation loop, advanced one
// controller period at a time. Both engines consume the same trace.
struct PhaseLoop {
    PhaseState phase;
    ControllerState ctrl;
    bool enabled = false;
    double lock_center = kPi; // minimize setpoint sits at the fringe minimum
    double ratio = 1.0;       // lambda_PH -> lambda_Q phase scaling
    double offset = 0.0;      // static inter-wavelength offset [rad]
    double pd_power = 1.0;
    double v_classical = 0.99;
    double noise_sigma = 0.0;
    std::int64_t saturations = 0;

    std::mt19937_64 drift_rng;
    std::mt19937_64 pd_rng;
    std::normal_distribution<double> unit_normal{0.0, 1.0};

    void init(const ScenarioConfig& cfg) {
        const ControllerConfig& c = cfg.controller;
        lock_center = c.setpoint == LockSetpoint::Minimize ? kPi : 0.0;
        phase.phi_ph = lock_center + c.initial_phase_error;
        phase.drift_sigma = cfg.drift.sigma;
        phase.drift_ramp = cfg.drift.ramp;
        phase.stretcher_range = c.stretcher_range;
        ctrl.dither_step = c.dither_step;
        ctrl.loop_rate = c.loop_rate;
        ctrl.setpoint = c.setpoint;
        ctrl.p_bright = c.pd_power;
        ctrl.v_classical = c.v_classical;
        ctrl.lock_threshold = c.lock_threshold;
        enabled = c.enabled;
        ratio = wavelength_phase_ratio(cfg.link.lambda_ph, cfg.link.lambda_q);
        offset = c.interwavelength_offset;
        pd_power = c.pd_power;
        v_classical = c.v_classical;
        noise_sigma = c.pd_noise_rel * c.pd_power /
                      std::sqrt(static_cast<double>(c.pd_avg_samples));
        drift_rng = make_stream(cfg.seed, "phase-drift");
        pd_rng = make_stream(cfg.seed, "pd-noise");
    }

    // Advance one loop period; returns the quantum-channel phase error for
    // the gates of this period.
    double step(double dt) {
        drift_step(phase, dt, drift_rng);
        if (enabled) {
            double p = classical_pd_power(pd_power, phase.total(), v_classical);
            if (noise_sigma > 0.0)
                p = std::max(0.0, p + noise_sigma * unit_normal(pd_rng));
            double cmd = controller_step(p, ctrl);
            if (stretcher_apply(phase, cmd)) ++saturations;
        }
        double err_ph = wrap_pi(phase.total() - lock_center);
        return ratio * err_ph + offset;
    }
};

struct BinAccum {
    double sum_sq_phase = 0.0;
    std::int64_t phase_samples = 0;
    double expected_d0 = 0.0; // binned engine: accumulated click expectation
    double expected_d1 = 0.0;
};

double multi_photon_fraction(double mu) {
    if (mu <= 0.0) return 0.0;
    double p0 = std::exp(-mu);
    double p1 = mu * p0;
    return 1.0 - p1 / (1.0 - p0);
}

} // namespace

SessionResult run_session(const ScenarioConfig& cfg) {
    {
        std::vector<std::string> errs = validate(cfg);
        if (!errs.empty()) throw ConfigError(std::move(errs));
    }

    const double gate_rate = cfg.det_d0.gate_rate;
    const double period = 1.0 / gate_rate;
    const double loop_dt = 1.0 / cfg.controller.loop_rate;
    const auto n_ticks =
        static_cast<std::int64_t>(std::llround(cfg.duration * cfg.controller.loop_rate));
    const auto total_gates = static_cast<std::int64_t>(std::llround(cfg.duration * gate_rate));
    const auto nbins = static_cast<std::size_t>(std::llround(cfg.duration / cfg.bin_width));
    const auto gates_per_bin =
        static_cast<std::int64_t>(std::llround(cfg.bin_width * gate_rate));

    SessionResult result;
    result.tau_delay = fiber_delay(cfg.link.tau_len, cfg.link.group_index);
    result.coherence_time = fiber_delay(cfg.link.coh_len_q, cfg.link.group_index);
    result.security_condition_ok =
        check_security_condition(result.tau_delay, result.coherence_time,
                                 cfg.det_d0.gate_width, cfg.emission_jitter);
    result.multi_photon_fraction = multi_photon_fraction(cfg.link.mu);

    GateTiming timing;
    timing.period = period;
    timing.width = cfg.det_d0.gate_width;
    timing.transit =
        fiber_delay(cfg.link.fiber_len, cfg.link.group_index) + result.tau_delay;

    result.bins.resize(nbins);
    for (std::size_t i = 0; i < nbins; ++i) {
        result.bins[i].t_start = static_cast<double>(i) * cfg.bin_width;
        result.bins[i].sent_state = cfg.state_at(result.bins[i].t_start);
    }
    std::vector<BinAccum> accum(nbins);

    // Switch schedule in gate units for cheap per-gate lookup.
    std::vector<std::int64_t> toggle_gates;
    toggle_gates.reserve(cfg.toggle_epochs.size());
    for (double e : cfg.toggle_epochs)
        toggle_gates.push_back(static_cast<std::int64_t>(std::llround(e * gate_rate)));
    auto bit_at_gate = [&](std::int64_t g) {
        int bit = cfg.initial_bit;
        for (std::int64_t tg : toggle_gates) {
            if (g >= tg) bit ^= 1; else break;
        }
        return bit;
    };

    PhaseLoop loop;
    loop.init(cfg);

    // Immutable per-pulse data: source amplitudes per bit (time fields are
    // shifted per emission) and the normalized states feeding interfere().
    WavepacketPair base_pair[2] = {alice_emit(0, 0.0, cfg.link),
                                   alice_emit(1, 0.0, cfg.link)};
    ModeAmplitudes unit_state[2] = {make_state(0), make_state(1)};
    const double source_norm2 = base_pair[0].amps.norm2();

    // Background (filter-leakage) clicks fold into an effective per-gate
    // no-signal probability alongside the dark counts.
    const double bg_prob = cfg.background_rate / gate_rate;
    DetectorPair dets{cfg.det_d0, cfg.det_d1};
    dets.d0.dark_prob = 1.0 - (1.0 - dets.d0.dark_prob) * (1.0 - bg_prob);
    dets.d1.dark_prob = 1.0 - (1.0 - dets.d1.dark_prob) * (1.0 - bg_prob);
    const double dark_rate_d0 = gate_rate * dets.d0.dark_prob;
    const double dark_rate_d1 = gate_rate * dets.d1.dark_prob;
    const double t_eff_d0 = source_norm2 * dets.d0.efficiency;
    const double t_eff_d1 = source_norm2 * dets.d1.efficiency;

    std::mt19937_64 photon_rng = make_stream(cfg.seed, "photon");
    std::mt19937_64 dark_rng = make_stream(cfg.seed, "dark");
    std::mt19937_64 attack_rng = make_stream(cfg.seed, "attack");
    std::mt19937_64 emission_rng = make_stream(cfg.seed, "emission");
    std::mt19937_64 count_rng = make_stream(cfg.seed, "binned-counts");
    std::poisson_distribution<int> photon_count(cfg.link.mu > 0.0 ? cfg.link.mu : 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    // Sparse-mode emission gates (sorted, possibly with collapsed
    // duplicates that sift treats as ambiguous).
    std::unordered_map<std::int64_t, int> emission_bits;
    std::vector<std::int64_t> emission_gates;
    if (cfg.emission_mode == EmissionMode::RandomPoisson) {
        std::vector<double> times =
            schedule_emissions(cfg.emission_rate, cfg.duration, gate_rate, emission_rng);
        emission_gates.reserve(times.size());
        for (double t : times) {
            auto eg = static_cast<std::int64_t>(std::llround(t * gate_rate));
            if (emission_gates.empty() || emission_gates.back() != eg)
                emission_gates.push_back(eg);
            auto [it, inserted] = emission_bits.try_emplace(eg, bit_at_gate(eg));
            if (!inserted) it->second = -2;
        }
    }
    // Expected occupancy of a gate slot in random mode (>= 1 snapped arrival).
    const double occupancy =
        cfg.emission_mode == EmissionMode::PerGate
            ? 1.0
            : 1.0 - std::exp(-cfg.emission_rate * period);

    AttackCounters& ac = result.attack_counters;
    ac.duration = cfg.duration;

    auto sift_lookup = [&](std::int64_t gate) -> int {
        if (gate < 0 || gate >= total_gates) return -1;
        if (cfg.emission_mode == EmissionMode::PerGate) return bit_at_gate(gate);
        auto it = emission_bits.find(gate);
        return it == emission_bits.end() ? -1 : it->second;
    };

    auto bin_of_gate = [&](std::int64_t gate) {
        return std::min(static_cast<std::size_t>(gate / gates_per_bin), nbins - 1);
    };

    const double mu = cfg.link.mu;
    const bool per_gate = cfg.engine == Engine::PerGate;
    double mean_cos_sum = 0.0;

    std::size_t next_emission = 0; // cursor into emission_gates (sorted)
    std::int64_t g = 0;

    for (std::int64_t tick = 0; tick < n_ticks; ++tick) {
        double phi_q = loop.step(loop_dt);
        auto g_end = static_cast<std::int64_t>(
            std::llround((static_cast<double>(tick) + 1.0) * loop_dt * gate_rate));
        g_end = std::min(g_end, total_gates);
        if (tick + 1 == n_ticks) g_end = total_gates;
        mean_cos_sum += std::cos(phi_q);
        if (g < g_end) {
            BinAccum& ba = accum[bin_of_gate(g)];
            ba.sum_sq_phase += phi_q * phi_q;
            ++ba.phase_samples;
        }

        if (!per_gate) {
            // Expected per-gate click probabilities for this loop period,
            // split at bin boundaries.
            std::pair<double, double> probs[2] = {
                interfere(unit_state[0], phi_q, cfg.link.alignment_visibility[0]),
                interfere(unit_state[1], phi_q, cfg.link.alignment_visibility[1])};
            while (g < g_end) {
                std::size_t b = bin_of_gate(g);
                std::int64_t seg_end =
                    std::min(g_end, (static_cast<std::int64_t>(b) + 1) * gates_per_bin);
                int bit = bit_at_gate(g);
                double p0 = probs[bit].first;
                double sig0 = 1.0 - (1.0 - dets.d0.dark_prob) * std::exp(-mu * t_eff_d0 * p0);
                double sig1 =
                    1.0 - (1.0 - dets.d1.dark_prob) * std::exp(-mu * t_eff_d1 * (1.0 - p0));
                double w = static_cast<double>(seg_end - g);
                accum[b].expected_d0 +=
                    w * (occupancy * sig0 + (1.0 - occupancy) * dets.d0.dark_prob);
                accum[b].expected_d1 +=
                    w * (occupancy * sig1 + (1.0 - occupancy) * dets.d1.dark_prob);
                g = seg_end;
            }
            continue;
        }

        // Per-gate engine. Interference probabilities are constant across
        // the gates of one loop period; compute them once per state.
        std::pair<double, double> probs[2] = {
            interfere(unit_state[0], phi_q, cfg.link.alignment_visibility[0]),
            interfere(unit_state[1], phi_q, cfg.link.alignment_visibility[1])};

        for (; g < g_end; ++g) {
            double t_emit = static_cast<double>(g) * period;
            bool has_emission = cfg.emission_mode == EmissionMode::PerGate;
            if (!has_emission) {
                while (next_emission < emission_gates.size() &&
                       emission_gates[next_emission] < g)
                    ++next_emission;
                has_emission = next_emission < emission_gates.size() &&
                               emission_gates[next_emission] == g;
            }

            RecombineResult rr;
            EveKnowledge knowledge = EveKnowledge::None;
            if (has_emission) {
                ++ac.emissions;
                int bit = bit_at_gate(g);
                int n = mu > 0.0 ? photon_count(photon_rng) : 0;

                WavepacketPair pair = base_pair[bit];
                pair.t_channel_b = t_emit;
                pair.t_channel_a = t_emit + result.tau_delay;

                bool attacked = cfg.attack.kind != AttackKind::None &&
                                (cfg.attack.attack_fraction >= 1.0 ||
                                 uni(attack_rng) < cfg.attack.attack_fraction);
                if (attacked) {
                    ++ac.attacked_emissions;
                    AttackOutcome out =
                        cfg.attack.kind == AttackKind::InterceptFirst
                            ? apply_intercept_first(pair, cfg.attack, attack_rng)
                            : apply_store_both(pair, cfg.attack, result.tau_delay,
                                               attack_rng);
                    pair = out.pair;
                    knowledge = out.knowledge;
                    rr = bob_recombine(pair, n, phi_q, cfg.link.alignment_visibility[bit],
                                       dets, timing, result.coherence_time,
                                       result.tau_delay, dark_rng);
                } else {
                    rr = recombine_with_probs(pair, n, probs[bit], dets, timing,
                                              result.coherence_time, result.tau_delay,
                                              dark_rng);
                }
            } else {
                // Empty gate: dark/background counts only.
                bool d0 = uni(dark_rng) < dets.d0.dark_prob;
                bool d1 = uni(dark_rng) < dets.d1.dark_prob;
                if (d0 || d1) {
                    DetectionRecord rec;
                    rec.gate_index = g;
                    rec.t_click = t_emit + timing.transit;
                    rec.double_click = d0 && d1;
                    rec.detector = d0 ? Detector::D0 : Detector::D1;
                    rr.record = rec;
                }
            }

            if (!rr.record) continue;
            const DetectionRecord& rec = *rr.record;

            // Raw counts land in the bin of the detection gate.
            if (rec.gate_index >= 0 && rec.gate_index < total_gates) {
                std::size_t b = bin_of_gate(rec.gate_index);
                if (rec.double_click) {
                    ++result.bins[b].counts_d0;
                    ++result.bins[b].counts_d1;
                } else if (rec.detector == Detector::D0) {
                    ++result.bins[b].counts_d0;
                } else {
                    ++result.bins[b].counts_d1;
                }
            }

            if (rr.photon_caused && !rec.double_click) {
                ++ac.signal_clicks;
                if (knowledge == EveKnowledge::Full) ++ac.known_bit_clicks;
            }
            sift_click(rec, sift_lookup, result.key);
        }
    }

    if (!per_gate) {
        for (std::size_t i = 0; i < nbins; ++i) {
            std::poisson_distribution<std::int64_t> c0(std::max(accum[i].expected_d0, 0.0));
            std::poisson_distribution<std::int64_t> c1(std::max(accum[i].expected_d1, 0.0));
            result.bins[i].counts_d0 = accum[i].expected_d0 > 0.0 ? c0(count_rng) : 0;
            result.bins[i].counts_d1 = accum[i].expected_d1 > 0.0 ? c1(count_rng) : 0;
        }
        ac.emissions = cfg.emission_mode == EmissionMode::PerGate
                           ? total_gates
                           : static_cast<std::int64_t>(emission_gates.size());
    }

    // Finalize bins and run statistics.
    for (std::size_t i = 0; i < nbins; ++i) {
        if (accum[i].phase_samples > 0)
            result.bins[i].lock_residual_rms = std::sqrt(
                accum[i].sum_sq_phase / static_cast<double>(accum[i].phase_samples));
    }

    ac.alarm_timing = result.key.alarms.timing_violations;
    ac.alarm_double = result.key.alarms.double_clicks;
    ac.sifted_bits = static_cast<std::int64_t>(result.key.bits.size());
    ac.sifted_errors = static_cast<std::int64_t>(result.key.error_positions.size());

    result.stats = compute_run_stats(result.bins, dark_rate_d0, dark_rate_d1, cfg.bin_width);
    result.stats.mean_cos_phase =
        n_ticks > 0 ? mean_cos_sum / static_cast<double>(n_ticks) : 1.0;
    {
        std::vector<double> rms_trace;
        rms_trace.reserve(nbins);
        double slip = 0.0;
        for (std::size_t i = 0; i < nbins; ++i) {
            rms_trace.push_back(result.bins[i].lock_residual_rms);
            if (std::abs(result.bins[i].lock_residual_rms) > kPi / 2.0) slip += 1.0;
        }
        if (!rms_trace.empty())
            result.stats.lock_slip_fraction = slip / static_cast<double>(nbins);
    }
    result.stretcher_saturations = loop.saturations;
    result.controller_locked_at_end = loop.ctrl.locked;
    return result;
}

} // namespace gv95
