#include "gv95/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "gv95/analysis.hpp"

namespace gv95 {

namespace {

// Published performance figures the efficiency calibration is anchored to.
constexpr double kRawVis[2] = {0.902, 0.962};
constexpr double kNetVis[2] = {0.978, 0.989};

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

struct Parser {
    std::vector<std::string> errors;

    bool parse_double(const std::string& v, int line, double& out) {
        char* end = nullptr;
        out = std::strtod(v.c_str(), &end);
        if (end == v.c_str() || *end != '\0') {
            errors.push_back("line " + std::to_string(line) + ": expected a number, got '" + v + "'");
            return false;
        }
        return true;
    }
    bool parse_int(const std::string& v, int line, long long& out) {
        char* end = nullptr;
        out = std::strtoll(v.c_str(), &end, 10);
        if (end == v.c_str() || *end != '\0') {
            errors.push_back("line " + std::to_string(line) + ": expected an integer, got '" + v + "'");
            return false;
        }
        return true;
    }
    bool parse_u64(const std::string& v, int line, std::uint64_t& out) {
        char* end = nullptr;
        out = std::strtoull(v.c_str(), &end, 10);
        if (end == v.c_str() || *end != '\0') {
            errors.push_back("line " + std::to_string(line) + ": expected an unsigned integer, got '" + v + "'");
            return false;
        }
        return true;
    }
    bool parse_bool(const std::string& v, int line, bool& out) {
        std::string l = lower(v);
        if (l == "true" || l == "1" || l == "yes") { out = true; return true; }
        if (l == "false" || l == "0" || l == "no") { out = false; return true; }
        errors.push_back("line " + std::to_string(line) + ": expected true/false, got '" + v + "'");
        return false;
    }
    bool parse_list(const std::string& v, int line, std::vector<double>& out) {
        out.clear();
        if (trim(v).empty()) return true;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            double d;
            if (!parse_double(trim(item), line, d)) return false;
            out.push_back(d);
        }
        return true;
    }
};

} // namespace

double calibrated_default_efficiency() {
    const double gate_rate = 500e3;
    const double mu = 0.1;
    const double dark_rate0 = gate_rate * 1.4e-5;   // 7.0 /s
    const double dark_rate1 = gate_rate * 3.87e-5;  // 19.35 /s

    // Per-state signal rates recovered from the raw/net visibility pairs;
    // state 0 reads at D0, state 1 at D1.
    CalibratedRates s0 = calibrate_rates(kRawVis[0], kNetVis[0], dark_rate0, dark_rate1);
    CalibratedRates s1 = calibrate_rates(kRawVis[1], kNetVis[1], dark_rate1, dark_rate0);
    double target_rate = 0.5 * (s0.total() + s1.total());

    // Per-gate no-dark click probability 1 - exp(-mu*T) must equal
    // target_rate / gate_rate; split T into the modeled source losses and
    // the calibrated remainder.
    double t_total = -std::log(1.0 - target_rate / gate_rate) / mu;
    LinkParams link;
    double source_norm2 = attenuate(1.0, link.dwdm_loss_db) *
                          (0.5 + 0.5 * attenuate(1.0, link.delay_line_loss_db));
    return t_total / source_norm2;
}

ScenarioConfig make_default_config() {
    ScenarioConfig cfg;
    double eff = calibrated_default_efficiency();
    cfg.det_d0 = DetectorParams{500e3, 2.5e-9, 1.4e-5, eff};
    cfg.det_d1 = DetectorParams{500e3, 2.5e-9, 3.87e-5, eff};
    return cfg;
}

ConfigError::ConfigError(std::vector<std::string> msgs)
    : std::runtime_error(msgs.empty() ? "invalid configuration"
                                      : "invalid configuration: " + msgs.front() +
                                            (msgs.size() > 1 ? " (+" + std::to_string(msgs.size() - 1) + " more)"
                                                             : "")),
      messages(std::move(msgs)) {}

ScenarioConfig parse_config(const std::string& text) {
    ScenarioConfig cfg = make_default_config();
    Parser p;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line = 0;

    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        auto hash = s.find('#');
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;

        if (s.front() == '[') {
            if (s.back() != ']') {
                p.errors.push_back("line " + std::to_string(line) + ": unterminated section header");
                continue;
            }
            section = lower(trim(s.substr(1, s.size() - 2)));
            if (section != "session" && section != "link" && section != "detectors" &&
                section != "drift" && section != "controller" && section != "attack" &&
                section != "background" && section != "sweep") {
                p.errors.push_back("line " + std::to_string(line) + ": unknown section [" + section + "]");
                section = "!bad";
            }
            continue;
        }

        auto eq = s.find('=');
        if (eq == std::string::npos) {
            p.errors.push_back("line " + std::to_string(line) + ": expected key = value");
            continue;
        }
        std::string key = lower(trim(s.substr(0, eq)));
        std::string val = trim(s.substr(eq + 1));
        if (section.empty()) {
            p.errors.push_back("line " + std::to_string(line) + ": key '" + key + "' outside any section");
            continue;
        }
        if (section == "!bad") continue;

        double d;
        long long i;
        bool b;
        std::uint64_t u;
        bool known = true;

        if (section == "session") {
            if (key == "scenario") cfg.scenario = val;
            else if (key == "duration_s") { if (p.parse_double(val, line, d)) cfg.duration = d; }
            else if (key == "bin_width_s") { if (p.parse_double(val, line, d)) cfg.bin_width = d; }
            else if (key == "initial_bit") { if (p.parse_int(val, line, i)) cfg.initial_bit = static_cast<int>(i); }
            else if (key == "toggle_epochs_s") p.parse_list(val, line, cfg.toggle_epochs);
            else if (key == "emission_mode") {
                std::string m = lower(val);
                if (m == "per_gate") cfg.emission_mode = EmissionMode::PerGate;
                else if (m == "random") cfg.emission_mode = EmissionMode::RandomPoisson;
                else p.errors.push_back("line " + std::to_string(line) + ": emission_mode must be per_gate or random");
            }
            else if (key == "emission_rate_hz") { if (p.parse_double(val, line, d)) cfg.emission_rate = d; }
            else if (key == "emission_jitter_s") { if (p.parse_double(val, line, d)) cfg.emission_jitter = d; }
            else if (key == "engine") {
                std::string m = lower(val);
                if (m == "per_gate") cfg.engine = Engine::PerGate;
                else if (m == "binned_rate") cfg.engine = Engine::BinnedRate;
                else p.errors.push_back("line " + std::to_string(line) + ": engine must be per_gate or binned_rate");
            }
            else if (key == "seed") { if (p.parse_u64(val, line, u)) cfg.seed = u; }
            else known = false;
        } else if (section == "link") {
            if (key == "lambda_q_nm") { if (p.parse_double(val, line, d)) cfg.link.lambda_q = d * 1e-9; }
            else if (key == "lambda_ph_nm") { if (p.parse_double(val, line, d)) cfg.link.lambda_ph = d * 1e-9; }
            else if (key == "coherence_length_q_m") { if (p.parse_double(val, line, d)) cfg.link.coh_len_q = d; }
            else if (key == "coherence_length_ph_min_m") { if (p.parse_double(val, line, d)) cfg.link.coh_len_ph_min = d; }
            else if (key == "mu") { if (p.parse_double(val, line, d)) cfg.link.mu = d; }
            else if (key == "group_index") { if (p.parse_double(val, line, d)) cfg.link.group_index = d; }
            else if (key == "tau_length_m") { if (p.parse_double(val, line, d)) cfg.link.tau_len = d; }
            else if (key == "fiber_length_m") { if (p.parse_double(val, line, d)) cfg.link.fiber_len = d; }
            else if (key == "dwdm_loss_db") { if (p.parse_double(val, line, d)) cfg.link.dwdm_loss_db = d; }
            else if (key == "delay_line_loss_db") { if (p.parse_double(val, line, d)) cfg.link.delay_line_loss_db = d; }
            else if (key == "alignment_visibility_psi0") { if (p.parse_double(val, line, d)) cfg.link.alignment_visibility[0] = d; }
            else if (key == "alignment_visibility_psi1") { if (p.parse_double(val, line, d)) cfg.link.alignment_visibility[1] = d; }
            else known = false;
        } else if (section == "detectors") {
            if (key == "gate_rate_hz") { if (p.parse_double(val, line, d)) { cfg.det_d0.gate_rate = d; cfg.det_d1.gate_rate = d; } }
            else if (key == "gate_width_s") { if (p.parse_double(val, line, d)) { cfg.det_d0.gate_width = d; cfg.det_d1.gate_width = d; } }
            else if (key == "dark_prob_d0") { if (p.parse_double(val, line, d)) cfg.det_d0.dark_prob = d; }
            else if (key == "dark_prob_d1") { if (p.parse_double(val, line, d)) cfg.det_d1.dark_prob = d; }
            else if (key == "efficiency_d0") { if (p.parse_double(val, line, d)) cfg.det_d0.efficiency = d; }
            else if (key == "efficiency_d1") { if (p.parse_double(val, line, d)) cfg.det_d1.efficiency = d; }
            else known = false;
        } else if (section == "drift") {
            if (key == "sigma_rad_per_sqrt_s") { if (p.parse_double(val, line, d)) cfg.drift.sigma = d; }
            else if (key == "ramp_rad_per_s") { if (p.parse_double(val, line, d)) cfg.drift.ramp = d; }
            else known = false;
        } else if (section == "controller") {
            if (key == "enabled") { if (p.parse_bool(val, line, b)) cfg.controller.enabled = b; }
            else if (key == "loop_rate_hz") { if (p.parse_double(val, line, d)) cfg.controller.loop_rate = d; }
            else if (key == "dither_rad") { if (p.parse_double(val, line, d)) cfg.controller.dither_step = d; }
            else if (key == "setpoint") {
                std::string m = lower(val);
                if (m == "minimize") cfg.controller.setpoint = LockSetpoint::Minimize;
                else if (m == "maximize") cfg.controller.setpoint = LockSetpoint::Maximize;
                else p.errors.push_back("line " + std::to_string(line) + ": setpoint must be minimize or maximize");
            }
            else if (key == "pd_power_w") { if (p.parse_double(val, line, d)) cfg.controller.pd_power = d; }
            else if (key == "pd_noise_rel") { if (p.parse_double(val, line, d)) cfg.controller.pd_noise_rel = d; }
            else if (key == "pd_avg_samples") { if (p.parse_int(val, line, i)) cfg.controller.pd_avg_samples = static_cast<int>(i); }
            else if (key == "classical_visibility") { if (p.parse_double(val, line, d)) cfg.controller.v_classical = d; }
            else if (key == "lock_threshold_rad") { if (p.parse_double(val, line, d)) cfg.controller.lock_threshold = d; }
            else if (key == "stretcher_range_rad") { if (p.parse_double(val, line, d)) cfg.controller.stretcher_range = d; }
            else if (key == "interwavelength_offset_rad") { if (p.parse_double(val, line, d)) cfg.controller.interwavelength_offset = d; }
            else if (key == "initial_phase_error_rad") { if (p.parse_double(val, line, d)) cfg.controller.initial_phase_error = d; }
            else known = false;
        } else if (section == "attack") {
            if (key == "kind") {
                std::string m = lower(val);
                if (m == "none") cfg.attack.kind = AttackKind::None;
                else if (m == "intercept_first") cfg.attack.kind = AttackKind::InterceptFirst;
                else if (m == "store_both") cfg.attack.kind = AttackKind::StoreBoth;
                else p.errors.push_back("line " + std::to_string(line) + ": attack kind must be none, intercept_first or store_both");
            }
            else if (key == "fraction") { if (p.parse_double(val, line, d)) cfg.attack.attack_fraction = d; }
            else if (key == "storage_delay_s") { if (p.parse_double(val, line, d)) cfg.attack.storage_delay = d; }
            else if (key == "resend") {
                std::string m = lower(val);
                if (m == "localized_b") cfg.attack.resend = ResendStrategy::LocalizedB;
                else if (m == "localized_a") cfg.attack.resend = ResendStrategy::LocalizedA;
                else if (m == "random_guess_state") cfg.attack.resend = ResendStrategy::RandomGuessState;
                else p.errors.push_back("line " + std::to_string(line) + ": resend must be localized_b, localized_a or random_guess_state");
            }
            else if (key == "destroy_and_regenerate") { if (p.parse_bool(val, line, b)) cfg.attack.destroy_and_regenerate = b; }
            else known = false;
        } else if (section == "background") {
            if (key == "residual_rate_hz") { if (p.parse_double(val, line, d)) cfg.background_rate = d; }
            else known = false;
        } else if (section == "sweep") {
            if (key == "parameter") {
                std::string m = lower(val);
                if (m == "tau_length_m") cfg.sweep.param = SweepParam::TauLen;
                else if (m == "drift_sigma") cfg.sweep.param = SweepParam::DriftSigma;
                else p.errors.push_back("line " + std::to_string(line) + ": sweep parameter must be tau_length_m or drift_sigma");
            }
            else if (key == "values") p.parse_list(val, line, cfg.sweep.values);
            else known = false;
        }

        if (!known)
            p.errors.push_back("line " + std::to_string(line) + ": unknown key '" + key +
                               "' in section [" + section + "]");
    }

    for (const std::string& e : validate(cfg)) p.errors.push_back(e);
    if (!p.errors.empty()) throw ConfigError(std::move(p.errors));
    return cfg;
}

std::vector<std::string> validate(const ScenarioConfig& cfg) {
    std::vector<std::string> errs;
    auto req = [&errs](bool ok, const std::string& msg) {
        if (!ok) errs.push_back(msg);
    };

    req(cfg.duration > 0.0, "session.duration_s: must be > 0");
    req(cfg.bin_width > 0.0, "session.bin_width_s: must be > 0");
    if (cfg.duration > 0.0 && cfg.bin_width > 0.0) {
        double nbins = cfg.duration / cfg.bin_width;
        req(std::abs(nbins - std::round(nbins)) < 1e-9,
            "session.duration_s: must be a whole number of bins");
    }
    req(cfg.initial_bit == 0 || cfg.initial_bit == 1, "session.initial_bit: must be 0 or 1");
    double prev = 0.0;
    for (std::size_t i = 0; i < cfg.toggle_epochs.size(); ++i) {
        double e = cfg.toggle_epochs[i];
        req(e > prev || (i == 0 && e > 0.0),
            "session.toggle_epochs_s: epochs must be strictly increasing and > 0");
        req(e < cfg.duration, "session.toggle_epochs_s: epoch " + std::to_string(e) +
                                  " is not < duration");
        if (cfg.bin_width > 0.0) {
            double r = e / cfg.bin_width;
            req(std::abs(r - std::round(r)) < 1e-9,
                "session.toggle_epochs_s: epoch " + std::to_string(e) +
                    " is not aligned to bin boundaries");
        }
        prev = e;
    }
    req(cfg.emission_mode == EmissionMode::PerGate || cfg.emission_rate > 0.0,
        "session.emission_rate_hz: must be > 0 in random mode");
    req(cfg.emission_jitter >= 0.0, "session.emission_jitter_s: must be >= 0");

    const LinkParams& l = cfg.link;
    req(l.lambda_q > 0.0, "link.lambda_q_nm: must be > 0");
    req(l.lambda_ph > 0.0, "link.lambda_ph_nm: must be > 0");
    req(l.coh_len_q > 0.0, "link.coherence_length_q_m: must be > 0");
    req(l.coh_len_ph_min > 0.0, "link.coherence_length_ph_min_m: must be > 0");
    req(l.mu >= 0.0, "link.mu: must be >= 0");
    req(l.group_index > 0.0, "link.group_index: must be > 0");
    req(l.tau_len > 0.0, "link.tau_length_m: must be > 0");
    req(l.fiber_len > 0.0, "link.fiber_length_m: must be > 0");
    req(l.dwdm_loss_db >= 0.0, "link.dwdm_loss_db: must be >= 0");
    req(l.delay_line_loss_db >= 0.0, "link.delay_line_loss_db: must be >= 0");
    for (int s = 0; s < 2; ++s)
        req(l.alignment_visibility[s] >= 0.0 && l.alignment_visibility[s] <= 1.0,
            "link.alignment_visibility_psi" + std::to_string(s) + ": must be in [0,1]");

    auto check_det = [&](const DetectorParams& det, const std::string& name) {
        req(det.gate_rate > 0.0, "detectors.gate_rate_hz: must be > 0");
        req(det.gate_width > 0.0, "detectors.gate_width_s: must be > 0");
        req(det.gate_rate * det.gate_width < 1.0,
            "detectors: gate_rate_hz * gate_width_s must be < 1 (non-overlapping gates)");
        req(det.dark_prob >= 0.0 && det.dark_prob <= 1.0,
            "detectors.dark_prob_" + name + ": must be in [0,1]");
        req(det.efficiency >= 0.0 && det.efficiency <= 1.0,
            "detectors.efficiency_" + name + ": must be in [0,1]");
    };
    check_det(cfg.det_d0, "d0");
    check_det(cfg.det_d1, "d1");

    req(cfg.drift.sigma >= 0.0, "drift.sigma_rad_per_sqrt_s: must be >= 0");

    const ControllerConfig& c = cfg.controller;
    req(c.loop_rate > 0.0, "controller.loop_rate_hz: must be > 0");
    req(c.dither_step > 0.0, "controller.dither_rad: must be > 0");
    req(c.pd_power > 0.0, "controller.pd_power_w: must be > 0");
    req(c.pd_noise_rel >= 0.0, "controller.pd_noise_rel: must be >= 0");
    req(c.pd_avg_samples >= 1, "controller.pd_avg_samples: must be >= 1");
    req(c.v_classical >= 0.0 && c.v_classical <= 1.0,
        "controller.classical_visibility: must be in [0,1]");
    req(c.lock_threshold > 0.0, "controller.lock_threshold_rad: must be > 0");
    req(c.stretcher_range >= kPi,
        "controller.stretcher_range_rad: must be >= pi so the 2*pi rewind can restore headroom");

    req(cfg.background_rate >= 0.0, "background.residual_rate_hz: must be >= 0");
    req(cfg.background_rate <= cfg.det_d0.gate_rate,
        "background.residual_rate_hz: must not exceed the gate rate");

    const AttackConfig& a = cfg.attack;
    req(a.attack_fraction >= 0.0 && a.attack_fraction <= 1.0,
        "attack.fraction: must be in [0,1]");
    if (a.kind == AttackKind::StoreBoth && a.storage_delay >= 0.0) {
        double tau = fiber_delay(l.tau_len, l.group_index);
        req(a.storage_delay + 1e-15 >= tau,
            "attack.storage_delay_s: must be >= the wavepacket separation tau");
    }
    req(a.kind == AttackKind::None || cfg.engine == Engine::PerGate,
        "session.engine: attacks require the per_gate engine");

    if (cfg.sweep.param != SweepParam::None) {
        req(!cfg.sweep.values.empty(), "sweep.values: must be non-empty");
        for (double v : cfg.sweep.values) {
            if (cfg.sweep.param == SweepParam::TauLen)
                req(v > 0.0, "sweep.values: tau lengths must be > 0");
            else
                req(v >= 0.0, "sweep.values: drift sigmas must be >= 0");
        }
    }
    return errs;
}

namespace {

const std::vector<ScenarioPreset>& presets() {
    static const std::vector<ScenarioPreset> table = {
        {"paper-fig2",
         "840 s run with the switch flicked every 140 s, per-gate engine, "
         "published link parameters",
         "[session]\n"
         "scenario = paper-fig2\n"
         "duration_s = 840\n"
         "bin_width_s = 1\n"
         "initial_bit = 1\n"
         "toggle_epochs_s = 140, 280, 420, 560, 700\n"
         "engine = per_gate\n"
         "seed = 20110331\n"},
        {"unlocked-drift",
         "stabilisation disabled under strong drift; the fringe washes out "
         "and visibility decays toward zero",
         "[session]\n"
         "scenario = unlocked-drift\n"
         "duration_s = 840\n"
         "bin_width_s = 1\n"
         "engine = binned_rate\n"
         "seed = 424242\n"
         "[controller]\n"
         "enabled = false\n"
         "[drift]\n"
         "sigma_rad_per_sqrt_s = 2.0\n"},
        {"attack-intercept",
         "intercept of the leading wavepacket on a quarter of the pulses; "
         "Eve gains nothing, Bob's error rate jumps",
         "[session]\n"
         "scenario = attack-intercept\n"
         "duration_s = 60\n"
         "bin_width_s = 1\n"
         "toggle_epochs_s = 30\n"
         "engine = per_gate\n"
         "seed = 1337\n"
         "[attack]\n"
         "kind = intercept_first\n"
         "fraction = 0.25\n"},
        {"attack-store-both",
         "Eve stores both wavepackets, reads the bit, and forwards late; "
         "every attacked click lands outside its gate",
         "[session]\n"
         "scenario = attack-store-both\n"
         "duration_s = 60\n"
         "bin_width_s = 1\n"
         "toggle_epochs_s = 30\n"
         "engine = per_gate\n"
         "seed = 1338\n"
         "[attack]\n"
         "kind = store_both\n"
         "fraction = 1.0\n"},
        {"security-sweep",
         "store-both attack swept over the wavepacket separation tau; the "
         "alarm rate collapses once tau shrinks below the gate width",
         "[session]\n"
         "scenario = security-sweep\n"
         "duration_s = 30\n"
         "bin_width_s = 1\n"
         "engine = per_gate\n"
         "seed = 2024\n"
         "[attack]\n"
         "kind = store_both\n"
         "fraction = 1.0\n"
         "[sweep]\n"
         "parameter = tau_length_m\n"
         "values = 40, 10, 2, 0.5, 0.4, 0.1\n"},
        {"drift-envelope",
         "controller headroom sweep over the drift strength; reports the "
         "mean fringe factor per point",
         "[session]\n"
         "scenario = drift-envelope\n"
         "duration_s = 120\n"
         "bin_width_s = 1\n"
         "engine = binned_rate\n"
         "seed = 555\n"
         "[sweep]\n"
         "parameter = drift_sigma\n"
         "values = 0, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0\n"},
    };
    return table;
}

} // namespace

const std::vector<ScenarioPreset>& list_scenarios() { return presets(); }

const ScenarioPreset& find_scenario(const std::string& name) {
    for (const ScenarioPreset& p : presets())
        if (p.name == name) return p;
    throw std::out_of_range("unknown scenario '" + name + "'");
}

} // namespace gv95
