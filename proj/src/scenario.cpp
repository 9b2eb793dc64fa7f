#include "gv95/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>

#include "gv95/rng.hpp"

namespace gv95 {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string fmt(std::int64_t v) { return std::to_string(v); }

const char* attack_kind_name(AttackKind k) {
    switch (k) {
    case AttackKind::InterceptFirst: return "intercept_first";
    case AttackKind::StoreBoth: return "store_both";
    default: return "none";
    }
}

bool write_file(const std::filesystem::path& path, const std::string& content,
                std::vector<std::string>& files) {
    std::ofstream out(path, std::ios::binary);
    if (!out) return false;
    out << content;
    out.close();
    if (!out) return false;
    files.push_back(path.string());
    return true;
}

ScenarioConfig sweep_point(const ScenarioConfig& base, std::size_t index) {
    ScenarioConfig cfg = base;
    double v = base.sweep.values[index];
    if (base.sweep.param == SweepParam::TauLen)
        cfg.link.tau_len = v;
    else
        cfg.drift.sigma = v;
    cfg.sweep = SweepSpec{}; // each point is a plain session
    cfg.seed = stream_id(base.seed, "sweep-point", index);
    return cfg;
}

bool self_check(const ScenarioConfig& cfg, const SessionResult& res, std::string& why) {
    auto expect_bins = static_cast<std::size_t>(std::llround(cfg.duration / cfg.bin_width));
    if (res.bins.size() != expect_bins) {
        why = "bin count mismatch";
        return false;
    }
    std::int64_t total = 0;
    for (const BinRecord& b : res.bins) {
        if (b.counts_d0 < 0 || b.counts_d1 < 0) {
            why = "negative counts";
            return false;
        }
        total += b.counts_d0 + b.counts_d1;
    }
    if (cfg.engine == Engine::PerGate &&
        static_cast<std::int64_t>(res.key.bits.size()) > total) {
        why = "more sifted bits than detector counts";
        return false;
    }
    for (int s = 0; s < 2; ++s) {
        const StateStats& st = res.stats.per_state[s];
        if (st.counts_correct + st.counts_wrong == 0) continue;
        if (!(st.v_raw.value >= -1.0 && st.v_raw.value <= 1.0) ||
            !(st.qber_raw.value >= 0.0 && st.qber_raw.value <= 1.0)) {
            why = "estimator out of range";
            return false;
        }
    }
    if (!std::isfinite(res.stats.mean_cos_phase)) {
        why = "non-finite lock statistics";
        return false;
    }
    return true;
}

std::string format_gnuplot(const ScenarioConfig& cfg) {
    std::string s;
    s += "set title 'Raw photon counts per second at both detectors'\n";
    s += "set xlabel 'time [s]'\n";
    s += "set ylabel 'counts / s'\n";
    s += "set key top right\n";
    if (!cfg.toggle_epochs.empty()) {
        s += "set arrow from " + fmt(cfg.toggle_epochs.front()) +
             ",graph 0 to " + fmt(cfg.toggle_epochs.front()) +
             ",graph 1 nohead dashtype 2\n";
    }
    s += "plot 'fig2.dat' using 1:2 with points pt 7 ps 0.3 title 'D0', \\\n";
    s += "     'fig2.dat' using 1:3 with points pt 5 ps 0.3 title 'D1'\n";
    return s;
}

std::string format_fig2_dat(const std::vector<BinRecord>& bins) {
    std::string s = "# t_start_s counts_d0 counts_d1 sent_state\n";
    for (const BinRecord& b : bins) {
        s += fmt(b.t_start);
        s += ' ';
        s += fmt(b.counts_d0);
        s += ' ';
        s += fmt(b.counts_d1);
        s += ' ';
        s += std::to_string(b.sent_state);
        s += '\n';
    }
    return s;
}

std::string format_sweep_csv(const ScenarioConfig& cfg,
                             const std::vector<SessionResult>& points) {
    const char* pname =
        cfg.sweep.param == SweepParam::TauLen ? "tau_length_m" : "drift_sigma";
    std::string s = std::string("param,value,v_raw_psi0,v_raw_psi1,qber_dark_equalized,")
                    + "mean_cos_phase,lock_rms_rad,alarm_rate_hz,eve_info,sifted_bits,"
                    + "security_condition_ok\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        const SessionResult& r = points[i];
        AttackSummary a = attack_report(r.attack_counters);
        s += pname;
        s += ',';
        s += fmt(cfg.sweep.values[i]);
        s += ',';
        s += fmt(r.stats.per_state[0].v_raw.value);
        s += ',';
        s += fmt(r.stats.per_state[1].v_raw.value);
        s += ',';
        s += fmt(r.stats.qber_dark_equalized.value);
        s += ',';
        s += fmt(r.stats.mean_cos_phase);
        s += ',';
        s += fmt(r.stats.lock_rms);
        s += ',';
        s += fmt(a.alarm_rate.value);
        s += ',';
        s += fmt(a.eve_info.value);
        s += ',';
        s += fmt(static_cast<std::int64_t>(r.key.bits.size()));
        s += ',';
        s += r.security_condition_ok ? "1" : "0";
        s += '\n';
    }
    return s;
}

void print_summary(const ScenarioConfig& cfg, const SessionResult& res) {
    const RunStats& st = res.stats;
    std::printf("scenario %s  engine %s  seed %llu\n", cfg.scenario.c_str(),
                cfg.engine == Engine::PerGate ? "per_gate" : "binned_rate",
                static_cast<unsigned long long>(cfg.seed));
    std::printf("  %lld bins of %gs  security condition: %s  multi-photon fraction %.4f\n",
                static_cast<long long>(st.total_bins), cfg.bin_width,
                res.security_condition_ok ? "satisfied" : "VIOLATED",
                res.multi_photon_fraction);
    for (int s = 0; s < 2; ++s) {
        const StateStats& ps = st.per_state[s];
        if (ps.counts_correct + ps.counts_wrong == 0) continue;
        std::printf("  state %d: V_raw %.4f+-%.4f  V_net %.4f+-%.4f  QBER %.4f+-%.4f\n",
                    s, ps.v_raw.value, ps.v_raw.sigma, ps.v_net.value, ps.v_net.sigma,
                    ps.qber_raw.value, ps.qber_raw.sigma);
    }
    std::printf("  dark-equalized QBER %.4f+-%.4f\n", st.qber_dark_equalized.value,
                st.qber_dark_equalized.sigma);
    std::printf("  lock: mean cos %.5f  rms %.4f rad  saturations %lld\n",
                st.mean_cos_phase, st.lock_rms,
                static_cast<long long>(res.stretcher_saturations));
    std::printf("  sifted bits %zu  errors %zu  alarms: timing %lld double %lld\n",
                res.key.bits.size(), res.key.error_positions.size(),
                static_cast<long long>(res.key.alarms.timing_violations),
                static_cast<long long>(res.key.alarms.double_clicks));
    if (cfg.attack.kind != AttackKind::None) {
        AttackSummary a = attack_report(res.attack_counters);
        std::printf("  attack %s f=%.2f: eve_info %.4f+-%.4f  alarm rate %.2f+-%.2f /s\n",
                    attack_kind_name(cfg.attack.kind), cfg.attack.attack_fraction,
                    a.eve_info.value, a.eve_info.sigma, a.alarm_rate.value,
                    a.alarm_rate.sigma);
    }
}

} // namespace

std::string format_bins_csv(const std::vector<BinRecord>& bins) {
    std::string s = "t_start_s,counts_d0,counts_d1,sent_state,lock_residual_rms_rad\n";
    for (const BinRecord& b : bins) {
        s += fmt(b.t_start);
        s += ',';
        s += fmt(b.counts_d0);
        s += ',';
        s += fmt(b.counts_d1);
        s += ',';
        s += std::to_string(b.sent_state);
        s += ',';
        s += fmt(b.lock_residual_rms);
        s += '\n';
    }
    return s;
}

std::string format_stats(const ScenarioConfig& cfg, const SessionResult& res) {
    const RunStats& st = res.stats;
    std::string s;
    auto kv = [&s](const std::string& k, const std::string& v) {
        s += k;
        s += ": ";
        s += v;
        s += '\n';
    };
    kv("scenario", cfg.scenario);
    kv("engine", cfg.engine == Engine::PerGate ? "per_gate" : "binned_rate");
    kv("seed", std::to_string(cfg.seed));
    kv("duration_s", fmt(cfg.duration));
    kv("bin_width_s", fmt(cfg.bin_width));
    kv("bins", fmt(st.total_bins));
    kv("security_condition_ok", res.security_condition_ok ? "1" : "0");
    kv("tau_delay_s", fmt(res.tau_delay));
    kv("coherence_time_s", fmt(res.coherence_time));
    kv("multi_photon_fraction", fmt(res.multi_photon_fraction));
    kv("mean_cos_phase", fmt(st.mean_cos_phase));
    kv("lock_rms_rad", fmt(st.lock_rms));
    kv("stretcher_saturations", fmt(res.stretcher_saturations));
    for (int i = 0; i < 2; ++i) {
        const StateStats& ps = st.per_state[i];
        std::string p = "psi" + std::to_string(i) + ".";
        kv(p + "counts_correct", fmt(ps.counts_correct));
        kv(p + "counts_wrong", fmt(ps.counts_wrong));
        kv(p + "duration_s", fmt(ps.duration));
        kv(p + "v_raw", fmt(ps.v_raw.value));
        kv(p + "v_raw_sigma", fmt(ps.v_raw.sigma));
        kv(p + "v_raw_bin_scatter", fmt(ps.v_raw_bin_scatter));
        kv(p + "v_net", fmt(ps.v_net.value));
        kv(p + "v_net_sigma", fmt(ps.v_net.sigma));
        kv(p + "qber_raw", fmt(ps.qber_raw.value));
        kv(p + "qber_raw_sigma", fmt(ps.qber_raw.sigma));
        kv(p + "net_clamped", ps.net_clamped ? "1" : "0");
    }
    kv("qber_dark_equalized", fmt(st.qber_dark_equalized.value));
    kv("qber_dark_equalized_sigma", fmt(st.qber_dark_equalized.sigma));
    kv("dark_rate_d0_hz", fmt(st.dark_rate_d0));
    kv("dark_rate_d1_hz", fmt(st.dark_rate_d1));
    kv("sifted_bits", fmt(static_cast<std::int64_t>(res.key.bits.size())));
    kv("sifted_errors", fmt(static_cast<std::int64_t>(res.key.error_positions.size())));
    kv("alarms.timing_violations", fmt(res.key.alarms.timing_violations));
    kv("alarms.double_clicks", fmt(res.key.alarms.double_clicks));
    kv("attack.kind", attack_kind_name(cfg.attack.kind));
    if (cfg.attack.kind != AttackKind::None) {
        AttackSummary a = attack_report(res.attack_counters);
        kv("attack.fraction", fmt(cfg.attack.attack_fraction));
        kv("attack.attacked_emissions", fmt(res.attack_counters.attacked_emissions));
        kv("attack.eve_info", fmt(a.eve_info.value));
        kv("attack.eve_info_sigma", fmt(a.eve_info.sigma));
        kv("attack.induced_qber", fmt(a.induced_qber.value));
        kv("attack.induced_qber_sigma", fmt(a.induced_qber.sigma));
        kv("attack.alarm_rate_hz", fmt(a.alarm_rate.value));
        kv("attack.alarm_rate_hz_sigma", fmt(a.alarm_rate.sigma));
    }
    return s;
}

ScenarioOutcome run_scenario(const ScenarioConfig& cfg,
                             const std::filesystem::path& out_dir, bool quiet) {
    ScenarioOutcome outcome;

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        std::fprintf(stderr, "error: cannot create output directory %s: %s\n",
                     out_dir.string().c_str(), ec.message().c_str());
        outcome.exit_code = 2;
        return outcome;
    }

    if (cfg.sweep.param != SweepParam::None) {
        std::size_t n = cfg.sweep.values.size();
        std::vector<std::future<SessionResult>> futures;
        futures.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            futures.push_back(std::async(std::launch::async, [&cfg, i] {
                return run_session(sweep_point(cfg, i));
            }));
        }
        std::vector<SessionResult> points;
        points.reserve(n);
        for (auto& f : futures) points.push_back(f.get());

        if (!write_file(out_dir / "sweep.csv", format_sweep_csv(cfg, points),
                        outcome.files)) {
            outcome.exit_code = 2;
            return outcome;
        }
        // stats.txt describes the last point so the schema stays uniform.
        ScenarioConfig last = sweep_point(cfg, n - 1);
        if (!write_file(out_dir / "stats.txt", format_stats(last, points.back()),
                        outcome.files)) {
            outcome.exit_code = 2;
            return outcome;
        }
        if (!quiet) {
            std::printf("sweep %s: %zu points written to %s\n", cfg.scenario.c_str(), n,
                        (out_dir / "sweep.csv").string().c_str());
            print_summary(last, points.back());
        }
        for (std::size_t i = 0; i < n; ++i) {
            std::string why;
            if (!self_check(sweep_point(cfg, i), points[i], why)) {
                std::fprintf(stderr, "self-check failed at sweep point %zu: %s\n", i,
                             why.c_str());
                outcome.exit_code = 1;
            }
        }
        outcome.last_result = std::move(points.back());
        return outcome;
    }

    SessionResult res = run_session(cfg);

    if (!write_file(out_dir / "bins.csv", format_bins_csv(res.bins), outcome.files) ||
        !write_file(out_dir / "stats.txt", format_stats(cfg, res), outcome.files) ||
        !write_file(out_dir / "fig2.dat", format_fig2_dat(res.bins), outcome.files) ||
        !write_file(out_dir / "fig2.gnuplot", format_gnuplot(cfg), outcome.files)) {
        outcome.exit_code = 2;
        return outcome;
    }

    if (!quiet) print_summary(cfg, res);

    std::string why;
    if (!self_check(cfg, res, why)) {
        std::fprintf(stderr, "self-check failed: %s\n", why.c_str());
        outcome.exit_code = 1;
    }
    outcome.last_result = std::move(res);
    return outcome;
}

} // namespace gv95
