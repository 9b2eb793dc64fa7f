#ifndef GV95_SCENARIO_HPP
#define GV95_SCENARIO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "gv95/config.hpp"
#include "gv95/session.hpp"

namespace gv95 {

struct ScenarioOutcome {
    int exit_code = 0;                 // 0 iff the run and self-checks passed
    std::vector<std::string> files;    // paths written, in order
    SessionResult last_result;         // single runs; last point for sweeps
};

/// Execute a scenario (single session or sweep), write the output files
/// into out_dir (bins.csv, stats.txt, fig2.dat, fig2.gnuplot; sweep.csv for
/// sweeps) and print a one-screen summary unless quiet. Byte-identical
/// outputs for identical (config, seed).
ScenarioOutcome run_scenario(const ScenarioConfig& cfg,
                             const std::filesystem::path& out_dir, bool quiet);

/// Serializers, exposed for tests.
std::string format_bins_csv(const std::vector<BinRecord>& bins);
std::string format_stats(const ScenarioConfig& cfg, const SessionResult& res);

} // namespace gv95

#endif
