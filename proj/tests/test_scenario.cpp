#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gv95/config.hpp"
#include "gv95/scenario.hpp"

using namespace gv95;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("gv95sim-test-" + tag);
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

ScenarioConfig short_run(std::uint64_t seed) {
    ScenarioConfig cfg = make_default_config();
    cfg.scenario = "short";
    cfg.duration = 5.0;
    cfg.toggle_epochs = {2.0};
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("bins.csv carries the stable schema") {
    ScenarioConfig cfg = short_run(404);
    TempDir dir("csv");
    ScenarioOutcome out = run_scenario(cfg, dir.path, true);
    CHECK(out.exit_code == 0);

    std::string csv = slurp(dir.path / "bins.csv");
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "t_start_s,counts_d0,counts_d1,sent_state,lock_residual_rms_rad");
    int rows = 0;
    std::string row;
    while (std::getline(lines, row))
        if (!row.empty()) ++rows;
    CHECK(rows == 5);
    CHECK(csv.back() == '\n');
}

TEST_CASE("identical config and seed produce byte-identical outputs") {
    ScenarioConfig cfg = short_run(777);
    TempDir a("det-a"), b("det-b");
    CHECK(run_scenario(cfg, a.path, true).exit_code == 0);
    CHECK(run_scenario(cfg, b.path, true).exit_code == 0);
    CHECK(slurp(a.path / "bins.csv") == slurp(b.path / "bins.csv"));
    CHECK(slurp(a.path / "stats.txt") == slurp(b.path / "stats.txt"));
    CHECK(slurp(a.path / "fig2.dat") == slurp(b.path / "fig2.dat"));

    // A different seed must change the data.
    ScenarioConfig other = short_run(778);
    TempDir c("det-c");
    CHECK(run_scenario(other, c.path, true).exit_code == 0);
    CHECK(slurp(a.path / "bins.csv") != slurp(c.path / "bins.csv"));
}

TEST_CASE("single runs write the full file set") {
    ScenarioConfig cfg = short_run(11);
    TempDir dir("files");
    ScenarioOutcome out = run_scenario(cfg, dir.path, true);
    CHECK(out.exit_code == 0);
    CHECK(fs::exists(dir.path / "bins.csv"));
    CHECK(fs::exists(dir.path / "stats.txt"));
    CHECK(fs::exists(dir.path / "fig2.dat"));
    CHECK(fs::exists(dir.path / "fig2.gnuplot"));
    CHECK(out.files.size() == 4);

    std::string stats = slurp(dir.path / "stats.txt");
    CHECK(stats.find("scenario: short") != std::string::npos);
    CHECK(stats.find("security_condition_ok: 1") != std::string::npos);
    CHECK(stats.find("psi0.v_raw:") != std::string::npos);
    CHECK(stats.find("qber_dark_equalized:") != std::string::npos);
}

TEST_CASE("sweeps write sweep.csv with one row per point") {
    ScenarioConfig cfg = make_default_config();
    cfg.scenario = "mini-sweep";
    cfg.duration = 5.0;
    cfg.engine = Engine::BinnedRate;
    cfg.seed = 12;
    cfg.sweep.param = SweepParam::DriftSigma;
    cfg.sweep.values = {0.0, 0.1, 0.3};

    TempDir dir("sweep");
    ScenarioOutcome out = run_scenario(cfg, dir.path, true);
    CHECK(out.exit_code == 0);
    std::string csv = slurp(dir.path / "sweep.csv");
    int lines = 0;
    for (char ch : csv)
        if (ch == '\n') ++lines;
    CHECK(lines == 4); // header + 3 points
    CHECK(csv.rfind("param,value,", 0) == 0);
    CHECK(fs::exists(dir.path / "stats.txt"));
}

TEST_CASE("the attack presets run and report") {
    ScenarioConfig cfg = parse_config(find_scenario("attack-store-both").config_text);
    cfg.duration = 5.0;
    cfg.toggle_epochs = {2.0};
    TempDir dir("attack");
    ScenarioOutcome out = run_scenario(cfg, dir.path, true);
    CHECK(out.exit_code == 0);
    std::string stats = slurp(dir.path / "stats.txt");
    CHECK(stats.find("attack.kind: store_both") != std::string::npos);
    CHECK(stats.find("attack.eve_info: 1") != std::string::npos);
}
