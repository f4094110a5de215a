#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "llrf/commands.hpp"
#include "llrf/report.hpp"

using namespace llrf;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s) {
        if (c == '\n') ++n;
    }
    return n;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name)
        : path(fs::temp_directory_path() / ("llrf_test_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

RunConfig small_mc_config() {
    RunConfig cfg;
    cfg.mc_n_trials = 24;
    cfg.mc_base_seed = 13;
    return cfg;
}

}  // namespace

TEST_CASE("cmd_simulate writes a full-length deterministic trace") {
    TempDir dir("simulate");
    RunConfig cfg;
    CHECK(cmd_simulate(cfg, 5, ObserverVariant::proposed, dir.path.string()) == 0);
    const fs::path trace = dir.path / "trace_proposed.csv";
    REQUIRE(fs::exists(trace));
    const std::string first = slurp(trace);
    // schema + units comments, header, then one row per step
    CHECK(count_lines(first) == 3 + cfg.to_scenario().pulse.n_steps());
    CHECK(first.find("# schema=llrf-trace-v1") == 0);
    CHECK(first.find("seed=5") != std::string::npos);

    CHECK(cmd_simulate(cfg, 5, ObserverVariant::proposed, dir.path.string()) == 0);
    CHECK(slurp(trace) == first);  // byte-identical rerun
}

TEST_CASE("zero-disturbance trace holds the flattop error column below 1e-9") {
    TempDir dir("simulate_quiet");
    RunConfig cfg;
    cfg.noise_sigma_pickup = cfg.noise_sigma_reflected = 0.0;
    cfg.noise_sigma_reference = cfg.noise_sigma_forward = 0.0;
    cfg.detuning_bias_range = cfg.detuning_sinusoid_amp_range = 0.0;
    cfg.detuning_wander_std = cfg.detuning_thermal_amp = 0.0;
    cfg.drift_fwd_init_range = cfg.drift_fwd_walk_std = cfg.drift_fwd_periodic_amp = 0.0;
    cfg.drift_rec_init_range = cfg.drift_rec_walk_std = cfg.drift_rec_periodic_amp = 0.0;
    cfg.disturbance_init_range = cfg.disturbance_walk_std = 0.0;
    cfg.disturbance_periodic_amp = 0.0;
    CHECK(cmd_simulate(cfg, 1, ObserverVariant::proposed, dir.path.string()) == 0);

    std::istringstream in(slurp(dir.path / "trace_proposed.csv"));
    std::string line;
    std::getline(in, line);  // schema
    std::getline(in, line);  // units
    std::getline(in, line);  // header
    // locate the columns by name
    int col_e_amp = -1;
    int col_t = -1;
    {
        std::istringstream hdr(line);
        std::string name;
        for (int i = 0; std::getline(hdr, name, ','); ++i) {
            if (name == "e_amp") col_e_amp = i;
            if (name == "t") col_t = i;
        }
    }
    REQUIRE(col_e_amp >= 0);
    REQUIRE(col_t >= 0);
    int flattop_rows = 0;
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string field;
        double t = 0.0;
        double e_amp = 0.0;
        for (int i = 0; std::getline(row, field, ','); ++i) {
            if (i == col_t) t = std::stod(field);
            if (i == col_e_amp) e_amp = std::stod(field);
        }
        if (t >= 325e-6 && t <= 950e-6) {
            ++flattop_rows;
            CHECK(std::fabs(e_amp) < 1e-9);
        }
    }
    CHECK(flattop_rows == 626);
}

TEST_CASE("cmd_mc writes curves and a manifest, deterministically") {
    TempDir a("mc_a");
    TempDir b("mc_b");
    const RunConfig cfg = small_mc_config();

    CHECK(cmd_mc(cfg, VariantSelection::both, a.path.string()) == 0);
    CHECK(cmd_mc(cfg, VariantSelection::both, b.path.string()) == 0);

    for (const char* name : {"curves_proposed.csv", "curves_standard.csv",
                             "manifest.txt"}) {
        REQUIRE(fs::exists(a.path / name));
        CHECK(slurp(a.path / name) == slurp(b.path / name));
    }

    const std::string curves = slurp(a.path / "curves_proposed.csv");
    CHECK(curves.find("# schema=llrf-curves-v1") == 0);
    CHECK(curves.find("metric,window,threshold,likelihood") != std::string::npos);

    // likelihood column bounded in [0,1]
    std::istringstream in(curves);
    std::string line;
    std::getline(in, line);  // schema
    std::getline(in, line);  // header
    int rows = 0;
    while (std::getline(in, line)) {
        const auto last_comma = line.rfind(',');
        REQUIRE(last_comma != std::string::npos);
        const double lik = std::stod(line.substr(last_comma + 1));
        CHECK(lik >= 0.0);
        CHECK(lik <= 1.0);
        ++rows;
    }
    // two windows x (41 + 41 + 41 + 41 + 51) thresholds
    CHECK(rows == 2 * (41 * 4 + 51));

    const std::string manifest = slurp(a.path / "manifest.txt");
    CHECK(manifest.find("config_hash =") != std::string::npos);
    CHECK(manifest.find("[config]") != std::string::npos);
    CHECK(manifest.find("aborted_proposed = 0") != std::string::npos);
}

TEST_CASE("cmd_mc single-variant selection") {
    TempDir dir("mc_single");
    RunConfig cfg = small_mc_config();
    cfg.mc_n_trials = 8;
    CHECK(cmd_mc(cfg, VariantSelection::standard, dir.path.string()) == 0);
    CHECK_FALSE(fs::exists(dir.path / "curves_proposed.csv"));
    CHECK(fs::exists(dir.path / "curves_standard.csv"));
}

TEST_CASE("cmd_validate passes on a pristine build and fails when sabotaged") {
    RunConfig cfg;
    CHECK(cmd_validate(cfg) == 0);
    // negative control: flipping the descent sign must break the property
    CHECK(cmd_validate(cfg, /*flip_descent_sign=*/true) == 3);
    // doubling ts doubles the discretization error bound; the suite still passes
    RunConfig doubled = cfg;
    doubled.cavity_ts = 2e-6;
    CHECK(cmd_validate(doubled) == 0);
}

TEST_CASE("runaway plant aborts trials and cmd_mc reports it") {
    TempDir dir("mc_abort");
    RunConfig cfg;
    cfg.mc_n_trials = 8;
    cfg.mc_base_seed = 3;
    // detuning far beyond the Euler stability disc: |1 + ts(jdw - wh)| >> 1,
    // and the standard observer does not track detuning at all
    cfg.detuning_bias_range = 4e6;
    cfg.detuning_n_sinusoids_min = cfg.detuning_n_sinusoids_max = 0;
    cfg.detuning_sinusoid_amp_range = 0.0;
    cfg.detuning_wander_std = 0.0;
    cfg.detuning_thermal_amp = 0.0;
    CHECK(cmd_mc(cfg, VariantSelection::standard, dir.path.string()) == 4);
    const std::string manifest = slurp(dir.path / "manifest.txt");
    CHECK(manifest.find("aborted_standard = 0") == std::string::npos);
}

TEST_CASE("trace writer surfaces I/O failures with the path") {
    RunConfig cfg;
    const ScenarioConfig scenario = cfg.to_scenario();
    const TrialRecord rec = run_trial(1, 0, scenario, ObserverVariant::proposed);
    CHECK_THROWS_WITH_AS(
        write_trace_csv("/nonexistent_dir_xyz/trace.csv", rec, cfg, 1,
                        ObserverVariant::proposed),
        doctest::Contains("/nonexistent_dir_xyz/trace.csv"), std::runtime_error);
}
