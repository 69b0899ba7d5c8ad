#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/stat.h>
#include <sys/wait.h>

#include "gfk/csv.hpp"

namespace {

std::string test_dir() {
    static int counter = 0;
    std::string d = "/tmp/gfk_cli_test_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++);
    ::mkdir(d.c_str(), 0755);
    return d;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    f << text;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(GFK_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const char* kThermoConfig =
    "schema = 1\n"
    "mode = oscillator_thermo\n"
    "[paths]\n"
    "stepsize = 0.03333333333333333\n"
    "n_paths = 800\n"
    "seed = 11\n"
    "[oscillator]\n"
    "temperature = 2.0\n"
    "n_oscillators = 1\n";

} // namespace

TEST_CASE("cli runs a thermo config and writes the report", "[cli]") {
    std::string dir = test_dir();
    write_file(dir + "/run.cfg", kThermoConfig);
    int rc = run_cli("--config " + dir + "/run.cfg --out-dir " + dir);
    REQUIRE(rc == 0);
    gfk::CsvTable t = gfk::read_csv_file(dir + "/thermo_report.csv");
    CHECK(t.header == std::vector<std::string>{"quantity", "provenance", "value", "stderr",
                                               "formatted"});
    int mc_rows = 0, cm_rows = 0;
    int prov = t.column("provenance");
    for (const auto& r : t.rows) {
        if (r[prov] == "mc") ++mc_rows;
        if (r[prov] == "cameron_martin") ++cm_rows;
    }
    CHECK(mc_rows == 5);
    CHECK(cm_rows == 5);
}

TEST_CASE("same seed and different worker counts give identical bytes", "[cli]") {
    std::string dir = test_dir();
    write_file(dir + "/run.cfg", kThermoConfig);
    ::mkdir((dir + "/w1").c_str(), 0755);
    ::mkdir((dir + "/w4").c_str(), 0755);
    REQUIRE(run_cli("--config " + dir + "/run.cfg --workers 1 --out-dir " + dir + "/w1") == 0);
    REQUIRE(run_cli("--config " + dir + "/run.cfg --workers 4 --out-dir " + dir + "/w4") == 0);
    CHECK(slurp(dir + "/w1/thermo_report.csv") == slurp(dir + "/w4/thermo_report.csv"));
}

TEST_CASE("seed override changes the output", "[cli]") {
    std::string dir = test_dir();
    write_file(dir + "/run.cfg", kThermoConfig);
    ::mkdir((dir + "/a").c_str(), 0755);
    ::mkdir((dir + "/b").c_str(), 0755);
    REQUIRE(run_cli("--config " + dir + "/run.cfg --out-dir " + dir + "/a") == 0);
    REQUIRE(run_cli("--config " + dir + "/run.cfg --seed 999 --out-dir " + dir + "/b") == 0);
    CHECK(slurp(dir + "/a/thermo_report.csv") != slurp(dir + "/b/thermo_report.csv"));
}

TEST_CASE("fluctuation trace has one row per step", "[cli]") {
    std::string dir = test_dir();
    write_file(dir + "/trace.cfg",
               "schema = 1\n"
               "mode = fluctuation_trace\n"
               "[paths]\n"
               "stepsize = 0.03333333333333333\n"
               "n_paths = 1\n"
               "seed = 5\n"
               "[oscillator]\n"
               "temperature = 0.125\n"
               "n_oscillators = 1\n");
    REQUIRE(run_cli("--config " + dir + "/trace.cfg --out-dir " + dir) == 0);
    gfk::CsvTable t = gfk::read_csv_file(dir + "/trace.csv");
    CHECK(t.rows.size() == 240); // beta/h = 8 * 30

    write_file(dir + "/trace1.cfg",
               "schema = 1\n"
               "mode = fluctuation_trace\n"
               "[paths]\n"
               "stepsize = 1.0\n"
               "n_paths = 1\n"
               "seed = 5\n"
               "[oscillator]\n"
               "temperature = 1.0\n"
               "n_oscillators = 1\n");
    REQUIRE(run_cli("--config " + dir + "/trace1.cfg --out-dir " + dir) == 0);
    gfk::CsvTable t1 = gfk::read_csv_file(dir + "/trace.csv");
    CHECK(t1.rows.size() == 1); // single-step path

    for (const auto& r : t1.rows) CHECK(std::isfinite(std::stod(r[1])));
}

TEST_CASE("emit-plots writes the endpoint density file", "[cli]") {
    std::string dir = test_dir();
    write_file(dir + "/run.cfg", kThermoConfig);
    REQUIRE(run_cli("--config " + dir + "/run.cfg --emit-plots --out-dir " + dir) == 0);
    gfk::CsvTable t = gfk::read_csv_file(dir + "/endpoint_density.csv");
    CHECK(t.rows.size() == 160); // 80 mc bins + 80 analytic rows
}

TEST_CASE("config errors exit with code 2", "[cli]") {
    std::string dir = test_dir();
    CHECK(run_cli("--config " + dir + "/absent.cfg") == 2);

    write_file(dir + "/bad.cfg", "schema = 1\nmode = bogus\n");
    CHECK(run_cli("--config " + dir + "/bad.cfg") == 2);

    write_file(dir + "/missing_trial.cfg",
               "schema = 1\nmode = atom_properties\n"
               "[paths]\nn_paths = 5\ntotal_time = 1\nstepsize = 0.1\n"
               "[system]\ntrial_file = nowhere.hyll\n");
    CHECK(run_cli("--config " + dir + "/missing_trial.cfg") == 2);

    CHECK(run_cli("") == 2); // missing required --config
}

TEST_CASE("unwritable output exits with code 4", "[cli]") {
    std::string dir = test_dir();
    write_file(dir + "/run.cfg", kThermoConfig);
    CHECK(run_cli("--config " + dir + "/run.cfg --out-dir /nonexistent_dir_zz") == 4);
}

TEST_CASE("runtime degeneracy exits with code 3", "[cli]") {
    std::string dir = test_dir();
    // wildly detuned trial: the running weights collapse immediately
    write_file(dir + "/degenerate.cfg",
               "schema = 1\n"
               "mode = atom_properties\n"
               "[paths]\n"
               "stepsize = 0.05\n"
               "total_time = 4\n"
               "record_interval = 1\n"
               "n_paths = 200\n"
               "seed = 2\n"
               "[system]\n"
               "trial = gaussian\n"
               "omega = 1\n"
               "potential_omega = 30\n"
               "[observables]\n"
               "list = r_i^2\n");
    CHECK(run_cli("--config " + dir + "/degenerate.cfg --out-dir " + dir) == 3);
}
