#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "gfk/csv.hpp"
#include "gfk/pipeline.hpp"
#include "gfk/run_config.hpp"

using namespace gfk;

TEST_CASE("full config parses with sections and comments", "[config]") {
    std::istringstream in(
        "# oscillator run\n"
        "schema = 1\n"
        "mode = oscillator_thermo\n"
        "\n"
        "[paths]\n"
        "stepsize = 0.03333333333333333  # 1/30\n"
        "n_paths = 10000\n"
        "seed = 12345\n"
        "kernel = gaussian\n"
        "blocks = 50\n"
        "\n"
        "[oscillator]\n"
        "temperature = 2.0\n"
        "n_oscillators = 1\n");
    RunConfig cfg = parse_run_config(in);
    CHECK(cfg.mode == RunMode::OscillatorThermo);
    CHECK(cfg.paths.n_paths == 10000);
    CHECK(cfg.paths.seed == 12345);
    CHECK(cfg.temperature == 2.0);
    CHECK(cfg.n_oscillators == 1);
    CHECK(cfg.out_thermo == "thermo_report.csv");
}

TEST_CASE("time grid must be uniform and anchored", "[config]") {
    std::istringstream good(
        "schema = 1\nmode = atom_properties\n"
        "[system]\ntrial = gaussian\n"
        "[paths]\ntime_grid = 8, 16, 24, 32\nn_paths = 10\n");
    RunConfig cfg = parse_run_config(good);
    CHECK(cfg.paths.total_time == 32.0);
    CHECK(cfg.record_interval == 8.0);

    std::istringstream ragged(
        "schema = 1\nmode = atom_properties\n"
        "[system]\ntrial = gaussian\n"
        "[paths]\ntime_grid = 8, 16, 30\nn_paths = 10\n");
    CHECK_THROWS_AS(parse_run_config(ragged), Error);

    std::istringstream unanchored(
        "schema = 1\nmode = atom_properties\n"
        "[system]\ntrial = gaussian\n"
        "[paths]\ntime_grid = 16, 24, 32\nn_paths = 10\n");
    CHECK_THROWS_AS(parse_run_config(unanchored), Error);
}

TEST_CASE("config rejections carry the right code", "[config]") {
    auto expect_invalid = [](const std::string& text) {
        std::istringstream in(text);
        try {
            parse_run_config(in);
            FAIL("expected ConfigInvalid for: " << text);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ConfigInvalid);
        }
    };
    expect_invalid("mode = oscillator_thermo\n[paths]\nn_paths = 5\n");            // no schema
    expect_invalid("schema = 2\nmode = oscillator_thermo\n[paths]\nn_paths = 5\n"); // bad version
    expect_invalid("schema = 1\n[paths]\nn_paths = 5\n");                           // no mode
    expect_invalid("schema = 1\nmode = quantum_leap\n[paths]\nn_paths = 5\n");      // bad mode
    expect_invalid("schema = 1\nmode = oscillator_thermo\n[paths]\nn_paths = 5\nwarp = 9\n");
    expect_invalid("schema = 1\nmode = oscillator_thermo\n[warp]\nspeed = 9\n");
    expect_invalid("schema = 1\nmode = oscillator_thermo\n[paths]\nn_paths = zero\n");
    expect_invalid("schema = 1\nmode = oscillator_thermo\n");                       // n_paths < 1
    expect_invalid("schema = 1\nmode = atom_properties\n[paths]\nn_paths = 5\n");   // no trial file
    expect_invalid("schema = 1\nmode = temperature_sweep\n[paths]\nn_paths = 5\n"); // no temps
    expect_invalid(
        "schema = 1\nmode = fluctuation_trace\n[paths]\nn_paths = 5\n"
        "[oscillator]\nn_oscillators = 3\n");                                        // M != 1
    expect_invalid("schema = 1\nmode = oscillator_thermo\n[paths]\nn_paths = 5\nn_paths = 6\n");
}

TEST_CASE("observable names map to families", "[config]") {
    CHECK(observable_from_name("r_i^1").family == ObservableFamily::PowerOfRi);
    CHECK(observable_from_name("r_i^2").power == 2);
    CHECK(observable_from_name("r_i^-2").family == ObservableFamily::InversePowerOfRi);
    CHECK(observable_from_name("r_ij^1").family == ObservableFamily::PowerOfRij);
    CHECK(observable_from_name("r_ij^-1").family == ObservableFamily::InversePowerOfRij);
    CHECK_THROWS_AS(observable_from_name("r_k^1"), Error);
    CHECK_THROWS_AS(observable_from_name("r_i^x"), Error);

    Configuration c(2, 3);
    c.coords = {3.0, 0.0, 0.0, 0.0, 4.0, 0.0};
    CHECK(observable_from_name("r_i^1").eval(c) == Catch::Approx(7.0));
    CHECK(observable_from_name("r_i^2").eval(c) == Catch::Approx(25.0));
    CHECK(observable_from_name("r_ij^1").eval(c) == Catch::Approx(5.0));
    CHECK(observable_from_name("r_ij^-1").eval(c) == Catch::Approx(0.2));
    CHECK(observable_from_name("r_i^-1").eval(c) == Catch::Approx(1.0 / 3.0 + 0.25));
}

TEST_CASE("csv writer round-trips losslessly", "[config]") {
    CsvWriter w({"time", "value", "stderr", "provenance"});
    std::vector<double> vals{8.0, -7.478069321, 2.8e-5, 1.0 / 3.0, 0.1, 1e-300};
    w.add_row({CsvWriter::cell(vals[0]), CsvWriter::cell(vals[1]), CsvWriter::cell(vals[2]), "mc"});
    w.add_row({CsvWriter::cell(vals[3]), CsvWriter::cell(vals[4]), CsvWriter::cell(vals[5]), "mc"});
    std::string text = w.str();

    std::istringstream in(text);
    CsvTable t = parse_csv(in);
    REQUIRE(t.header.size() == 4);
    REQUIRE(t.rows.size() == 2);
    CHECK(std::stod(t.rows[0][0]) == vals[0]);
    CHECK(std::stod(t.rows[0][1]) == vals[1]); // bitwise round trip
    CHECK(std::stod(t.rows[0][2]) == vals[2]);
    CHECK(std::stod(t.rows[1][0]) == vals[3]);
    CHECK(std::stod(t.rows[1][2]) == vals[5]);

    // re-serialization is byte-identical
    CsvWriter again(t.header);
    for (const auto& row : t.rows) again.add_row(row);
    CHECK(again.str() == text);
}

TEST_CASE("reference file parsing", "[config]") {
    std::string path = "/tmp/gfk_test_refs.txt";
    {
        std::ofstream f(path);
        f << "# literature\nE -7.4780603\nr_i^1 4.989523 0.0\n";
    }
    auto refs = parse_reference_file(path);
    REQUIRE(refs.size() == 2);
    CHECK(refs[0].name == "E");
    CHECK(refs[0].value == Catch::Approx(-7.4780603));
    CHECK(refs[1].name == "r_i^1");
    CHECK_THROWS_AS(parse_reference_file("/nonexistent/refs.txt"), Error);
}
