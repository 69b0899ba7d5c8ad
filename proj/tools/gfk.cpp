// Command-line front end: runs one configured calculation and writes its
// CSV artifacts. Exit codes: 0 success, 2 config error, 3 runtime
// degeneracy, 4 I/O error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gfk/error.hpp"
#include "gfk/pipeline.hpp"
#include "gfk/run_config.hpp"

namespace {

int exit_code_for(gfk::ErrorCode c) {
    switch (c) {
        case gfk::ErrorCode::ConfigInvalid:
        case gfk::ErrorCode::TrialFileMissing:
        case gfk::ErrorCode::InvalidParams:
        case gfk::ErrorCode::SpecShapeMismatch:
            return 2;
        case gfk::ErrorCode::OutputUnwritable:
            return 4;
        default:
            return 3;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalized Feynman-Kac path-integral calculations"};

    std::string config_path;
    std::string out_dir = ".";
    int workers = 0;
    bool emit_plots = false;
    std::optional<std::uint64_t> seed;

    app.add_option("--config", config_path, "run configuration file")->required();
    app.add_option("--seed", seed, "override the configured RNG seed");
    app.add_option("--workers", workers, "worker threads (0 = hardware)");
    app.add_option("--out-dir", out_dir, "output directory for artifacts");
    app.add_flag("--emit-plots", emit_plots, "also write plot-data files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        gfk::RunConfig cfg = gfk::load_run_config(config_path);
        if (seed) cfg.paths.seed = *seed;
        gfk::PipelineOptions opt;
        opt.out_dir = out_dir;
        opt.workers = workers;
        opt.emit_plots = emit_plots;
        gfk::PipelineResult result = gfk::run_pipeline(cfg, opt);
        std::cout << result.summary;
        for (const auto& a : result.artifacts) std::cout << "wrote " << a << "\n";
        return 0;
    } catch (const gfk::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
