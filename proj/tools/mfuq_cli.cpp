// mfuq: multi-fidelity surrogate calibration and forward UQ pipeline.
//
//   mfuq build      --config cfg.json --out dir
//   mfuq calibrate  --config cfg.json --out dir
//   mfuq forward    --config cfg.json --out dir
//   mfuq report     --out dir
//   mfuq run        --config cfg.json --out dir    (build, calibrate, forward, report)
//   mfuq synth-obs  --config cfg.json --out dir
//
// Exit codes: 0 success, 2 config error, 3 oracle error, 4 numerical failure.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mfuq/errors.hpp"
#include "mfuq/pipeline.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_oracle = 3;
constexpr int exit_numerical = 4;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-fidelity surrogate calibration and forward UQ"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> lanes;
    bool quiet = false;
    app.add_option("--config", config_path, "Pipeline configuration (JSON, comments allowed)");
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_option("--seed", seed, "Override the configuration seed");
    app.add_option("--lanes", lanes, "Concurrent oracle evaluations")->check(CLI::PositiveNumber);
    app.add_flag("--quiet", quiet, "Suppress progress messages");

    auto* build = app.add_subcommand("build", "Build the calibration surrogate on the prior space");
    auto* calibrate = app.add_subcommand("calibrate", "MAP estimate and Laplace posterior from observations");
    auto* forward = app.add_subcommand("forward", "Prior- and posterior-based forward UQ of the predictions");
    auto* report = app.add_subcommand("report", "Consolidate the artifacts of the output directory");
    auto* run_all = app.add_subcommand("run", "build, calibrate, forward and report in sequence");
    auto* synth = app.add_subcommand("synth-obs", "Write synthetic observations from the configured truth");
    for (auto* sub : {build, calibrate, forward, report, run_all, synth}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    mfuq::RunOptions run;
    run.out_dir = out_dir;
    run.lanes = lanes;
    run.log = quiet ? nullptr : &std::cerr;

    try {
        if (report->parsed()) {
            const auto text = mfuq::cmd_report(run);
            if (!quiet) std::cout << text;
            return 0;
        }
        if (config_path.empty()) throw mfuq::ConfigError("--config is required");
        const auto cfg = mfuq::load_config(config_path, seed);
        const auto t0 = std::chrono::steady_clock::now();
        if (build->parsed() || run_all->parsed()) mfuq::cmd_build(cfg, run);
        if (calibrate->parsed() || run_all->parsed()) mfuq::cmd_calibrate(cfg, run);
        if (forward->parsed() || run_all->parsed()) mfuq::cmd_forward(cfg, run);
        if (run_all->parsed()) {
            const auto text = mfuq::cmd_report(run);
            if (!quiet) std::cout << text;
        }
        if (synth->parsed()) mfuq::cmd_synth_obs(cfg, run);
        if (!quiet) {
            const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
            std::cerr << "done in " << dt.count() << " s\n";
        }
        return 0;
    } catch (const mfuq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const mfuq::FormatError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const mfuq::OracleError& e) {
        std::cerr << "oracle error: " << e.what() << "\n";
        return exit_oracle;
    } catch (const mfuq::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
