// Command-line front end: cwbnlw <mode> --config <path> [--seed N] [--out DIR]
// [--replay FILE]. Exit codes: 0 all gating checks pass, 1 runtime/gating
// failure, 2 configuration error.

#include <CLI11.hpp>
#include <iostream>

#include "cwbnlw/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Spectral solver and verification suite for time-periodic solutions of the "
                 "fractional nonlinear wave equation on the d-torus"};
    app.require_subcommand(1);

    std::string config_path, out_dir, replay;
    std::int64_t seed = -1;
    app.add_option("--config", config_path, "configuration file")->required();
    app.add_option("--seed", seed, "override [output] seed");
    app.add_option("--out", out_dir, "override [output] dir");
    app.add_option("--replay", replay, "coupling replay file");

    for (const char* name : {"solve", "scan", "separation", "diophantine", "coupling", "audit"})
        app.add_subcommand(name);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        cwbnlw::RunMode mode = cwbnlw::parse_mode(app.get_subcommands().front()->get_name());
        cwbnlw::ConfigFile file = cwbnlw::ConfigFile::parse_file(config_path);
        cwbnlw::RunConfig config = cwbnlw::RunConfig::load(file, mode);
        if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
        if (!out_dir.empty()) config.out_dir = out_dir;
        if (!replay.empty()) config.replay_file = replay;
        for (const auto& w : config.warnings) std::cerr << "warning: " << w << "\n";
        return cwbnlw::run(config);
    } catch (const cwbnlw::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == "config_error" ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
