// Command-line front end: runs one experiment config and reports through
// the exit code (0 pass, 2 config error, 3 assertion failed, 4 budget
// exceeded, 1 unexpected error).
#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "pathctrl/experiment.hpp"
#include "pathctrl/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"path-dependent control experiments"};
    app.set_version_flag("--version", pathctrl::library_version);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int jobs = 1;
    bool list = false;
    bool list_json = false;

    app.add_option("-c,--config", config_path, "experiment config (JSON)");
    app.add_option("-s,--seed", seed, "override the config seed");
    app.add_option("-o,--out", out_dir, "override the output directory");
    app.add_option("-j,--jobs", jobs, "worker threads for sweeps")
        ->check(CLI::PositiveNumber);
    app.add_flag("-l,--list", list, "print the built-in problem families");
    app.add_flag("--json", list_json, "list as JSON");

    CLI11_PARSE(app, argc, argv);

    if (list) {
        std::cout << pathctrl::catalog_text(list_json);
        return 0;
    }
    if (config_path.empty()) {
        std::cerr << "error: --config is required (or --list)\n";
        return 2;
    }

    pathctrl::RunOverrides ov;
    if (app.count("--seed") > 0) ov.seed = seed;
    if (!out_dir.empty()) ov.out_dir = out_dir;
    ov.jobs = jobs;

    try {
        const auto outcome = pathctrl::run_experiment_file(config_path, ov);
        std::cout << outcome.summary;
        return outcome.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
