#ifndef PATHCTRL_EXPERIMENT_HPP
#define PATHCTRL_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pathctrl {

// The experiment runner behind the CLI.  A JSON config selects one of the
// experiment kinds
//
//   ode-solve | value | dpp-check | ito-check | functional-props |
//   viscosity-check | hjb-compare | estimates
//
// and the runner writes, into the output directory:
//   manifest.json  - config echo, library version, wall time (the only
//                    non-deterministic artifact, excluded from `files`)
//   results + summary.txt - deterministic result files listed in `files`
//
// Exit codes: 0 all checks passed; 2 malformed config; 3 a numerical
// assertion failed; 4 a work budget was exceeded; 1 unexpected error.
struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    int jobs = 1;
};

struct RunOutcome {
    int exit_code = 0;
    std::string summary;
    std::vector<std::string> files; // deterministic result files (absolute paths)
};

RunOutcome run_experiment(const std::string& config_text, const RunOverrides& ov);
RunOutcome run_experiment_file(const std::string& config_path, const RunOverrides& ov);

// Built-in problem family catalog (name, parameters, reduction note), as a
// fixed-width table or as JSON.
std::string catalog_text(bool as_json);

} // namespace pathctrl

#endif
