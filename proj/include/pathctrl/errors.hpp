#ifndef PATHCTRL_ERRORS_HPP
#define PATHCTRL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pathctrl {

// Error taxonomy used across the library.  Each type maps to one class of
// contract violation so callers (and the CLI exit-code policy) can tell
// bad input apart from numerical trouble and from exhausted budgets.

// Malformed or self-inconsistent user input (configs, files, parameters).
struct input_error : std::runtime_error {
    explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// Two paths (or a path and a grid) cannot be placed on a common grid.
struct alignment_error : input_error {
    explicit alignment_error(const std::string& what) : input_error(what) {}
};

// A time argument lies outside [0, horizon].
struct horizon_error : input_error {
    explicit horizon_error(const std::string& what) : input_error(what) {}
};

// An operation was called without a piece it requires (missing callback,
// missing derivative, empty control set, ...).
struct contract_error : input_error {
    explicit contract_error(const std::string& what) : input_error(what) {}
};

// An iterative solver failed to reach its tolerance within its budget.
struct solver_error : std::runtime_error {
    explicit solver_error(const std::string& what) : std::runtime_error(what) {}
};

// A discretisation is too coarse (or a displacement leaves the grid) and
// the requested computation would be meaningless without refinement.
struct refinement_error : std::runtime_error {
    explicit refinement_error(const std::string& what) : std::runtime_error(what) {}
};

// An enumeration or work estimate exceeds the configured budget.
struct budget_error : std::runtime_error {
    explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace pathctrl

#endif
