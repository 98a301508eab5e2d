#ifndef PATHCTRL_VALUE_HPP
#define PATHCTRL_VALUE_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "pathctrl/control.hpp"

namespace pathctrl {

// How a value query discretises the control: piecewise-constant signals on
// the uniform grid of width control_step over [initial.final_time, horizon].
// When |controls|^intervals stays within enumeration_cap the minimisation
// is exhaustive (ties resolved to the lexicographically smallest index
// tuple); beyond the cap a seeded coordinate-descent refinement with
// `restarts` starts is used and results are marked non-exhaustive.
struct ValueOptions {
    double control_step = 0.25;
    double grid_step = 0.01;
    SolveMethod method = SolveMethod::euler;
    double solve_tol = 1e-12;
    std::int64_t enumeration_cap = 65536;
    int restarts = 8;
    std::uint64_t seed = 0;
};

struct ValueResult {
    double value = 0.0;
    ControlSignal argmin;
    bool exhaustive = true;
};

// Infimum of the cost over piecewise-constant control signals.  An initial
// path on a coarser grid is read through its interpolation onto grid_step.
ValueResult value(const ControlProblem& pr, const Path& initial,
                  const ValueOptions& opts);

// Dynamic-programming defect at an intermediate time s on the control grid:
//
//   | V(initial) - min over signals on [t, s) of
//        { running cost on [t, s] + V(trajectory prefix at s) } |
//
// The inner V reuses the same grids, so the suffix minimisations align and
// the defect is pure arithmetic noise for exhaustive instances.
double dpp_residual(const ControlProblem& pr, const Path& initial, double s,
                    const ValueOptions& opts);

struct RegularityRow {
    double lhs = 0.0;   // measured value difference (or |V|)
    double rhs = 0.0;   // a-priori bound
    bool passed = false;
};

struct RegularityReport {
    std::vector<RegularityRow> lipschitz;    // one per path pair
    std::vector<RegularityRow> boundedness;  // one per distinct path
    bool passed = true;
};

// Checks |V| <= C4 (1+sup|p|) for each path and the C4-weighted Lipschitz
// bound |V(p) - V(q)| <= C4 (1 + max sup-norm) d_infinity(p, q) for each
// pair (the earlier-starting path first).
RegularityReport value_regularity_check(
    const ControlProblem& pr, const std::vector<std::pair<Path, Path>>& pairs,
    const ValueOptions& opts);

} // namespace pathctrl

#endif
