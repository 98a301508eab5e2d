#ifndef PATHCTRL_CONTROL_HPP
#define PATHCTRL_CONTROL_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pathctrl/calculus.hpp"
#include "pathctrl/path.hpp"

namespace pathctrl {

// A controlled path-dependent evolution on [t, horizon]:
//
//   dX/ds = dynamics(X restricted to [0, s], u(s)),   X = initial on [0, t]
//
// with running cost accumulated along the way and a terminal cost at the
// horizon.  `lipschitz` is the constant L in the standing growth and
// Lipschitz assumptions
//
//   |F(p, u)| + |q(p, u)| + |phi(p)|          <= L (1 + sup|p|)
//   |F(p,u)-F(p',u)| + |q| + |phi| likewise   <= L sup|p - p'|
//
// (same grid, same final time); every a-priori bound below is expressed
// through L and the horizon only.
struct ControlProblem {
    std::string name;
    int dim = 1;
    double horizon = 1.0;
    double lipschitz = 1.0;
    std::vector<double> controls; // finite control set, order fixed for tie-breaks
    std::function<Vec(const Path&, double)> dynamics;
    std::function<double(const Path&, double)> running_cost;
    std::function<double(const Path&)> terminal_cost;

    void validate() const; // throws input_error / contract_error
};

// Piecewise-constant control signal on the uniform grid
// {start, start+step, ...}: values[j] holds on the right-open interval
// [start + j step, start + (j+1) step); the horizon maps to the last
// interval.  An empty signal is the degenerate start == end case.
struct ControlSignal {
    double start = 0.0;
    double step = 1.0;
    std::vector<double> values;

    double end() const { return start + step * static_cast<double>(values.size()); }
    double at(double s) const;
};

enum class SolveMethod { picard, euler };

struct SolveOptions {
    SolveMethod method = SolveMethod::euler;
    double grid_step = 0.01;
    double tol = 1e-12;      // fixed-point stopping tolerance (weighted norm)
    int max_iterations = 200;
};

struct SolveResult {
    Trajectory trajectory;
    int iterations = 0;                  // 0 for the one-pass Euler method
    std::vector<double> contraction_ratios; // successive weighted-norm ratios
};

// Integrates the evolution from the initial path to the horizon.  The
// fixed-point method iterates the integral map with left-point quadrature
// under the weight exp(-2L (s - t)), which contracts with factor <= 1/2;
// the Euler method is the single-sweep form of the same discretisation
// (they share a fixed point on a common grid).
SolveResult solve_state(const ControlProblem& pr, const Path& initial,
                        const ControlSignal& u, const SolveOptions& opts);

// Trapezoid quadrature of the running cost along the trajectory (constant
// control value per segment, so splits at control nodes are exact) plus the
// terminal cost.
double cost(const ControlProblem& pr, const Trajectory& X, const ControlSignal& u);

// A-priori estimate constants, derived from Gronwall chains for the
// left-point discretisation (the discrete factor (1+Lh)^n <= e^{LT} keeps
// every derivation valid on the grid).  They are sufficient, not tight.
//
//   growth:      sup |X| <= C1 (1 + sup|initial|),  C1 = (1+LT) e^{LT}
//   dependence:  two starts (t1 <= t2) under one control signal satisfy
//                max |X1-X2| <= C2 (gap + (1+sup|initial1|)(t2-t1)),
//                gap = sup |ext(initial1) - initial2|,
//                C2 = (1 + L(1+C1)) e^{LT}
//   step:        |X(s2)-X(s1)| <= C3 (1+sup|initial|)(s2-s1),
//                C3 = L (1 + C1)
//   value:       |V| <= C4 (1+sup|initial|) and V is C4-Lipschitz in the
//                path metric (with the (1+sup) weight),
//                C4 = (T+1) L (2 C2 + 1 + C1) + L (1 + C1)
double growth_constant(double lipschitz, double horizon);
double dependence_constant(double lipschitz, double horizon);
double step_constant(double lipschitz, double horizon);
double value_constant(double lipschitz, double horizon);

struct EstimateRow {
    double observed = 0.0;
    double bound = 0.0;
    bool passed = false;
};

// Solve-and-compare wrappers for the three trajectory estimates.
EstimateRow growth_bound_check(const ControlProblem& pr, const Path& initial,
                               const ControlSignal& u, const SolveOptions& opts);
EstimateRow dependence_check(const ControlProblem& pr, const Path& initial1,
                             const Path& initial2, const ControlSignal& u,
                             const SolveOptions& opts);
EstimateRow step_bound_check(const ControlProblem& pr, const Path& initial,
                             const ControlSignal& u, const SolveOptions& opts);

// Built-in problem families (shared by the CLI catalog and the tests).
//  - constant_field:    F = control_gain u e1
//  - endpoint_feedback: F = drift_gain p(s) + control_gain u e1
//  - lagged_feedback:   F = drift_gain p((s-delay)+) + control_gain u e1
//  - average_feedback:  F = drift_gain (left sum of p over [0,s)) + control_gain u e1
// Running cost: zero | control_sq | state_norm.  Terminal cost: endpoint
// (first coordinate) | endpoint_abs | running_max.  The Lipschitz constant
// is computed from the coefficients.
struct FamilyParams {
    int dim = 1;
    double horizon = 1.0;
    std::vector<double> controls = {-1.0, 1.0};
    double drift_gain = 0.0;
    double control_gain = 1.0;
    double delay = 0.25;
    std::string running = "zero";
    std::string terminal = "endpoint";
};

ControlProblem make_family(const std::string& family, const FamilyParams& prm);
std::vector<std::string> family_names();
// True for families whose coefficients read only (time, current value).
bool family_is_state_only(const std::string& family, const FamilyParams& prm);

} // namespace pathctrl

#endif
