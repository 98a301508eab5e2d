#ifndef PATHCTRL_HJB_HPP
#define PATHCTRL_HJB_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pathctrl/calculus.hpp"
#include "pathctrl/control.hpp"
#include "pathctrl/value.hpp"

namespace pathctrl {

// Pointwise Hamiltonian of the dynamic-programming equation:
//   H(p, costate) = min over the control set of costate . F(p, u) + q(p, u).
// Ties go to the earlier control in the set (strict improvement only).
double hamiltonian(const ControlProblem& pr, const Path& state, CVecView costate);

// Defect of the dynamic-programming equation at a path for a candidate
// with pathwise derivatives:  dt v + H(p, dx v).  Missing derivative
// callbacks fall back to numeric quotients (horizon-aware).
double phjb_residual(const ControlProblem& pr, const PathFunctional& v, const Path& p);

// Max |v - terminal cost| over sampled paths with final time == horizon.
struct TerminalReport {
    double max_gap = 0.0;
    bool passed = false;
};
TerminalReport terminal_check(const ControlProblem& pr, const PathFunctional& v,
                              const CompactClass& c, std::uint64_t seed, int count,
                              double tol);

// Searching the compact class for a touching point of a test functional.
//  from_above: maximise w - phi  (phi shifted so the max becomes 0 touches
//              w from above at the maximiser);
//  from_below: minimise w + phi  (-phi - shift touches w from below).
enum class TouchMode { from_above, from_below };

struct TouchOptions {
    int enum_max_nodes = 6;            // full enumeration only for tiny grids
    std::int64_t enum_max_count = 500000;
    int sample_count = 4000;           // fallback: seeded sampling...
    int refine_sweeps = 64;            // ...plus lattice coordinate descent
    std::uint64_t seed = 1;
};

struct TouchingPoint {
    Path path;
    double extremum = 0.0; // extremal value of the objective before shifting
    bool exhaustive = true;
};

TouchingPoint find_touching_max(const std::function<double(const Path&)>& w,
                                const PathFunctional& phi, const CompactClass& c,
                                TouchMode mode, const TouchOptions& opts);

// One-sided equation test at the touching point of phi against w:
//   from_above:  dt phi + H(p,  dx phi) >= -tol   (w treated as a lower object)
//   from_below: -dt phi + H(p, -dx phi) <=  tol
// The test is only decisive at interior touchings: final time strictly
// before the horizon and final value strictly inside the class bound;
// otherwise the outcome is not_applicable.
enum class TouchOutcome { satisfied, violated, not_applicable };

struct ViscosityReport {
    TouchMode mode = TouchMode::from_above;
    Path touching_path;
    double touching_gap = 0.0;     // objective extremum absorbed into phi's shift
    double inequality_value = 0.0; // defined when applicable
    TouchOutcome outcome = TouchOutcome::not_applicable;
    bool passed = false;           // satisfied, or not_applicable (vacuous)
    bool exhaustive = true;
};

ViscosityReport viscosity_test(const ControlProblem& pr,
                               const std::function<double(const Path&)>& w,
                               const PathFunctional& phi, const CompactClass& c,
                               TouchMode mode, double tol, const TouchOptions& opts);

// State-only reduction of a control problem: coefficients read only the
// clock and the current value.
struct ReducedProblem {
    int dim = 1; // 1 or 2
    double horizon = 1.0;
    std::vector<double> controls;
    std::function<Vec(double, CVecView, double)> dynamics;
    std::function<double(double, CVecView, double)> running_cost;
    std::function<double(CVecView)> terminal_cost;
};

// Reduced form of a built-in family, when its coefficients are state-only.
std::optional<ReducedProblem> make_reduced_family(const std::string& family,
                                                  const FamilyParams& prm);

// Backward-in-time table of the reduced value on a rectangular grid.
struct ValueTable {
    double t0 = 0.0;
    double dt = 0.0;
    int steps = 0;                 // time slices = steps + 1
    std::vector<double> axis1;     // x-grid, first coordinate
    std::vector<double> axis2;     // second coordinate (empty for dim 1)
    std::vector<double> values;    // slice-major, then axis2-major, then axis1

    double time(int k) const { return t0 + dt * k; }
    // Multilinear interpolation in space; t must be one of the slice times.
    double at(double t, CVecView x) const;
};

struct SemiLagrangianOptions {
    double dt = 0.01;
    double x_step = 0.01;
    Vec x_min = {-1.0};
    Vec x_max = {1.0};
    // Foot points leaving the grid are linearly extrapolated from the edge
    // cells when true; otherwise they raise refinement_error.  Displacements
    // beyond the whole grid extent always raise refinement_error.
    bool extrapolate = true;
};

// One backward sweep of the discrete dynamic-programming operator
//   V(t, x) = min_u [ q(t,x,u) dt + V(t+dt, x + F(t,x,u) dt) ]
// with multilinear interpolation at the foot points.
ValueTable markovian_hjb_solve(const ReducedProblem& rp,
                               const SemiLagrangianOptions& opts);

// Agreement between the path-space value and the reduced table at matched
// states, plus insensitivity of the path-space value to the history.
// Throws input_error when the problem's coefficients are detectably not
// state-only (evaluated on two histories with equal endpoints).
struct CrosscheckRow {
    double state = 0.0;     // first coordinate of the queried endpoint
    double path_value = 0.0;
    double table_value = 0.0;
    double history_gap = 0.0;
};
struct CrosscheckReport {
    std::vector<CrosscheckRow> rows;
    double max_value_gap = 0.0;
    double max_history_gap = 0.0;
    bool passed = false;
};
CrosscheckReport reduction_crosscheck(const ControlProblem& pr, const ReducedProblem& rp,
                                      const ValueTable& table,
                                      const std::vector<Path>& queries,
                                      const ValueOptions& vopts, double value_tol,
                                      double history_tol);

} // namespace pathctrl

#endif
