#ifndef PATHCTRL_CALCULUS_HPP
#define PATHCTRL_CALCULUS_HPP

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "pathctrl/path.hpp"
#include "pathctrl/vec.hpp"

namespace pathctrl {

// A real functional on path space with optional pathwise derivatives.
//  - time_derivative: one-sided sensitivity to flat-extending the final
//    time (the path is frozen at its final value and time moves forward);
//  - space_gradient: row vector of sensitivities to displacing the final
//    value only (the displaced path is cadlag).
// Either derivative may be left empty; numeric estimators below fill in.
struct PathFunctional {
    std::string name;
    std::function<double(const Path&)> eval;
    std::function<double(const Path&)> time_derivative;
    std::function<Vec(const Path&)> space_gradient;
};

// Forward difference quotient of f under flat extension by `step` (which
// must be a whole number of grid steps).  Near the horizon the quotient is
// taken at the prefix ending `step` earlier — the one-sided limit from the
// interior — and `terminal_limit`, when non-null, reports that fallback.
double horizontal_derivative_numeric(
    const PathFunctional& f, const Path& p, double step,
    double horizon = std::numeric_limits<double>::infinity(),
    bool* terminal_limit = nullptr);

// Coordinates where the central difference fell back to one-sided because
// one side of the bump left f's domain.
struct VerticalDiffInfo {
    std::vector<int> one_sided;
};

// Central difference quotient of f under final-value displacement, one
// coordinate at a time.  The default step scales with the path size.
Vec vertical_gradient_numeric(const PathFunctional& f, const Path& p, double step,
                              VerticalDiffInfo* info = nullptr);
Vec vertical_gradient_numeric(const PathFunctional& f, const Path& p);

// A controlled-evolution record: a path on [0, horizon] whose section
// beyond start_time was produced by a solver (or analytically) and is
// absolutely continuous there.
struct Trajectory {
    Path path;
    double start_time = 0.0;

    Path prefix(double s) const { return restrict(path, s); }
};

// Defect of the pathwise chain rule along X over [start_time, horizon]:
//   f(X_T) - f(X_start) - sum dt_f(X_s) ds - sum dx_f(X_s) . dX(s)
// with left-point sums on the trajectory grid.  For functionals with
// continuous pathwise derivatives the defect shrinks linearly with the
// grid step.  Both derivative callbacks are required (contract_error).
double ito_residual(const PathFunctional& f, const Trajectory& X);

// Compares two functionals meant to agree on continuous paths (one being
// the other's extension to displaced/cadlag paths re-expressed another
// way).  Evaluation mismatch beyond tol on any sample throws input_error;
// derivative gaps are reported and flip `passed` when beyond tol.
struct ConsistencyReport {
    double max_eval_gap = 0.0;
    double max_time_gap = 0.0;
    double max_space_gap = 0.0;
    bool passed = true;
};
ConsistencyReport extension_consistency_check(const PathFunctional& f1,
                                              const PathFunctional& f2,
                                              const std::vector<Path>& samples,
                                              double tol);

// f(p) = psi(final_time, final_value): the classical-state functional.
PathFunctional make_cylinder(
    std::string name, std::function<double(double, CVecView)> psi,
    std::function<double(double, CVecView)> psi_t,
    std::function<Vec(double, CVecView)> psi_x);

// f(p) = left-point sum of w(p(s)) ds over [0, final_time): depends only on
// the strict past, so its space gradient vanishes identically and its time
// derivative is w evaluated at the final value.
PathFunctional make_running_integral(std::string name,
                                     std::function<double(CVecView)> w);

// c1*f1 + c2*f2; derivative callbacks combine when both parts carry them
// and are dropped otherwise.
PathFunctional combine(std::string name, double c1, const PathFunctional& f1,
                       double c2, const PathFunctional& f2);

// Default displacement step for vertical difference quotients.
double default_vertical_step(const Path& p);

} // namespace pathctrl

#endif
