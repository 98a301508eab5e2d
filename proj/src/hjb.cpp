#include "pathctrl/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pathctrl/errors.hpp"
#include "pathctrl/functionals.hpp"
#include "pathctrl/rng.hpp"

namespace pathctrl {

namespace {
constexpr double snap_tol = 1e-9;
}

double hamiltonian(const ControlProblem& pr, const Path& state, CVecView costate) {
    pr.validate();
    if (static_cast<int>(costate.size()) != pr.dim)
        throw alignment_error("costate dimension mismatch");
    double best = std::numeric_limits<double>::infinity();
    for (double v : pr.controls) {
        const Vec f = pr.dynamics(state, v);
        const double cand = dot(costate, f) + pr.running_cost(state, v);
        if (cand < best) best = cand;
    }
    return best;
}

double phjb_residual(const ControlProblem& pr, const PathFunctional& v, const Path& p) {
    if (!v.eval) throw contract_error("candidate '" + v.name + "' has no eval");
    const double dt = v.time_derivative
                          ? v.time_derivative(p)
                          : horizontal_derivative_numeric(v, p, p.grid_step(), pr.horizon);
    const Vec dx = v.space_gradient ? v.space_gradient(p) : vertical_gradient_numeric(v, p);
    return dt + hamiltonian(pr, p, dx);
}

TerminalReport terminal_check(const ControlProblem& pr, const PathFunctional& v,
                              const CompactClass& c, std::uint64_t seed, int count,
                              double tol) {
    if (std::fabs(c.horizon - pr.horizon) > snap_tol)
        throw alignment_error("class horizon must match the problem horizon");
    CompactClass at_end = c;
    at_end.start_time = c.horizon; // sample final-time == horizon paths only
    TerminalReport rep;
    for (const Path& p : lattice_sample(at_end, seed, count))
        rep.max_gap = std::max(rep.max_gap, std::fabs(v.eval(p) - pr.terminal_cost(p)));
    rep.passed = rep.max_gap <= tol;
    return rep;
}

namespace {

double touch_score(const std::function<double(const Path&)>& w, const PathFunctional& phi,
                   TouchMode mode, const Path& p) {
    return mode == TouchMode::from_above ? w(p) - phi.eval(p) : w(p) + phi.eval(p);
}

bool touch_better(TouchMode mode, double cand, double best) {
    return mode == TouchMode::from_above ? cand > best : cand < best;
}

} // namespace

TouchingPoint find_touching_max(const std::function<double(const Path&)>& w,
                                const PathFunctional& phi, const CompactClass& c,
                                TouchMode mode, const TouchOptions& opts) {
    if (!w || !phi.eval) throw contract_error("touching search needs both functionals");
    std::vector<Path> pool;
    bool exhaustive = true;
    try {
        pool = enumerate_class(c, opts.enum_max_nodes, opts.enum_max_count);
    } catch (const budget_error&) {
        pool = lattice_sample(c, opts.seed, opts.sample_count);
        exhaustive = false;
    }
    if (pool.empty()) throw input_error("the compact class is empty");

    std::optional<Path> best_path;
    double best = 0.0;
    for (const Path& p : pool) {
        const double s = touch_score(w, phi, mode, p);
        if (!best_path || touch_better(mode, s, best)) {
            best = s;
            best_path = p;
        }
    }

    if (!exhaustive) {
        // Lattice coordinate descent around the sampled optimum: move one
        // node value by one lattice quantum at a time, staying in class.
        Path cur = *best_path;
        for (int sweep = 0; sweep < opts.refine_sweeps; ++sweep) {
            bool improved = false;
            for (int k = 0; k < cur.nodes(); ++k)
                for (int i = 0; i < cur.dim(); ++i)
                    for (double dir : {+1.0, -1.0}) {
                        std::vector<double> flat = cur.raw();
                        flat[static_cast<std::size_t>(k) * cur.dim() + i] +=
                            dir * c.value_step;
                        Path cand(cur.dim(), cur.grid_step(), std::move(flat), cur.flag());
                        if (!class_contains(c, cand)) continue;
                        const double s = touch_score(w, phi, mode, cand);
                        if (touch_better(mode, s, best)) {
                            best = s;
                            cur = std::move(cand);
                            improved = true;
                        }
                    }
            if (!improved) break;
        }
        best_path = cur;
    }
    return {*best_path, best, exhaustive};
}

ViscosityReport viscosity_test(const ControlProblem& pr,
                               const std::function<double(const Path&)>& w,
                               const PathFunctional& phi, const CompactClass& c,
                               TouchMode mode, double tol, const TouchOptions& opts) {
    const auto tp = find_touching_max(w, phi, c, mode, opts);
    ViscosityReport rep{mode,  tp.path, tp.extremum, 0.0, TouchOutcome::not_applicable,
                        false, tp.exhaustive};

    const bool interior_time = tp.path.final_time() < c.horizon - snap_tol;
    const bool interior_value = norm(tp.path.final_value()) < c.sup_bound - snap_tol;
    if (!interior_time || !interior_value) {
        rep.outcome = TouchOutcome::not_applicable;
        rep.passed = true; // vacuous: the one-sided test has nothing to say here
        return rep;
    }

    // Shifting phi by a constant to realise the touching changes neither
    // derivative, so the inequality is evaluated with phi as given.
    const double dt = phi.time_derivative
                          ? phi.time_derivative(tp.path)
                          : horizontal_derivative_numeric(phi, tp.path,
                                                          tp.path.grid_step(), pr.horizon);
    Vec dx = phi.space_gradient ? phi.space_gradient(tp.path)
                                : vertical_gradient_numeric(phi, tp.path);
    if (mode == TouchMode::from_above) {
        rep.inequality_value = dt + hamiltonian(pr, tp.path, dx);
        rep.outcome = rep.inequality_value >= -tol ? TouchOutcome::satisfied
                                                   : TouchOutcome::violated;
    } else {
        for (auto& g : dx) g = -g;
        rep.inequality_value = -dt + hamiltonian(pr, tp.path, dx);
        rep.outcome = rep.inequality_value <= tol ? TouchOutcome::satisfied
                                                  : TouchOutcome::violated;
    }
    rep.passed = rep.outcome != TouchOutcome::violated;
    return rep;
}

std::optional<ReducedProblem> make_reduced_family(const std::string& family,
                                                  const FamilyParams& prm) {
    if (!family_is_state_only(family, prm)) return std::nullopt;
    ReducedProblem rp;
    rp.dim = prm.dim;
    rp.horizon = prm.horizon;
    rp.controls = prm.controls;
    const double a = prm.drift_gain;
    const double b = prm.control_gain;
    if (family == "constant_field") {
        rp.dynamics = [b, d = prm.dim](double, CVecView, double v) {
            Vec f(d, 0.0);
            f[0] = b * v;
            return f;
        };
    } else { // endpoint_feedback
        rp.dynamics = [a, b, d = prm.dim](double, CVecView x, double v) {
            Vec f(d);
            for (int i = 0; i < d; ++i) f[i] = a * x[i];
            f[0] += b * v;
            return f;
        };
    }
    if (prm.running == "zero")
        rp.running_cost = [](double, CVecView, double) { return 0.0; };
    else if (prm.running == "control_sq")
        rp.running_cost = [](double, CVecView, double v) { return v * v; };
    else if (prm.running == "state_norm")
        rp.running_cost = [](double, CVecView x, double) { return norm(x); };
    else
        return std::nullopt;
    if (prm.terminal == "endpoint")
        rp.terminal_cost = [](CVecView x) { return x[0]; };
    else if (prm.terminal == "endpoint_abs")
        rp.terminal_cost = [](CVecView x) { return norm(x); };
    else
        return std::nullopt;
    return rp;
}

namespace {

// 1-D linear interpolation on a uniform axis; points beyond the ends are
// linearly extrapolated from the edge cell (exact for affine tails).
double interp_axis(const std::vector<double>& axis, const double* slice, int stride,
                   double x, bool extrapolate) {
    const auto n = static_cast<int>(axis.size());
    if (n == 1) return slice[0];
    const double lo = axis.front(), hi = axis.back();
    const double step = axis[1] - axis[0];
    if ((x < lo - snap_tol || x > hi + snap_tol) && !extrapolate)
        throw refinement_error("foot point left the grid; refine or enlarge the domain");
    int cell = static_cast<int>(std::floor((x - lo) / step));
    cell = std::clamp(cell, 0, n - 2);
    const double frac = (x - axis[static_cast<std::size_t>(cell)]) / step;
    const double a = slice[static_cast<std::size_t>(cell) * stride];
    const double b = slice[(static_cast<std::size_t>(cell) + 1) * stride];
    return a + frac * (b - a);
}

// Bilinear interpolation over one time slice (axis2 fastest).
double interp_slice(const std::vector<double>& axis1, const std::vector<double>& axis2,
                    const double* slice, CVecView x, bool extrapolate) {
    if (axis2.empty()) return interp_axis(axis1, slice, 1, x[0], extrapolate);
    const auto n2 = static_cast<int>(axis2.size());
    if (axis1.size() == 1) return interp_axis(axis2, slice, 1, x[1], extrapolate);
    const double step1 = axis1[1] - axis1[0];
    if ((x[0] < axis1.front() - snap_tol || x[0] > axis1.back() + snap_tol) &&
        !extrapolate)
        throw refinement_error("foot point left the grid; refine or enlarge the domain");
    int cell = static_cast<int>(std::floor((x[0] - axis1.front()) / step1));
    cell = std::clamp(cell, 0, static_cast<int>(axis1.size()) - 2);
    const double frac = (x[0] - axis1[static_cast<std::size_t>(cell)]) / step1;
    const double a = interp_axis(axis2, slice + cell * n2, 1, x[1], extrapolate);
    const double b = interp_axis(axis2, slice + (cell + 1) * n2, 1, x[1], extrapolate);
    return a + frac * (b - a);
}

std::vector<double> make_axis(double lo, double hi, double step) {
    const auto n = std::llround((hi - lo) / step);
    if (n < 1 || std::fabs(lo + n * step - hi) > snap_tol)
        throw alignment_error("grid extent must be a whole number of steps");
    std::vector<double> axis(static_cast<std::size_t>(n) + 1);
    for (std::size_t i = 0; i < axis.size(); ++i) axis[i] = lo + step * static_cast<double>(i);
    return axis;
}

} // namespace

double ValueTable::at(double t, CVecView x) const {
    const auto k = std::llround((t - t0) / dt);
    if (k < 0 || k > steps || std::fabs(t0 + k * dt - t) > snap_tol)
        throw alignment_error("lookup time must be one of the table's slice times");
    const std::size_t per_slice = axis1.size() * std::max<std::size_t>(1, axis2.size());
    return interp_slice(axis1, axis2, values.data() + static_cast<std::size_t>(k) * per_slice,
                        x, true);
}

ValueTable markovian_hjb_solve(const ReducedProblem& rp,
                               const SemiLagrangianOptions& opts) {
    if (rp.dim != 1 && rp.dim != 2)
        throw input_error("the reduced solver supports dimension 1 or 2");
    if (!rp.dynamics || !rp.running_cost || !rp.terminal_cost)
        throw contract_error("reduced problem callbacks are all required");
    if (rp.controls.empty()) throw contract_error("the control set must be non-empty");
    if (!(opts.dt > 0.0) || !(opts.x_step > 0.0))
        throw input_error("grid steps must be positive");
    if (static_cast<int>(opts.x_min.size()) != rp.dim ||
        static_cast<int>(opts.x_max.size()) != rp.dim)
        throw input_error("domain bounds must match the problem dimension");

    ValueTable tab;
    tab.t0 = 0.0;
    tab.dt = opts.dt;
    tab.steps = static_cast<int>(std::llround(rp.horizon / opts.dt));
    if (std::fabs(tab.steps * opts.dt - rp.horizon) > snap_tol)
        throw alignment_error("horizon must be a whole number of time steps");
    tab.axis1 = make_axis(opts.x_min[0], opts.x_max[0], opts.x_step);
    if (rp.dim == 2) tab.axis2 = make_axis(opts.x_min[1], opts.x_max[1], opts.x_step);
    const std::size_t n1 = tab.axis1.size();
    const std::size_t n2 = std::max<std::size_t>(1, tab.axis2.size());
    const std::size_t per_slice = n1 * n2;
    tab.values.assign(per_slice * static_cast<std::size_t>(tab.steps + 1), 0.0);

    const double extent = (tab.axis1.back() - tab.axis1.front()) +
                          (rp.dim == 2 ? tab.axis2.back() - tab.axis2.front() : 0.0);
    Vec x(rp.dim);
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j) {
            x[0] = tab.axis1[i];
            if (rp.dim == 2) x[1] = tab.axis2[j];
            tab.values[static_cast<std::size_t>(tab.steps) * per_slice + i * n2 + j] =
                rp.terminal_cost(x);
        }

    Vec foot(rp.dim);
    for (int k = tab.steps - 1; k >= 0; --k) {
        const double t = tab.time(k);
        const double* next = tab.values.data() + (static_cast<std::size_t>(k) + 1) * per_slice;
        double* here = tab.values.data() + static_cast<std::size_t>(k) * per_slice;
        for (std::size_t i = 0; i < n1; ++i)
            for (std::size_t j = 0; j < n2; ++j) {
                x[0] = tab.axis1[i];
                if (rp.dim == 2) x[1] = tab.axis2[j];
                double best = std::numeric_limits<double>::infinity();
                for (double v : rp.controls) {
                    const Vec f = rp.dynamics(t, x, v);
                    double shift = 0.0;
                    for (int dcoord = 0; dcoord < rp.dim; ++dcoord) {
                        foot[static_cast<std::size_t>(dcoord)] =
                            x[static_cast<std::size_t>(dcoord)] +
                            opts.dt * f[static_cast<std::size_t>(dcoord)];
                        shift += std::fabs(opts.dt * f[static_cast<std::size_t>(dcoord)]);
                    }
                    if (shift > extent)
                        throw refinement_error(
                            "displacement exceeds the grid extent; refine dt or widen it");
                    const double carried =
                        interp_slice(tab.axis1, tab.axis2, next, foot, opts.extrapolate);
                    best = std::min(best, rp.running_cost(t, x, v) * opts.dt + carried);
                }
                here[i * n2 + j] = best;
            }
    }
    return tab;
}

CrosscheckReport reduction_crosscheck(const ControlProblem& pr, const ReducedProblem& rp,
                                      const ValueTable& table,
                                      const std::vector<Path>& queries,
                                      const ValueOptions& vopts, double value_tol,
                                      double history_tol) {
    pr.validate();
    CrosscheckReport rep;
    for (const Path& q : queries) {
        // History probe: same endpoint and final time, different past.
        Path wiggled = q;
        if (q.nodes() > 2) {
            std::vector<double> flat = q.raw();
            for (int k = 1; k + 1 < q.nodes(); ++k)
                flat[static_cast<std::size_t>(k) * q.dim()] +=
                    (k % 2 == 0 ? 0.25 : -0.25);
            wiggled = Path(q.dim(), q.grid_step(), std::move(flat), q.flag());
        }
        // Detector: state-only coefficients cannot see the history, and the
        // reduced form must agree with the path form at matched endpoints.
        for (double v : pr.controls) {
            const Vec f1 = pr.dynamics(q, v);
            const Vec f2 = pr.dynamics(wiggled, v);
            const Vec fr = rp.dynamics(q.final_time(), q.final_value(), v);
            const double q1 = pr.running_cost(q, v);
            const double q2 = pr.running_cost(wiggled, v);
            const double qr = rp.running_cost(q.final_time(), q.final_value(), v);
            if (norm(sub(f1, f2)) > 1e-10 || std::fabs(q1 - q2) > 1e-10)
                throw input_error("coefficients depend on the history; "
                                  "the problem is not state-only");
            if (norm(sub(f1, fr)) > 1e-10 || std::fabs(q1 - qr) > 1e-10)
                throw input_error("reduced coefficients disagree with the path form");
        }

        CrosscheckRow row;
        row.state = q.final_value()[0];
        row.path_value = value(pr, q, vopts).value;
        row.table_value = table.at(q.final_time(), q.final_value());
        row.history_gap = std::fabs(row.path_value - value(pr, wiggled, vopts).value);
        rep.max_value_gap =
            std::max(rep.max_value_gap, std::fabs(row.path_value - row.table_value));
        rep.max_history_gap = std::max(rep.max_history_gap, row.history_gap);
        rep.rows.push_back(row);
    }
    rep.passed = rep.max_value_gap <= value_tol && rep.max_history_gap <= history_tol;
    return rep;
}

} // namespace pathctrl
