#include "pathctrl/control.hpp"

#include <algorithm>
#include <cmath>

#include "pathctrl/errors.hpp"

namespace pathctrl {

namespace {
constexpr double snap_tol = 1e-9;
}

void ControlProblem::validate() const {
    if (dim < 1) throw input_error("problem dimension must be >= 1");
    if (!(horizon > 0.0)) throw input_error("horizon must be positive");
    if (!(lipschitz > 0.0)) throw input_error("the Lipschitz constant must be positive");
    if (controls.empty()) throw contract_error("the control set must be non-empty");
    if (!dynamics || !running_cost || !terminal_cost)
        throw contract_error("dynamics, running_cost and terminal_cost are all required");
}

double ControlSignal::at(double s) const {
    if (values.empty()) throw contract_error("empty control signal has no value");
    // Right-open intervals; the nudge absorbs roundoff at interval starts.
    auto j = static_cast<std::int64_t>(std::floor((s - start) / step + 1e-9));
    j = std::clamp<std::int64_t>(j, 0, static_cast<std::int64_t>(values.size()) - 1);
    return values[static_cast<std::size_t>(j)];
}

namespace {

struct SolveFrame {
    int start_node = 0;  // node index of the initial path's final time
    int last_node = 0;   // node index of the horizon
    int per_interval = 1; // state nodes per control interval
};

SolveFrame check_frame(const ControlProblem& pr, const Path& initial,
                       const ControlSignal& u, const SolveOptions& opts) {
    pr.validate();
    if (initial.dim() != pr.dim) throw alignment_error("initial path dimension mismatch");
    if (std::fabs(initial.grid_step() - opts.grid_step) > snap_tol)
        throw alignment_error("initial path grid step must equal the solver grid step");
    const double h = opts.grid_step;
    if (!(h > 0.0)) throw input_error("solver grid step must be positive");
    SolveFrame fr;
    fr.start_node = initial.nodes() - 1;
    fr.last_node = static_cast<int>(std::llround(pr.horizon / h));
    if (std::fabs(fr.last_node * h - pr.horizon) > snap_tol)
        throw alignment_error("horizon does not sit on the solver grid");
    if (fr.start_node > fr.last_node)
        throw horizon_error("initial path extends beyond the horizon");
    if (std::fabs(u.start - initial.final_time()) > snap_tol)
        throw alignment_error("control signal must start at the initial path's final time");
    if (fr.start_node < fr.last_node) {
        fr.per_interval = static_cast<int>(std::llround(u.step / h));
        if (fr.per_interval < 1 || std::fabs(fr.per_interval * h - u.step) > snap_tol)
            throw alignment_error("control step must be a whole number of grid steps");
        const auto needed = (fr.last_node - fr.start_node + fr.per_interval - 1) /
                            fr.per_interval;
        if (static_cast<std::int64_t>(u.values.size()) != needed ||
            std::fabs(u.end() - pr.horizon) > snap_tol)
            throw alignment_error("control signal must cover exactly [start, horizon]");
    } else if (!u.values.empty()) {
        throw alignment_error("control signal must be empty when start == horizon");
    }
    return fr;
}

// Control value governing the state segment [node, node+1).
double control_at_node(const ControlSignal& u, const SolveFrame& fr, int node) {
    const auto j = (node - fr.start_node) / fr.per_interval;
    return u.values[static_cast<std::size_t>(
        std::min<std::int64_t>(j, static_cast<std::int64_t>(u.values.size()) - 1))];
}

Path path_from_flat(const Path& like, std::vector<double> flat, int nodes) {
    flat.resize(static_cast<std::size_t>(nodes) * like.dim());
    return {like.dim(), like.grid_step(), std::move(flat), like.flag()};
}

} // namespace

SolveResult solve_state(const ControlProblem& pr, const Path& initial,
                        const ControlSignal& u, const SolveOptions& opts) {
    const auto fr = check_frame(pr, initial, u, opts);
    const double h = opts.grid_step;
    const int d = pr.dim;
    SolveResult out{Trajectory{initial, initial.final_time()}, 0, {}};
    if (fr.start_node == fr.last_node) return out;

    if (opts.method == SolveMethod::euler) {
        std::vector<double> flat = initial.raw();
        flat.reserve(static_cast<std::size_t>(fr.last_node + 1) * d);
        for (int k = fr.start_node; k < fr.last_node; ++k) {
            const Path prefix = path_from_flat(initial, flat, k + 1);
            const Vec f = pr.dynamics(prefix, control_at_node(u, fr, k));
            if (static_cast<int>(f.size()) != d)
                throw contract_error("dynamics returned a vector of wrong dimension");
            for (int i = 0; i < d; ++i)
                flat.push_back(flat[static_cast<std::size_t>(k) * d + i] + h * f[i]);
        }
        out.trajectory.path = {d, h, std::move(flat), initial.flag()};
        return out;
    }

    // Fixed-point iteration of the integral map.  Start from the flat
    // extension; each sweep integrates the dynamics along the previous
    // iterate with left-point quadrature.
    const double beta = 2.0 * pr.lipschitz;
    std::vector<double> current = flat_extend(initial, pr.horizon).raw();
    std::vector<double> next(current.size());
    double prev_dist = -1.0;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        std::copy(current.begin(), current.begin() + (fr.start_node + 1) * d, next.begin());
        Vec running(initial.final_value().begin(), initial.final_value().end());
        for (int k = fr.start_node; k < fr.last_node; ++k) {
            const Path prefix = path_from_flat(initial, current, k + 1);
            const Vec f = pr.dynamics(prefix, control_at_node(u, fr, k));
            if (static_cast<int>(f.size()) != d)
                throw contract_error("dynamics returned a vector of wrong dimension");
            for (int i = 0; i < d; ++i) {
                running[i] += h * f[i];
                next[static_cast<std::size_t>(k + 1) * d + i] = running[i];
            }
        }
        double dist = 0.0;
        for (int k = fr.start_node + 1; k <= fr.last_node; ++k) {
            double node_gap = 0.0;
            for (int i = 0; i < d; ++i) {
                const double g = next[static_cast<std::size_t>(k) * d + i] -
                                 current[static_cast<std::size_t>(k) * d + i];
                node_gap += g * g;
            }
            const double w = std::exp(-beta * (k - fr.start_node) * h);
            dist = std::max(dist, w * std::sqrt(node_gap));
        }
        std::swap(current, next);
        out.iterations = it;
        if (prev_dist > 0.0) out.contraction_ratios.push_back(dist / prev_dist);
        if (dist <= opts.tol) {
            out.trajectory.path = {d, h, std::move(current), initial.flag()};
            return out;
        }
        prev_dist = dist;
    }
    throw solver_error("fixed-point iteration did not reach tolerance within " +
                       std::to_string(opts.max_iterations) + " sweeps");
}

double cost(const ControlProblem& pr, const Trajectory& X, const ControlSignal& u) {
    pr.validate();
    const Path& full = X.path;
    if (std::fabs(full.final_time() - pr.horizon) > snap_tol)
        throw alignment_error("trajectory does not reach the horizon");
    const int start = full.index_of(X.start_time);
    const int last = full.nodes() - 1;
    const double h = full.grid_step();
    double acc = 0.0;
    if (start < last) {
        SolveFrame fr;
        fr.start_node = start;
        fr.last_node = last;
        fr.per_interval = static_cast<int>(std::llround(u.step / h));
        if (fr.per_interval < 1 || std::fabs(fr.per_interval * h - u.step) > snap_tol)
            throw alignment_error("control step must be a whole number of grid steps");
        // Per-segment trapezoid with the segment's control value; both
        // endpoint evaluations of a segment use that value, so splitting
        // the integral at any control node is exact.
        double left_q = pr.running_cost(restrict(full, full.time(start)),
                                        control_at_node(u, fr, start));
        for (int k = start; k < last; ++k) {
            const double v = control_at_node(u, fr, k);
            const Path next_prefix = restrict(full, full.time(k + 1));
            const double right_q = pr.running_cost(next_prefix, v);
            acc += 0.5 * h * (left_q + right_q);
            left_q = (k + 1 < last)
                         ? pr.running_cost(next_prefix, control_at_node(u, fr, k + 1))
                         : right_q;
        }
    }
    return acc + pr.terminal_cost(full);
}

double growth_constant(double lipschitz, double horizon) {
    return (1.0 + lipschitz * horizon) * std::exp(lipschitz * horizon);
}

double dependence_constant(double lipschitz, double horizon) {
    const double c1 = growth_constant(lipschitz, horizon);
    return (1.0 + lipschitz * (1.0 + c1)) * std::exp(lipschitz * horizon);
}

double step_constant(double lipschitz, double horizon) {
    return lipschitz * (1.0 + growth_constant(lipschitz, horizon));
}

double value_constant(double lipschitz, double horizon) {
    const double c1 = growth_constant(lipschitz, horizon);
    const double c2 = dependence_constant(lipschitz, horizon);
    return (horizon + 1.0) * lipschitz * (2.0 * c2 + 1.0 + c1) +
           lipschitz * (1.0 + c1);
}

EstimateRow growth_bound_check(const ControlProblem& pr, const Path& initial,
                               const ControlSignal& u, const SolveOptions& opts) {
    const auto res = solve_state(pr, initial, u, opts);
    EstimateRow row;
    row.observed = sup_norm(res.trajectory.path);
    row.bound = growth_constant(pr.lipschitz, pr.horizon) * (1.0 + sup_norm(initial));
    row.passed = row.observed <= row.bound;
    return row;
}

EstimateRow dependence_check(const ControlProblem& pr, const Path& initial1,
                             const Path& initial2, const ControlSignal& u,
                             const SolveOptions& opts) {
    if (initial1.final_time() > initial2.final_time() + snap_tol)
        throw input_error("the first initial path must not start later than the second");
    // One signal on [t1, horizon] drives both evolutions; the later start
    // consumes its suffix, so the shift must sit on the control grid.
    const auto skip = std::llround(
        (initial2.final_time() - initial1.final_time()) / u.step);
    if (std::fabs(initial1.final_time() + skip * u.step - initial2.final_time()) > snap_tol)
        throw alignment_error("the later start must sit on the control grid");
    ControlSignal u2{initial2.final_time(), u.step, {}};
    if (skip < static_cast<std::int64_t>(u.values.size()))
        u2.values.assign(u.values.begin() + skip, u.values.end());
    const auto r1 = solve_state(pr, initial1, u, opts);
    const auto r2 = solve_state(pr, initial2, u2, opts);
    const Path& a = r1.trajectory.path;
    const Path& b = r2.trajectory.path;
    EstimateRow row;
    for (int k = 0; k < a.nodes(); ++k)
        row.observed = std::max(row.observed, norm(sub(a.sample(k), b.sample(k))));
    const Path ext = flat_extend(initial1, initial2.final_time());
    double gap = 0.0;
    for (int k = 0; k < ext.nodes(); ++k)
        gap = std::max(gap, norm(sub(ext.sample(k), initial2.sample(k))));
    row.bound = dependence_constant(pr.lipschitz, pr.horizon) *
                (gap + (1.0 + sup_norm(initial1)) *
                           (initial2.final_time() - initial1.final_time()));
    row.passed = row.observed <= row.bound;
    return row;
}

EstimateRow step_bound_check(const ControlProblem& pr, const Path& initial,
                             const ControlSignal& u, const SolveOptions& opts) {
    const auto res = solve_state(pr, initial, u, opts);
    const Path& p = res.trajectory.path;
    const int start = p.index_of(initial.final_time());
    EstimateRow row;
    for (int k = start; k + 1 < p.nodes(); ++k)
        row.observed = std::max(
            row.observed, norm(sub(p.sample(k + 1), p.sample(k))) / p.grid_step());
    row.bound = step_constant(pr.lipschitz, pr.horizon) * (1.0 + sup_norm(initial));
    row.passed = row.observed <= row.bound;
    return row;
}

namespace {

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

std::function<double(const Path&, double)> make_running(const std::string& kind) {
    if (kind == "zero")
        return [](const Path&, double) { return 0.0; };
    if (kind == "control_sq")
        return [](const Path&, double v) { return v * v; };
    if (kind == "state_norm")
        return [](const Path& p, double) { return norm(p.final_value()); };
    throw input_error("unknown running cost kind '" + kind + "'");
}

std::function<double(const Path&)> make_terminal(const std::string& kind) {
    if (kind == "endpoint")
        return [](const Path& p) { return p.final_value()[0]; };
    if (kind == "endpoint_abs")
        return [](const Path& p) { return norm(p.final_value()); };
    if (kind == "running_max")
        return [](const Path& p) { return sup_norm(p); };
    throw input_error("unknown terminal cost kind '" + kind + "'");
}

} // namespace

ControlProblem make_family(const std::string& family, const FamilyParams& prm) {
    ControlProblem pr;
    pr.name = family;
    pr.dim = prm.dim;
    pr.horizon = prm.horizon;
    pr.controls = prm.controls;
    const double u_max = max_abs(prm.controls);
    const double a = prm.drift_gain;
    const double b = prm.control_gain;

    double feature_gain = std::fabs(a); // sup-norm Lipschitz factor of the path feature
    if (family == "constant_field") {
        if (a != 0.0) throw input_error("constant_field has no drift term; set drift_gain 0");
        feature_gain = 0.0;
        pr.dynamics = [b, d = prm.dim](const Path&, double v) {
            Vec f(d, 0.0);
            f[0] = b * v;
            return f;
        };
    } else if (family == "endpoint_feedback") {
        pr.dynamics = [a, b, d = prm.dim](const Path& p, double v) {
            const auto x = p.final_value();
            Vec f(d);
            for (int i = 0; i < d; ++i) f[i] = a * x[i];
            f[0] += b * v;
            return f;
        };
    } else if (family == "lagged_feedback") {
        if (!(prm.delay > 0.0)) throw input_error("lagged_feedback needs a positive delay");
        pr.dynamics = [a, b, tau = prm.delay, d = prm.dim](const Path& p, double v) {
            const Vec x = p.value_at(std::max(0.0, p.final_time() - tau));
            Vec f(d);
            for (int i = 0; i < d; ++i) f[i] = a * x[i];
            f[0] += b * v;
            return f;
        };
    } else if (family == "average_feedback") {
        feature_gain = std::fabs(a) * prm.horizon;
        pr.dynamics = [a, b, d = prm.dim](const Path& p, double v) {
            Vec f(d, 0.0);
            // Left-point integral of the path over [0, final_time).
            for (int k = 0; k + 1 < p.nodes(); ++k) {
                const auto x = p.sample(k);
                for (int i = 0; i < d; ++i) f[i] += x[i];
            }
            for (int i = 0; i < d; ++i) f[i] = a * p.grid_step() * f[i];
            f[0] += b * v;
            return f;
        };
    } else {
        throw input_error("unknown problem family '" + family + "'");
    }

    pr.running_cost = make_running(prm.running);
    pr.terminal_cost = make_terminal(prm.terminal);

    double lip = std::max(feature_gain, std::fabs(b) * u_max); // dynamics
    if (prm.running == "control_sq") lip = std::max(lip, u_max * u_max);
    if (prm.running == "state_norm") lip = std::max(lip, 1.0);
    lip = std::max(lip, 1.0); // terminal kinds are all 1-Lipschitz with unit growth
    pr.lipschitz = lip;
    pr.validate();
    return pr;
}

std::vector<std::string> family_names() {
    return {"constant_field", "endpoint_feedback", "lagged_feedback", "average_feedback"};
}

bool family_is_state_only(const std::string& family, const FamilyParams& prm) {
    if (family == "constant_field" || family == "endpoint_feedback")
        return prm.terminal != "running_max";
    return false;
}

} // namespace pathctrl
