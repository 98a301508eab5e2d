#include "pathctrl/value.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pathctrl/errors.hpp"
#include "pathctrl/rng.hpp"

namespace pathctrl {

namespace {

constexpr double snap_tol = 1e-9;

int interval_count(const ControlProblem& pr, const Path& initial,
                   const ValueOptions& opts) {
    const double span = pr.horizon - initial.final_time();
    if (span < -snap_tol) throw horizon_error("initial path extends beyond the horizon");
    const auto k = std::llround(span / opts.control_step);
    if (std::fabs(k * opts.control_step - span) > snap_tol)
        throw alignment_error("[start, horizon] must be a whole number of control steps");
    return static_cast<int>(k);
}

SolveOptions solver_options(const ValueOptions& opts) {
    SolveOptions s;
    s.method = opts.method;
    s.grid_step = opts.grid_step;
    s.tol = opts.solve_tol;
    return s;
}

ControlSignal signal_from(const Path& initial, const ValueOptions& opts,
                          const ControlProblem& pr, const std::vector<int>& idx) {
    ControlSignal u;
    u.start = initial.final_time();
    u.step = opts.control_step;
    u.values.reserve(idx.size());
    for (int j : idx) u.values.push_back(pr.controls[static_cast<std::size_t>(j)]);
    return u;
}

double cost_of(const ControlProblem& pr, const Path& initial, const ValueOptions& opts,
               const ControlSignal& u) {
    const auto res = solve_state(pr, initial, u, solver_options(opts));
    return cost(pr, res.trajectory, u);
}

// Initial paths may live on a coarser grid than the solver's; they are read
// through their interpolation onto the solve grid.
Path on_solve_grid(const Path& initial, const ValueOptions& opts) {
    return std::fabs(initial.grid_step() - opts.grid_step) <= snap_tol
               ? initial
               : resample(initial, opts.grid_step);
}

} // namespace

ValueResult value(const ControlProblem& pr, const Path& raw_initial,
                  const ValueOptions& opts) {
    pr.validate();
    const Path initial = on_solve_grid(raw_initial, opts);
    const int k = interval_count(pr, initial, opts);
    const auto m = static_cast<std::int64_t>(pr.controls.size());
    ValueResult out;
    if (k == 0) {
        out.argmin = {initial.final_time(), opts.control_step, {}};
        out.value = cost_of(pr, initial, opts, out.argmin);
        return out;
    }

    // Work estimate |U|^k, saturating to avoid overflow.
    double combos = 1.0;
    for (int j = 0; j < k; ++j) combos *= static_cast<double>(m);
    std::vector<int> idx(static_cast<std::size_t>(k), 0);

    if (combos <= static_cast<double>(opts.enumeration_cap)) {
        // Odometer over index tuples in lexicographic order; strict
        // improvement keeps the smallest tuple on ties.
        double best = std::numeric_limits<double>::infinity();
        std::vector<int> best_idx = idx;
        for (;;) {
            const double c = cost_of(pr, initial, opts, signal_from(initial, opts, pr, idx));
            if (c < best) {
                best = c;
                best_idx = idx;
            }
            int pos = k - 1;
            while (pos >= 0 && idx[static_cast<std::size_t>(pos)] + 1 ==
                                   static_cast<int>(m))
                idx[static_cast<std::size_t>(pos--)] = 0;
            if (pos < 0) break;
            ++idx[static_cast<std::size_t>(pos)];
        }
        out.value = best;
        out.argmin = signal_from(initial, opts, pr, best_idx);
        out.exhaustive = true;
        return out;
    }

    // Seeded coordinate descent: sweep interval by interval, trying every
    // control value, until a full sweep brings no improvement.
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_idx;
    for (int r = 0; r < std::max(1, opts.restarts); ++r) {
        rng gen(rng::derive(opts.seed, static_cast<std::uint64_t>(r)));
        for (auto& v : idx) v = static_cast<int>(gen.uniform_int(0, m - 1));
        double local = cost_of(pr, initial, opts, signal_from(initial, opts, pr, idx));
        bool improved = true;
        while (improved) {
            improved = false;
            for (int j = 0; j < k; ++j) {
                const int keep = idx[static_cast<std::size_t>(j)];
                int pick = keep;
                for (int c = 0; c < static_cast<int>(m); ++c) {
                    if (c == keep) continue;
                    idx[static_cast<std::size_t>(j)] = c;
                    const double trial =
                        cost_of(pr, initial, opts, signal_from(initial, opts, pr, idx));
                    if (trial < local) {
                        local = trial;
                        pick = c;
                        improved = true;
                    }
                }
                idx[static_cast<std::size_t>(j)] = pick;
            }
        }
        if (local < best || (local == best && (best_idx.empty() || idx < best_idx))) {
            best = local;
            best_idx = idx;
        }
    }
    out.value = best;
    out.argmin = signal_from(initial, opts, pr, best_idx);
    out.exhaustive = false;
    return out;
}

double dpp_residual(const ControlProblem& pr, const Path& raw_initial, double s,
                    const ValueOptions& opts) {
    pr.validate();
    const Path initial = on_solve_grid(raw_initial, opts);
    const double t = initial.final_time();
    const auto j = std::llround((s - t) / opts.control_step);
    if (j < 0 || s > pr.horizon + snap_tol ||
        std::fabs(t + j * opts.control_step - s) > snap_tol)
        throw alignment_error("the split time must sit on the control grid in [t, horizon]");
    const int k_pre = static_cast<int>(j);
    const double lhs = value(pr, initial, opts).value;

    // Splitting at the start time leaves an empty head: no running cost is
    // accumulated and the reached prefix is the initial path itself.
    if (k_pre == 0) return std::fabs(lhs - value(pr, initial, opts).value);

    const auto m = static_cast<std::int64_t>(pr.controls.size());
    double combos = 1.0;
    for (int i = 0; i < k_pre; ++i) combos *= static_cast<double>(m);
    if (combos > static_cast<double>(opts.enumeration_cap))
        throw budget_error("prefix enumeration exceeds the enumeration cap");

    // Truncated problem on [t, s]: run the dynamics to s, pay the running
    // cost there, then charge the value from the reached prefix.
    ControlProblem head = pr;
    head.horizon = t + k_pre * opts.control_step; // snapped form of s
    head.terminal_cost = [](const Path&) { return 0.0; };

    double rhs = std::numeric_limits<double>::infinity();
    std::vector<int> idx(static_cast<std::size_t>(k_pre), 0);
    for (;;) {
        const auto u = signal_from(initial, opts, pr, idx);
        const auto res = solve_state(head, initial, u, solver_options(opts));
        const double running = cost(head, res.trajectory, u);
        const double tail = value(pr, res.trajectory.path, opts).value;
        rhs = std::min(rhs, running + tail);
        if (k_pre == 0) break;
        int pos = k_pre - 1;
        while (pos >= 0 &&
               idx[static_cast<std::size_t>(pos)] + 1 == static_cast<int>(m))
            idx[static_cast<std::size_t>(pos--)] = 0;
        if (pos < 0) break;
        ++idx[static_cast<std::size_t>(pos)];
    }
    return std::fabs(lhs - rhs);
}

RegularityReport value_regularity_check(
    const ControlProblem& pr, const std::vector<std::pair<Path, Path>>& pairs,
    const ValueOptions& opts) {
    RegularityReport rep;
    const double c4 = value_constant(pr.lipschitz, pr.horizon);
    for (const auto& [p, q] : pairs) {
        const double vp = value(pr, p, opts).value;
        const double vq = value(pr, q, opts).value;
        RegularityRow lip;
        lip.lhs = std::fabs(vp - vq);
        lip.rhs = c4 * (1.0 + std::max(sup_norm(p), sup_norm(q))) * d_infinity(p, q);
        lip.passed = lip.lhs <= lip.rhs;
        rep.lipschitz.push_back(lip);

        for (const auto* path : {&p, &q}) {
            RegularityRow bd;
            bd.lhs = std::fabs(path == &p ? vp : vq);
            bd.rhs = c4 * (1.0 + sup_norm(*path));
            bd.passed = bd.lhs <= bd.rhs;
            rep.boundedness.push_back(bd);
        }
        rep.passed = rep.passed && lip.passed && rep.boundedness.rbegin()[0].passed &&
                     rep.boundedness.rbegin()[1].passed;
    }
    return rep;
}

} // namespace pathctrl
