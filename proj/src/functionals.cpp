#include "pathctrl/functionals.hpp"

#include <cmath>

#include "pathctrl/errors.hpp"

namespace pathctrl {

namespace {

constexpr double grid_snap = 1e-9;

// delta = p - anchor flat-extended to p's final time, sampled on p's grid.
// Kept as raw accumulators (A = sup |delta|^2 over all nodes, B at the
// final node) so proxy evaluations stay allocation-free.
struct DeltaStats {
    double sup_sq = 0.0;   // A
    double final_sq = 0.0; // B
    Vec final_delta;       // delta(t)
};

DeltaStats delta_stats(const Path& p, const Path* anchor) {
    if (anchor) {
        if (anchor->dim() != p.dim()) throw alignment_error("anchor dimension mismatch");
        if (std::fabs(anchor->grid_step() - p.grid_step()) > grid_snap)
            throw alignment_error("anchor grid step mismatch");
        if (anchor->nodes() > p.nodes())
            throw input_error("anchor final time exceeds the path's final time");
    }
    DeltaStats st;
    st.final_delta.assign(p.dim(), 0.0);
    const int last_anchor = anchor ? anchor->nodes() - 1 : 0;
    for (int k = 0; k < p.nodes(); ++k) {
        const auto a = p.sample(k);
        double sq = 0.0;
        for (int i = 0; i < p.dim(); ++i) {
            const double b = anchor ? (*anchor).sample(std::min(k, last_anchor))[i] : 0.0;
            const double d = a[i] - b;
            sq += d * d;
            if (k + 1 == p.nodes()) st.final_delta[i] = d;
        }
        st.sup_sq = std::max(st.sup_sq, sq);
        if (k + 1 == p.nodes()) st.final_sq = sq;
    }
    return st;
}

double proxy_from(const DeltaStats& st) {
    if (st.sup_sq <= 0.0) return 0.0;
    const double gap = st.sup_sq - st.final_sq;
    return gap * gap / st.sup_sq;
}

Vec gradient_from(const DeltaStats& st) {
    Vec g(st.final_delta.size(), 0.0);
    if (st.sup_sq <= 0.0) return g;
    const double coef = -4.0 * (st.sup_sq - st.final_sq) / st.sup_sq;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = coef * st.final_delta[i];
    return g;
}

} // namespace

double sup_proxy(const Path& p) { return proxy_from(delta_stats(p, nullptr)); }

double sup_proxy(const Path& p, const Path& anchor) {
    return proxy_from(delta_stats(p, &anchor));
}

Vec sup_proxy_gradient(const Path& p) { return gradient_from(delta_stats(p, nullptr)); }

Vec sup_proxy_gradient(const Path& p, const Path& anchor) {
    return gradient_from(delta_stats(p, &anchor));
}

double pinned_sup_proxy(double pin_weight, const Path& p) {
    const auto st = delta_stats(p, nullptr);
    return proxy_from(st) + pin_weight * st.final_sq;
}

double pinned_sup_proxy(double pin_weight, const Path& p, const Path& anchor) {
    const auto st = delta_stats(p, &anchor);
    return proxy_from(st) + pin_weight * st.final_sq;
}

double pinned_sup_proxy_pair(double pin_weight, const Path& p, const Path& q) {
    const Path& shorter = p.nodes() <= q.nodes() ? p : q;
    const Path& longer = p.nodes() <= q.nodes() ? q : p;
    return pinned_sup_proxy(pin_weight, longer, shorter);
}

double anchored_energy(const Path& p, const Path& anchor) { return h_norm_sq(p, anchor); }

EquivalenceSlack equivalence_slack(const Path& p) {
    const auto st = delta_stats(p, nullptr);
    const double s_plus_b = proxy_from(st) + st.final_sq;
    return {s_plus_b - equiv_lower_ratio() * st.sup_sq,
            equiv_upper_ratio() * st.sup_sq - s_plus_b};
}

double equiv_lower_ratio() { return 0.5 * (3.0 - std::sqrt(5.0)); }
double equiv_upper_ratio() { return 2.0; }

double quasi_subadditivity_gap(double pin_weight, const Path& p, const Path& q) {
    const Path sum = path_add(p, q);
    return 2.0 * pinned_sup_proxy(pin_weight, p) + 2.0 * pinned_sup_proxy(pin_weight, q) -
           pinned_sup_proxy(pin_weight, sum);
}

PathFunctional make_sup_proxy_functional(Path anchor) {
    PathFunctional f;
    f.name = "sup_proxy";
    f.eval = [anchor](const Path& p) { return sup_proxy(p, anchor); };
    // Flat extension repeats both the path's and the anchor's final values,
    // so neither A nor B moves: the time derivative vanishes identically.
    f.time_derivative = [](const Path&) { return 0.0; };
    f.space_gradient = [anchor](const Path& p) { return sup_proxy_gradient(p, anchor); };
    return f;
}

PathFunctional make_pinned_proxy_functional(double pin_weight, Path anchor) {
    PathFunctional f;
    f.name = "pinned_sup_proxy";
    f.eval = [pin_weight, anchor](const Path& p) {
        return pinned_sup_proxy(pin_weight, p, anchor);
    };
    f.time_derivative = [](const Path&) { return 0.0; };
    f.space_gradient = [pin_weight, anchor](const Path& p) {
        const auto st = delta_stats(p, &anchor);
        Vec g = gradient_from(st);
        for (std::size_t i = 0; i < g.size(); ++i)
            g[i] += 2.0 * pin_weight * st.final_delta[i];
        return g;
    };
    return f;
}

PathFunctional make_touch_penalty(Path anchor) {
    const double pin_time = anchor.final_time();
    PathFunctional f;
    f.name = "touch_penalty";
    f.eval = [anchor, pin_time](const Path& p) {
        const double dt = p.final_time() - pin_time;
        return dt * dt + h_norm_sq(p, anchor);
    };
    f.time_derivative = [anchor, pin_time](const Path& p) {
        const auto x = p.final_value();
        const auto a = anchor.final_value();
        double sq = 0.0;
        for (int i = 0; i < p.dim(); ++i) sq += (x[i] - a[i]) * (x[i] - a[i]);
        return 2.0 * (p.final_time() - pin_time) + sq;
    };
    f.space_gradient = [](const Path& p) { return Vec(p.dim(), 0.0); };
    return f;
}

PathFunctional make_anchored_energy_functional(Path anchor) {
    PathFunctional f;
    f.name = "anchored_energy";
    f.eval = [anchor](const Path& p) { return h_norm_sq(p, anchor); };
    // Flat extension appends one constant slab of integrand, so the forward
    // quotient is exactly the squared gap at the frozen values.
    f.time_derivative = [anchor](const Path& p) {
        const auto x = p.final_value();
        const auto a = anchor.final_value();
        double sq = 0.0;
        for (int i = 0; i < p.dim(); ++i) sq += (x[i] - a[i]) * (x[i] - a[i]);
        return sq;
    };
    // The integral never sees the final sample alone (measure zero for the
    // step interpolant), so the space gradient vanishes.
    f.space_gradient = [](const Path& p) { return Vec(p.dim(), 0.0); };
    return f;
}

} // namespace pathctrl
