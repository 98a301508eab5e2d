#include "doctest.h"

#include <cmath>

#include "pathctrl/functionals.hpp"
#include "pathctrl/path.hpp"
#include "pathctrl/rng.hpp"

using namespace pathctrl;

TEST_CASE("sup proxy hand-computed values") {
    // delta = (2, 1): A = 4, B = 1, S = (4-1)^2/4, gradient -4(A-B)delta(t)/A.
    const Path p = Path::from_values(0.5, {2.0, 1.0});
    CHECK(sup_proxy(p) == doctest::Approx(2.25));
    CHECK(sup_proxy_gradient(p) == Vec{-3.0});
    CHECK(pinned_sup_proxy(2.0, p) == doctest::Approx(4.25));

    // Zero path: the 0/0 branch is defined as 0.
    const Path z = Path::constant({0.0}, 0.5, 0.5);
    CHECK(sup_proxy(z) == 0.0);
    CHECK(sup_proxy_gradient(z) == Vec{0.0});

    // Final value attains the sup: A = B, S = 0, gradient 0 (the formula's
    // coefficient vanishes, matching the true derivative at the kink).
    const Path m = Path::from_values(0.5, {1.0, 2.0});
    CHECK(sup_proxy(m) == 0.0);
    CHECK(sup_proxy_gradient(m) == Vec{0.0});
}

TEST_CASE("sup proxy measures against the flat-extended anchor") {
    const Path p = Path::from_values(0.5, {2.0, 1.0});
    const Path anchor = Path::constant({1.0}, 0.0, 0.5);
    // delta = (1, 0): A = 1, B = 0, S = 1; gradient 0 since delta(t) = 0.
    CHECK(sup_proxy(p, anchor) == doctest::Approx(1.0));
    CHECK(sup_proxy_gradient(p, anchor) == Vec{0.0});
}

TEST_CASE("sup proxy is invariant under flat extension") {
    const Path p = Path::from_values(0.25, {0.5, -1.0, 0.25});
    const Path ext = flat_extend(p, 2.0);
    CHECK(sup_proxy(ext) == sup_proxy(p)); // exactly: A and B are unchanged
    const auto f = make_sup_proxy_functional(Path::constant({0.0}, 0.0, 0.25));
    CHECK(f.time_derivative(p) == 0.0);
}

TEST_CASE("norm equivalence slack formulas") {
    const Path p = Path::from_values(0.5, {2.0, 1.0});
    const auto slack = equivalence_slack(p);
    const double c_lo = (3.0 - std::sqrt(5.0)) / 2.0;
    // S + B = 3.25 against A = 4, recomputed from scratch.
    CHECK(slack.lower == doctest::Approx(3.25 - c_lo * 4.0));
    CHECK(slack.upper == doctest::Approx(2.0 * 4.0 - 3.25));
    CHECK(equiv_lower_ratio() == doctest::Approx(c_lo));
    CHECK(equiv_upper_ratio() == 2.0);

    // The worst ratio of (S+B)/A over B in [0, A] is 3/4, attained at
    // B = A/2 — safely above the guaranteed lower ratio.
    double worst = 10.0;
    for (int i = 0; i <= 1000; ++i) {
        const double b = i / 1000.0; // A = 1
        const double s = (1.0 - b) * (1.0 - b);
        worst = std::min(worst, s + b);
    }
    CHECK(worst == doctest::Approx(0.75).epsilon(1e-5));
    CHECK(worst > c_lo);
}

TEST_CASE("doubling inequality hand case and random sweep") {
    const Path p = Path::from_values(0.5, {2.0, 1.0}); // U_2 = 4.25
    const Path q = Path::from_values(0.5, {0.0, 1.0}); // A=B=1, S=0, U_2 = 2
    // p+q = (2, 2): A = B = 4, S = 0, U_2 = 8; gap = 2*4.25 + 2*2 - 8.
    CHECK(quasi_subadditivity_gap(2.0, p, q) == doctest::Approx(4.5));

    CompactClass c;
    c.start_time = 0.25;
    c.horizon = 1.0;
    c.sup_bound = 1.5;
    c.slope_gain = 3.0;
    c.time_step = 0.25;
    c.value_step = 0.25;
    for (int i = 0; i < 200; ++i) {
        auto two = lattice_sample(c, rng::derive(7, i), 2);
        if (two[0].nodes() < two[1].nodes())
            two[0] = flat_extend(two[0], two[1].final_time());
        else if (two[1].nodes() < two[0].nodes())
            two[1] = flat_extend(two[1], two[0].final_time());
        for (double pin : {2.0, 3.0, 10.0})
            CHECK(quasi_subadditivity_gap(pin, two[0], two[1]) >= -1e-12);
    }
}

TEST_CASE("two-path proxy orders by final time and extends the shorter") {
    const Path longer = Path::from_values(0.25, {1.0, 0.5, 0.25});
    const Path shorter = Path::from_values(0.25, {0.5, 0.5});
    const double direct =
        pinned_sup_proxy(2.0, path_sub(longer, flat_extend(shorter, 0.5)));
    CHECK(pinned_sup_proxy_pair(2.0, longer, shorter) == doctest::Approx(direct));
    CHECK(pinned_sup_proxy_pair(2.0, shorter, longer) == doctest::Approx(direct));
}

TEST_CASE("anchored energy functional carries its derivatives") {
    const Path anchor = Path::constant({0.5}, 0.0, 0.25);
    const auto f = make_anchored_energy_functional(anchor);
    const Path p = Path::from_values(0.25, {0.5, 1.5});
    CHECK(f.eval(p) == doctest::Approx(h_norm_sq(p, anchor)));
    CHECK(f.time_derivative(p) == doctest::Approx(1.0)); // |1.5 - 0.5|^2
    CHECK(f.space_gradient(p) == Vec{0.0});
}

TEST_CASE("touch penalty vanishes to second order at its reference") {
    const Path anchor = Path::constant({0.25}, 0.5, 0.25);
    const auto pen = make_touch_penalty(anchor);
    CHECK(pen.eval(anchor) == 0.0);
    CHECK(pen.time_derivative(anchor) == doctest::Approx(0.0));
    CHECK(pen.space_gradient(anchor) == Vec{0.0});

    // Positive away from the reference, in both time and value.  (A final
    // node moved on a continuous path is felt through the last trapezoid
    // slab; a cadlag bump would not be, but search pools are continuous.)
    CHECK(pen.eval(flat_extend(anchor, 1.0)) > 0.0);
    CHECK(pen.eval(Path::from_values(0.25, {0.25, 0.25, 0.55})) > 0.0);
    CHECK(pen.eval(Path::constant({0.25}, 0.75, 0.25)) > 0.0);
}
