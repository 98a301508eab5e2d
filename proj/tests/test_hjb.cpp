#include "doctest.h"

#include <cmath>

#include "pathctrl/errors.hpp"
#include "pathctrl/functionals.hpp"
#include "pathctrl/hjb.hpp"

using namespace pathctrl;

namespace {

ControlProblem drive_problem(const std::string& terminal = "endpoint") {
    FamilyParams prm;
    prm.terminal = terminal;
    return make_family("constant_field", prm);
}

// Closed-form candidate for the symmetric drive: v = x1 - (T - s).
PathFunctional drive_candidate(double horizon) {
    return make_cylinder(
        "drive_value",
        [horizon](double s, CVecView x) { return x[0] - (horizon - s); },
        [](double, CVecView) { return 1.0; },
        [](double, CVecView x) {
            Vec g(x.size(), 0.0);
            g[0] = 1.0;
            return g;
        });
}

} // namespace

TEST_CASE("hamiltonian minimises over the control set") {
    FamilyParams prm;
    prm.controls = {-1.0, 0.0, 1.0};
    prm.running = "control_sq";
    const auto pr = make_family("constant_field", prm);
    const Path p = Path::constant({0.0}, 0.5, 0.25);

    // costate 0.5: candidates 1-0.5, 0, 1+0.5 -> 0 at u = 0.
    CHECK(hamiltonian(pr, p, Vec{0.5}) == doctest::Approx(0.0));
    // costate 3: candidates 1-3, 0, 1+3 -> -2 at u = -1.
    CHECK(hamiltonian(pr, p, Vec{3.0}) == doctest::Approx(-2.0));

    // Without running cost the drive gives -|costate|.
    const auto plain = drive_problem();
    CHECK(hamiltonian(plain, p, Vec{-2.5}) == doctest::Approx(-2.5));
}

TEST_CASE("the closed-form candidate solves the equation pathwise") {
    const auto pr = drive_problem();
    const auto v = drive_candidate(pr.horizon);
    for (const Path& p : {Path::constant({0.2}, 0.5, 0.25),
                          Path::from_values(0.25, {0.0, 0.5, 0.25}),
                          Path::constant({-0.4}, 1.0, 0.25)})
        CHECK(std::fabs(phjb_residual(pr, v, p)) < 1e-12);

    // A wrong candidate leaves a visible defect.
    const auto off = combine("tilted", 1.0, v, 0.2,
                             make_running_integral("drift", [](CVecView) {
                                 return 1.0;
                             }));
    CHECK(std::fabs(phjb_residual(pr, off, Path::constant({0.2}, 0.5, 0.25))) > 0.1);
}

TEST_CASE("terminal condition check on the compact class") {
    const auto pr = drive_problem();
    CompactClass c;
    c.start_time = 0.5;
    c.horizon = 1.0;
    c.sup_bound = 0.6;
    c.time_step = 0.25;
    c.value_step = 0.3;
    c.slope_gain = 10.0;

    CHECK(terminal_check(pr, drive_candidate(pr.horizon), c, 3, 100, 1e-12).passed);

    auto shifted = drive_candidate(pr.horizon);
    auto base = shifted.eval;
    shifted.eval = [base](const Path& p) { return base(p) + 0.1; };
    const auto rep = terminal_check(pr, shifted, c, 3, 100, 1e-12);
    CHECK_FALSE(rep.passed);
    CHECK(rep.max_gap == doctest::Approx(0.1));
}

TEST_CASE("touching search maximises over the class lattice") {
    CompactClass c;
    c.start_time = 0.25;
    c.horizon = 0.5;
    c.sup_bound = 0.55;
    c.time_step = 0.25;
    c.value_step = 0.25;
    c.slope_gain = 10.0;

    // w peaks at final value 0.3; the nearest lattice level is 0.25.
    auto w = [](const Path& p) {
        const double x = p.final_value()[0];
        return -(x - 0.3) * (x - 0.3);
    };
    PathFunctional zero;
    zero.name = "zero";
    zero.eval = [](const Path&) { return 0.0; };
    zero.time_derivative = zero.eval;
    zero.space_gradient = [](const Path& p) { return Vec(p.dim(), 0.0); };

    const auto tp = find_touching_max(w, zero, c, TouchMode::from_above, TouchOptions{});
    CHECK(tp.exhaustive);
    CHECK(tp.path.final_value()[0] == doctest::Approx(0.25));
    CHECK(tp.extremum == doctest::Approx(-0.0025));
}

TEST_CASE("one-sided tests are vacuous off the interior") {
    // sup_bound equal to the only admissible level magnitude: the maximiser
    // sits on the boundary, so the outcome is not_applicable but passing.
    const auto pr = drive_problem();
    CompactClass c;
    c.start_time = 1.0; // only final time == horizon: never interior
    c.horizon = 1.0;
    c.sup_bound = 0.55;
    c.time_step = 0.25;
    c.value_step = 0.25;
    c.slope_gain = 10.0;

    ValueOptions vo;
    vo.control_step = 0.25;
    vo.grid_step = 0.05;
    auto w = [&](const Path& p) { return value(pr, p, vo).value; };
    const auto rep = viscosity_test(pr, w, drive_candidate(pr.horizon), c,
                                    TouchMode::from_above, 1e-8, TouchOptions{});
    CHECK(rep.outcome == TouchOutcome::not_applicable);
    CHECK(rep.passed);
}

TEST_CASE("pinned one-sided tests are decisive at the anchor") {
    const auto pr = drive_problem();
    CompactClass c;
    c.start_time = 0.5;
    c.horizon = 1.0;
    c.sup_bound = 0.6;
    c.time_step = 0.25;
    c.value_step = 0.3;
    c.slope_gain = step_constant(pr.lipschitz, pr.horizon);

    ValueOptions vo;
    vo.control_step = 0.25;
    vo.grid_step = 0.05;
    auto w = [&](const Path& p) { return value(pr, p, vo).value; };

    const auto v = drive_candidate(pr.horizon);
    const auto pen = make_touch_penalty(Path::constant({0.0}, c.start_time, c.time_step));

    const auto sub = viscosity_test(pr, w, combine("v_plus_pen", 1.0, v, 1.0, pen), c,
                                    TouchMode::from_above, 1e-8, TouchOptions{});
    CHECK(sub.outcome == TouchOutcome::satisfied);
    CHECK(sub.exhaustive);
    CHECK(sub.touching_path.final_time() == doctest::Approx(c.start_time));
    CHECK(std::fabs(sub.inequality_value) < 1e-9);

    const auto super = viscosity_test(pr, w, combine("neg_v_plus_pen", -1.0, v, 1.0, pen),
                                      c, TouchMode::from_below, 1e-8, TouchOptions{});
    CHECK(super.outcome == TouchOutcome::satisfied);
    CHECK(std::fabs(super.inequality_value) < 1e-9);
}

TEST_CASE("semi-lagrangian sweep reproduces the shortest-time profile") {
    // F = u, U = {-1,0,1}, terminal |x|: V(t,x) = max(|x| - (T-t), 0).  With
    // dt == dx every foot point is a grid node, so the table is exact.
    FamilyParams prm;
    prm.controls = {-1.0, 0.0, 1.0};
    prm.terminal = "endpoint_abs";
    const auto reduced = make_reduced_family("constant_field", prm);
    REQUIRE(reduced.has_value());

    SemiLagrangianOptions slo;
    slo.dt = 0.01;
    slo.x_step = 0.01;
    slo.x_min = {-2.0};
    slo.x_max = {2.0};
    const auto table = markovian_hjb_solve(*reduced, slo);

    auto exact = [](double t, double x) { return std::max(std::fabs(x) - (1.0 - t), 0.0); };
    for (double t : {0.0, 0.25, 0.5, 0.9})
        for (double x : {-1.5, -0.4, 0.0, 0.01, 0.7})
            CHECK(table.at(t, Vec{x}) == doctest::Approx(exact(t, x)).epsilon(1e-10));

    // Affine tail: edge extrapolation is exact beyond the grid.
    CHECK(table.at(0.9, Vec{2.5}) == doctest::Approx(exact(0.9, 2.5)).epsilon(1e-10));

    SemiLagrangianOptions strict = slo;
    strict.extrapolate = false;
    strict.x_min = {-0.05};
    strict.x_max = {0.05}; // feet leave this grid immediately
    CHECK_THROWS_AS(markovian_hjb_solve(*reduced, strict), refinement_error);
}

TEST_CASE("semi-lagrangian rejects displacements beyond the grid extent") {
    ReducedProblem rp;
    rp.dim = 1;
    rp.horizon = 1.0;
    rp.controls = {100.0};
    rp.dynamics = [](double, CVecView, double u) { return Vec{u}; };
    rp.running_cost = [](double, CVecView, double) { return 0.0; };
    rp.terminal_cost = [](CVecView x) { return x[0]; };

    SemiLagrangianOptions slo;
    slo.dt = 0.01;
    slo.x_step = 0.01;
    slo.x_min = {-0.1};
    slo.x_max = {0.1}; // one step moves 1.0: five times the whole extent
    CHECK_THROWS_AS(markovian_hjb_solve(rp, slo), refinement_error);
}

TEST_CASE("bilinear interpolation is exact for affine tables") {
    ReducedProblem rp;
    rp.dim = 2;
    rp.horizon = 1.0;
    rp.controls = {0.0};
    rp.dynamics = [](double, CVecView, double) { return Vec{0.0, 0.0}; };
    rp.running_cost = [](double, CVecView, double) { return 0.0; };
    rp.terminal_cost = [](CVecView x) { return x[0] + 2.0 * x[1]; };

    SemiLagrangianOptions slo;
    slo.dt = 0.25;
    slo.x_step = 0.5;
    slo.x_min = {-1.0, -1.0};
    slo.x_max = {1.0, 1.0};
    const auto table = markovian_hjb_solve(rp, slo);
    CHECK(table.at(0.5, Vec{0.3, -0.7}) == doctest::Approx(0.3 - 1.4).epsilon(1e-12));
    CHECK(table.at(0.0, Vec{-0.25, 0.85}) ==
          doctest::Approx(-0.25 + 1.7).epsilon(1e-12));
}

TEST_CASE("state reduction agrees with the path-space value") {
    FamilyParams prm;
    prm.controls = {-1.0, 0.0, 1.0};
    prm.terminal = "endpoint_abs";
    const auto pr = make_family("constant_field", prm);
    const auto reduced = make_reduced_family("constant_field", prm);
    REQUIRE(reduced.has_value());

    SemiLagrangianOptions slo;
    slo.dt = 0.005;
    slo.x_step = 0.005;
    slo.x_min = {-2.0};
    slo.x_max = {2.0};
    const auto table = markovian_hjb_solve(*reduced, slo);

    ValueOptions vo;
    vo.control_step = 0.05;
    vo.grid_step = 0.005;
    vo.enumeration_cap = 100000; // 3^6 suffix signals from t = 0.7

    std::vector<Path> queries;
    for (double x : {-0.6, 0.0, 0.45})
        queries.push_back(Path::constant({x}, 0.7, 0.005));
    const auto rep = reduction_crosscheck(pr, *reduced, table, queries, vo, 1e-2, 1e-6);
    CHECK(rep.passed);
    CHECK(rep.max_value_gap <= 1e-2);
    CHECK(rep.max_history_gap <= 1e-6);
}

TEST_CASE("history detector flags a covert path dependence") {
    FamilyParams prm;
    prm.controls = {0.0};
    prm.control_gain = 0.0;
    prm.drift_gain = 1.0;
    const auto pr = make_family("average_feedback", prm); // reads the history
    ReducedProblem fake;
    fake.dim = 1;
    fake.horizon = pr.horizon;
    fake.controls = pr.controls;
    fake.dynamics = [](double, CVecView x, double) { return Vec{x[0]}; };
    fake.running_cost = [](double, CVecView, double) { return 0.0; };
    fake.terminal_cost = [](CVecView x) { return x[0]; };

    SemiLagrangianOptions slo;
    slo.dt = 0.01;
    slo.x_step = 0.05;
    slo.x_min = {-3.0};
    slo.x_max = {3.0};
    const auto table = markovian_hjb_solve(fake, slo);

    ValueOptions vo;
    vo.control_step = 0.25;
    vo.grid_step = 0.01;
    std::vector<Path> queries = {Path::constant({0.5}, 0.5, 0.01)};
    CHECK_THROWS_AS(reduction_crosscheck(pr, fake, table, queries, vo, 1e-2, 1e-6),
                    input_error);
}
