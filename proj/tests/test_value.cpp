#include "doctest.h"

#include <cmath>

#include "pathctrl/errors.hpp"
#include "pathctrl/value.hpp"

using namespace pathctrl;

namespace {

ControlProblem drive_problem() {
    FamilyParams prm; // U = {-1, 1}, endpoint terminal cost, zero running
    return make_family("constant_field", prm);
}

ValueOptions coarse_options() {
    ValueOptions vo;
    vo.control_step = 0.25;
    vo.grid_step = 0.05;
    return vo;
}

} // namespace

TEST_CASE("value of the symmetric drive has a closed form") {
    // Minimising the endpoint means driving down always: V = x0 - (T - t).
    const auto pr = drive_problem();
    const auto vo = coarse_options();

    const auto res = value(pr, Path::constant({0.3}, 0.0, 0.05), vo);
    CHECK(res.exhaustive);
    CHECK(res.value == doctest::Approx(-0.7).epsilon(1e-12));
    for (double v : res.argmin.values) CHECK(v == -1.0);

    // From a later start the remaining time shrinks.
    const auto mid = value(pr, Path::constant({0.3}, 0.5, 0.05), vo);
    CHECK(mid.value == doctest::Approx(-0.2).epsilon(1e-12));

    // Degenerate query at the horizon: no controls, terminal cost only.
    const auto end = value(pr, Path::constant({0.3}, 1.0, 0.05), vo);
    CHECK(end.value == doctest::Approx(0.3));
    CHECK(end.argmin.values.empty());
}

TEST_CASE("exhaustive minimisation finds the reachable-set optimum") {
    FamilyParams prm;
    prm.terminal = "endpoint_abs";
    const auto pr = make_family("constant_field", prm);
    const auto vo = coarse_options();
    // Reachable endpoints from 0.3 are 0.3 + {-1,-0.5,0,0.5,1} (4 steps of
    // +-0.25); the smallest magnitude is |0.3 - 0.5| = 0.2.
    const auto res = value(pr, Path::constant({0.3}, 0.0, 0.05), vo);
    CHECK(res.exhaustive);
    CHECK(res.value == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("descent refinement matches enumeration on separable instances") {
    const auto pr = drive_problem();
    auto vo = coarse_options();
    const Path initial = Path::constant({0.1}, 0.0, 0.05);
    const double exact = value(pr, initial, vo).value;

    vo.enumeration_cap = 4; // force the seeded coordinate descent
    vo.restarts = 3;
    const auto res = value(pr, initial, vo);
    CHECK_FALSE(res.exhaustive);
    // Each control interval acts independently on the endpoint, so every
    // coordinate-descent sweep reaches the exact optimum.
    CHECK(res.value == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("coarse-grid initial paths are read through their interpolation") {
    const auto pr = drive_problem();
    const auto vo = coarse_options();
    const Path coarse = Path::from_values(0.25, {0.0, 0.3}); // t = 0.25
    const Path fine = resample(coarse, vo.grid_step);
    CHECK(value(pr, coarse, vo).value == value(pr, fine, vo).value);
}

TEST_CASE("programming-principle defect is arithmetic noise when exhaustive") {
    const auto pr = drive_problem();
    const auto vo = coarse_options();
    const Path initial = Path::constant({0.25}, 0.0, 0.05);
    for (double s : {0.0, 0.5, 1.0})
        CHECK(dpp_residual(pr, initial, s, vo) <= 1e-12);

    CHECK_THROWS_AS(dpp_residual(pr, initial, 0.3, vo), alignment_error);
    CHECK_THROWS_AS(dpp_residual(pr, initial, 1.25, vo), alignment_error);

    ValueOptions tiny = vo;
    tiny.enumeration_cap = 2; // prefix enumeration now refuses the budget
    CHECK_THROWS_AS(dpp_residual(pr, initial, 0.5, tiny), budget_error);
}

TEST_CASE("value satisfies its a-priori bounds on sample pairs") {
    const auto pr = drive_problem();
    const auto vo = coarse_options();
    std::vector<std::pair<Path, Path>> pairs;
    pairs.emplace_back(Path::constant({0.3}, 0.0, 0.05),
                       Path::constant({-0.2}, 0.0, 0.05));
    pairs.emplace_back(Path::constant({0.5}, 0.25, 0.05),
                       Path::from_values(0.05, std::vector<double>(11, 0.1)));
    const auto rep = value_regularity_check(pr, pairs, vo);
    CHECK(rep.passed);
    CHECK(rep.lipschitz.size() == 2);
    CHECK(rep.boundedness.size() == 4);
    for (const auto& row : rep.lipschitz) CHECK(row.lhs <= row.rhs);
}
