#include "pathctrl/calculus.hpp"

#include <cmath>
#include <stdexcept>

#include "pathctrl/errors.hpp"

namespace pathctrl {

double default_vertical_step(const Path& p) { return 1e-4 * (1.0 + sup_norm(p)); }

double horizontal_derivative_numeric(const PathFunctional& f, const Path& p,
                                     double step, double horizon,
                                     bool* terminal_limit) {
    if (!f.eval) throw contract_error("functional '" + f.name + "' has no eval");
    if (!(step > 0.0)) throw input_error("horizontal step must be positive");
    if (terminal_limit) *terminal_limit = false;
    const Path* base = &p;
    Path interior = p; // reused when the extension would cross the horizon
    if (p.final_time() + step > horizon + 1e-9) {
        const double back = p.final_time() - step;
        if (back < -1e-9)
            throw horizon_error("path too short for the one-sided limit at the horizon");
        interior = restrict(p, back);
        base = &interior;
        if (terminal_limit) *terminal_limit = true;
    }
    const Path extended = flat_extend(*base, base->final_time() + step);
    return (f.eval(extended) - f.eval(*base)) / step;
}

Vec vertical_gradient_numeric(const PathFunctional& f, const Path& p, double step,
                              VerticalDiffInfo* info) {
    if (!f.eval) throw contract_error("functional '" + f.name + "' has no eval");
    if (!(step > 0.0)) throw input_error("vertical step must be positive");
    if (info) info->one_sided.clear();
    Vec grad(p.dim(), 0.0);
    Vec bump(p.dim(), 0.0);
    for (int i = 0; i < p.dim(); ++i) {
        bump.assign(p.dim(), 0.0);
        bump[i] = step;
        bool have_plus = true, have_minus = true;
        double up = 0.0, down = 0.0;
        try {
            up = f.eval(vertical_bump(p, bump));
        } catch (const std::domain_error&) {
            have_plus = false;
        } catch (const input_error&) {
            have_plus = false;
        }
        bump[i] = -step;
        try {
            down = f.eval(vertical_bump(p, bump));
        } catch (const std::domain_error&) {
            have_minus = false;
        } catch (const input_error&) {
            have_minus = false;
        }
        if (have_plus && have_minus) {
            grad[i] = (up - down) / (2.0 * step);
        } else if (have_plus || have_minus) {
            const double mid = f.eval(p);
            grad[i] = have_plus ? (up - mid) / step : (mid - down) / step;
            if (info) info->one_sided.push_back(i);
        } else {
            throw input_error("both displacement directions leave the domain of '" +
                              f.name + "' in coordinate " + std::to_string(i));
        }
    }
    return grad;
}

Vec vertical_gradient_numeric(const PathFunctional& f, const Path& p) {
    return vertical_gradient_numeric(f, p, default_vertical_step(p), nullptr);
}

double ito_residual(const PathFunctional& f, const Trajectory& X) {
    if (!f.eval || !f.time_derivative || !f.space_gradient)
        throw contract_error("chain-rule defect needs eval plus both derivatives of '" +
                             f.name + "'");
    const Path& full = X.path;
    const int start = full.index_of(X.start_time);
    const double h = full.grid_step();
    double time_acc = 0.0, space_acc = 0.0;
    for (int k = start; k + 1 < full.nodes(); ++k) {
        const Path prefix = restrict(full, full.time(k));
        time_acc += f.time_derivative(prefix) * h;
        const Vec grad = f.space_gradient(prefix);
        const auto next = full.sample(k + 1);
        const auto here = full.sample(k);
        for (int i = 0; i < full.dim(); ++i) space_acc += grad[i] * (next[i] - here[i]);
    }
    const Path head = restrict(full, X.start_time);
    return f.eval(full) - f.eval(head) - time_acc - space_acc;
}

ConsistencyReport extension_consistency_check(const PathFunctional& f1,
                                              const PathFunctional& f2,
                                              const std::vector<Path>& samples,
                                              double tol) {
    if (!f1.eval || !f2.eval) throw contract_error("both functionals need eval");
    ConsistencyReport rep;
    for (const Path& p : samples) {
        if (!p.is_continuous())
            throw input_error("extension consistency is defined on continuous paths");
        const double eval_gap = std::fabs(f1.eval(p) - f2.eval(p));
        rep.max_eval_gap = std::max(rep.max_eval_gap, eval_gap);
        if (eval_gap > tol)
            throw input_error("functionals '" + f1.name + "' and '" + f2.name +
                              "' are not consistent extensions (evaluation gap " +
                              std::to_string(eval_gap) + ")");
        const double step = p.grid_step();
        const double dt1 = f1.time_derivative ? f1.time_derivative(p)
                                              : horizontal_derivative_numeric(f1, p, step);
        const double dt2 = f2.time_derivative ? f2.time_derivative(p)
                                              : horizontal_derivative_numeric(f2, p, step);
        rep.max_time_gap = std::max(rep.max_time_gap, std::fabs(dt1 - dt2));
        const Vec dx1 = f1.space_gradient ? f1.space_gradient(p)
                                          : vertical_gradient_numeric(f1, p);
        const Vec dx2 = f2.space_gradient ? f2.space_gradient(p)
                                          : vertical_gradient_numeric(f2, p);
        const Vec diff = sub(dx1, dx2);
        rep.max_space_gap = std::max(rep.max_space_gap, norm(diff));
    }
    rep.passed = rep.max_time_gap <= tol && rep.max_space_gap <= tol;
    return rep;
}

PathFunctional make_cylinder(std::string name,
                             std::function<double(double, CVecView)> psi,
                             std::function<double(double, CVecView)> psi_t,
                             std::function<Vec(double, CVecView)> psi_x) {
    PathFunctional f;
    f.name = std::move(name);
    f.eval = [psi](const Path& p) { return psi(p.final_time(), p.final_value()); };
    if (psi_t)
        f.time_derivative = [psi_t](const Path& p) {
            return psi_t(p.final_time(), p.final_value());
        };
    if (psi_x)
        f.space_gradient = [psi_x](const Path& p) {
            return psi_x(p.final_time(), p.final_value());
        };
    return f;
}

PathFunctional combine(std::string name, double c1, const PathFunctional& f1,
                       double c2, const PathFunctional& f2) {
    if (!f1.eval || !f2.eval) throw contract_error("combine needs eval on both parts");
    PathFunctional f;
    f.name = std::move(name);
    f.eval = [c1, e1 = f1.eval, c2, e2 = f2.eval](const Path& p) {
        return c1 * e1(p) + c2 * e2(p);
    };
    if (f1.time_derivative && f2.time_derivative)
        f.time_derivative = [c1, d1 = f1.time_derivative, c2,
                             d2 = f2.time_derivative](const Path& p) {
            return c1 * d1(p) + c2 * d2(p);
        };
    if (f1.space_gradient && f2.space_gradient)
        f.space_gradient = [c1, g1 = f1.space_gradient, c2,
                            g2 = f2.space_gradient](const Path& p) {
            Vec a = g1(p);
            const Vec b = g2(p);
            for (std::size_t i = 0; i < a.size(); ++i) a[i] = c1 * a[i] + c2 * b[i];
            return a;
        };
    return f;
}

PathFunctional make_running_integral(std::string name,
                                     std::function<double(CVecView)> w) {
    PathFunctional f;
    f.name = std::move(name);
    f.eval = [w](const Path& p) {
        double acc = 0.0;
        for (int k = 0; k + 1 < p.nodes(); ++k) acc += w(p.sample(k));
        return acc * p.grid_step();
    };
    f.time_derivative = [w](const Path& p) { return w(p.final_value()); };
    // The final value carries no quadrature weight, so the space gradient
    // vanishes identically.
    f.space_gradient = [](const Path& p) { return Vec(p.dim(), 0.0); };
    return f;
}

} // namespace pathctrl
