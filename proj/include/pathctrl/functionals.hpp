#ifndef PATHCTRL_FUNCTIONALS_HPP
#define PATHCTRL_FUNCTIONALS_HPP

#include "pathctrl/calculus.hpp"
#include "pathctrl/path.hpp"

namespace pathctrl {

// Smooth proxies for the squared running sup-norm, measured relative to an
// anchor path that is flat-extended to the evaluated path's final time.
// Writing delta = p - extended anchor, A = sup|delta|^2 and B = |delta(t)|^2:
//
//   sup_proxy        S = (A - B)^2 / A          (0 when A = 0)
//   pinned_sup_proxy U = S + pin_weight * B
//
// S is insensitive to flat extension (time derivative 0) and has the
// closed-form space gradient -4 (A - B) delta(t) / A, so U is a pathwise-
// differentiable stand-in for the squared sup-norm:
//
//   (3 - sqrt 5)/2 * A  <=  S + B  <=  2 A.

double sup_proxy(const Path& p);
double sup_proxy(const Path& p, const Path& anchor);

Vec sup_proxy_gradient(const Path& p);
Vec sup_proxy_gradient(const Path& p, const Path& anchor);

double pinned_sup_proxy(double pin_weight, const Path& p);
double pinned_sup_proxy(double pin_weight, const Path& p, const Path& anchor);

// Two-path form: the proxy of the difference after flat-extending the path
// with the smaller final time; symmetric in its path arguments.
double pinned_sup_proxy_pair(double pin_weight, const Path& p, const Path& q);

// Quadrature of |p - extended anchor|^2 (the anchored energy); identical to
// h_norm_sq but packaged with its pathwise derivatives: time derivative
// |p(t) - anchor(end)|^2, space gradient 0.
double anchored_energy(const Path& p, const Path& anchor);

// Norm-equivalence slack of S + B against the squared sup-norm A:
//   lower = S + B - (3 - sqrt 5)/2 * A   (>= 0)
//   upper = 2 A - (S + B)                (>= 0)
struct EquivalenceSlack {
    double lower = 0.0;
    double upper = 0.0;
};
EquivalenceSlack equivalence_slack(const Path& p);

double equiv_lower_ratio(); // (3 - sqrt 5) / 2
double equiv_upper_ratio(); // 2

// 2 U(p) + 2 U(q) - U(p + q); non-negative whenever pin_weight >= 2.
double quasi_subadditivity_gap(double pin_weight, const Path& p, const Path& q);

// Functional packages (eval + both pathwise derivatives) for the chain-rule
// battery and for use as viscosity test functions.
PathFunctional make_sup_proxy_functional(Path anchor);
PathFunctional make_pinned_proxy_functional(double pin_weight, Path anchor);
PathFunctional make_anchored_energy_functional(Path anchor);

// Doubling penalty centred at a reference path:
//   (final_time - anchor end)^2 + anchored energy to the reference.
// Non-negative, zero exactly at the reference, and both pathwise
// derivatives vanish there — adding it to a test functional pins the
// touching point without disturbing the inequality evaluated at it.
PathFunctional make_touch_penalty(Path anchor);

} // namespace pathctrl

#endif
