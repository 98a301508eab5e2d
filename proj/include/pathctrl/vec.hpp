#ifndef PATHCTRL_VEC_HPP
#define PATHCTRL_VEC_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace pathctrl {

// Points and gradients are small dense vectors (d <= 3 in practice).
using Vec = std::vector<double>;
using CVecView = std::span<const double>;

inline double dot(CVecView a, CVecView b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm_sq(CVecView a) { return dot(a, a); }

inline double norm(CVecView a) { return std::sqrt(norm_sq(a)); }

inline Vec sub(CVecView a, CVecView b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec add(CVecView a, CVecView b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec scale(double c, CVecView a) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
    return r;
}

} // namespace pathctrl

#endif
