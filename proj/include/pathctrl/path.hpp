#ifndef PATHCTRL_PATH_HPP
#define PATHCTRL_PATH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pathctrl/vec.hpp"

namespace pathctrl {

enum class continuity { continuous, cadlag };

// A d-dimensional path on [0, final_time], sampled on the uniform grid
// {0, h, 2h, ..., final_time}.  The final time is part of the identity:
// two paths with equal samples but different final times are different
// objects.  Values between nodes follow the declared continuity flag:
// piecewise-linear for continuous paths, left-constant (right-continuous
// step) for cadlag ones.  Samples are stored flat, node-major.
class Path {
  public:
    Path(int dim, double grid_step, std::vector<double> flat_samples, continuity flag);

    static Path constant(const Vec& value, double final_time, double grid_step,
                         continuity flag = continuity::continuous);
    static Path from_samples(double grid_step, const std::vector<Vec>& samples,
                             continuity flag = continuity::continuous);
    // Convenience for scalar paths.
    static Path from_values(double grid_step, const std::vector<double>& values,
                            continuity flag = continuity::continuous);

    int dim() const { return dim_; }
    double grid_step() const { return step_; }
    // Number of grid nodes (samples); always >= 1.
    int nodes() const { return static_cast<int>(data_.size() / dim_); }
    double final_time() const { return step_ * (nodes() - 1); }
    double time(int k) const { return step_ * k; }
    bool is_continuous() const { return flag_ == continuity::continuous; }
    continuity flag() const { return flag_; }

    CVecView sample(int k) const { return {data_.data() + static_cast<std::size_t>(k) * dim_,
                                           static_cast<std::size_t>(dim_)}; }
    CVecView final_value() const { return sample(nodes() - 1); }
    const std::vector<double>& raw() const { return data_; }

    // Interpolated value at any s in [0, final_time].
    Vec value_at(double s) const;

    // Grid node index for a time that must sit on the grid (within a small
    // absolute snap tolerance); throws alignment_error otherwise.
    int index_of(double s) const;

  private:
    int dim_;
    double step_;
    std::vector<double> data_;
    continuity flag_;
};

// Largest Euclidean sample norm, sup_{0<=s<=t} |p(s)|.  Exact for both
// interpolations because |.| is convex along linear segments.
double sup_norm(const Path& p);

// Same, excluding the final node (the "strict past" running maximum);
// for single-node paths this is the final (only) node's norm.
double sup_norm_past(const Path& p);

// Metric on the space of paths with varying final times:
//   |t_p - t_q| + sup_{s <= max(t_p, t_q)} |ext(p)(s) - ext(q)(s)|
// where the path with the smaller final time is flat-extended.  Requires a
// common grid step (alignment_error otherwise).
double d_infinity(const Path& p, const Path& q);

// Quadrature of |p(s) - anchor(s)|^2 over [0, p.final_time].  The anchor is
// flat-extended to p's final time and sampled on p's grid.  The rule follows
// p's continuity: trapezoid for continuous paths, left-rectangle for cadlag
// ones (the exact integral of the step interpolant, so the final sample
// carries no weight).  Omitting the anchor integrates |p|^2.
double h_norm_sq(const Path& p);
double h_norm_sq(const Path& p, const Path& anchor);

// Extends p to new_final by repeating the final sample.  new_final must sit
// on p's grid, be >= p.final_time, and (when a horizon is given) not exceed
// it (horizon_error).
Path flat_extend(const Path& p, double new_final);
Path flat_extend(const Path& p, double new_final, double horizon);

// Displaces only the final sample by x; the result is flagged cadlag when
// x != 0 (the displacement breaks continuity at the final node).
Path vertical_bump(const Path& p, const Vec& x);
Path vertical_bump(const Path& p, double x); // scalar paths

// Prefix of p up to time s, snapped to the nearest grid node; the applied
// rounding |s - snapped| is reported through `rounding` when non-null.
Path restrict(const Path& p, double s, double* rounding = nullptr);

// The same path re-sampled on another uniform grid: values are read through
// the interpolation, so this is exact when the new grid contains the old
// nodes.  The final time must sit on the new grid (alignment_error).
Path resample(const Path& p, double new_step);

// Node-wise sum of two paths sharing grid and final time.
Path path_add(const Path& p, const Path& q);
Path path_sub(const Path& p, const Path& q);

// A compact family of paths: all live on one grid, run no farther than
// `horizon`, keep their sup-norm under `sup_bound`, and have node-to-node
// difference quotients at most slope_gain * (1 + sup_bound).  Checking
// quotients on consecutive nodes only is exact for the piecewise-linear
// interpolants used throughout; generators also quantise values to a
// lattice so that the family is finite and enumerable.
struct CompactClass {
    double start_time = 0.0; // smallest admissible final time
    double horizon = 1.0;    // largest admissible final time
    int dim = 1;
    double sup_bound = 1.0;  // cap on the running sup-norm
    double slope_gain = 1.0; // difference-quotient coefficient
    double time_step = 0.25; // grid step shared by member paths
    double value_step = 0.25;// value lattice quantum for generators

    double slope_bound() const { return slope_gain * (1.0 + sup_bound); }
};

// Membership test: final time within [start_time, horizon], sup-norm and
// consecutive difference quotients within bounds, grid step matching.
bool class_contains(const CompactClass& c, const Path& p);

// Seeded clipped random walks on the class's value lattice; final times are
// drawn uniformly from the admissible grid nodes.  Every returned path
// passes class_contains.
std::vector<Path> lattice_sample(const CompactClass& c, std::uint64_t seed, int count);

// All lattice paths of the class, final time ascending then lexicographic
// in node values.  Only viable for tiny grids: throws budget_error when a
// path would have more than max_nodes nodes or the family exceeds
// max_count members.
std::vector<Path> enumerate_class(const CompactClass& c, int max_nodes = 6,
                                  std::int64_t max_count = 2000000);

// CSV with header "time,x1,...,xd", one row per node, shortest round-trip
// number formatting (bit-exact round trip).  Continuity is not part of the
// CSV format and must be supplied on read.
std::string to_csv(const Path& p);
Path from_csv(const std::string& text, continuity flag = continuity::continuous);

// JSON object {final_time, grid_step, continuity, samples}; bit-exact.
std::string to_json_string(const Path& p);
Path from_json_string(const std::string& text);

} // namespace pathctrl

#endif
