#include "pathctrl/path.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pathctrl/errors.hpp"
#include "pathctrl/rng.hpp"

namespace pathctrl {

namespace {

constexpr double snap_tol = 1e-9;

// Shortest decimal form that parses back to the same double.
std::string fmt_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, end};
}

double parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw input_error("cannot parse number: '" + std::string(s) + "'");
    return v;
}

} // namespace

Path::Path(int dim, double grid_step, std::vector<double> flat_samples, continuity flag)
    : dim_(dim), step_(grid_step), data_(std::move(flat_samples)), flag_(flag) {
    if (dim_ < 1) throw input_error("path dimension must be >= 1");
    if (!(step_ > 0.0)) throw input_error("grid step must be positive");
    if (data_.empty() || data_.size() % dim_ != 0)
        throw input_error("sample buffer size must be a positive multiple of dim");
    for (double v : data_)
        if (!std::isfinite(v)) throw input_error("path samples must be finite");
}

Path Path::constant(const Vec& value, double final_time, double grid_step, continuity flag) {
    const int n = static_cast<int>(std::llround(final_time / grid_step)) + 1;
    if (n < 1 || std::fabs((n - 1) * grid_step - final_time) > snap_tol)
        throw alignment_error("final time does not sit on the grid");
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(n) * value.size());
    for (int k = 0; k < n; ++k) data.insert(data.end(), value.begin(), value.end());
    return {static_cast<int>(value.size()), grid_step, std::move(data), flag};
}

Path Path::from_samples(double grid_step, const std::vector<Vec>& samples, continuity flag) {
    if (samples.empty()) throw input_error("a path needs at least one sample");
    const auto d = samples.front().size();
    std::vector<double> data;
    data.reserve(samples.size() * d);
    for (const auto& s : samples) {
        if (s.size() != d) throw input_error("all samples must share one dimension");
        data.insert(data.end(), s.begin(), s.end());
    }
    return {static_cast<int>(d), grid_step, std::move(data), flag};
}

Path Path::from_values(double grid_step, const std::vector<double>& values, continuity flag) {
    if (values.empty()) throw input_error("a path needs at least one sample");
    return {1, grid_step, values, flag};
}

int Path::index_of(double s) const {
    const auto k = std::llround(s / step_);
    if (k < 0 || k >= nodes() || std::fabs(s - k * step_) > snap_tol)
        throw alignment_error("time " + fmt_double(s) + " is not a grid node of the path");
    return static_cast<int>(k);
}

Vec Path::value_at(double s) const {
    if (s < -snap_tol || s > final_time() + snap_tol)
        throw horizon_error("evaluation time outside [0, final_time]");
    s = std::clamp(s, 0.0, final_time());
    const double pos = s / step_;
    const auto nearest = std::llround(pos);
    if (std::fabs(s - nearest * step_) <= snap_tol) {
        auto v = sample(static_cast<int>(nearest));
        return {v.begin(), v.end()};
    }
    const int lo = static_cast<int>(std::floor(pos));
    if (flag_ == continuity::cadlag) {
        // Left-constant: the node value holds until the next node.
        auto v = sample(lo);
        return {v.begin(), v.end()};
    }
    const double frac = pos - lo;
    Vec out(dim_);
    auto a = sample(lo);
    auto b = sample(lo + 1);
    for (int i = 0; i < dim_; ++i) out[i] = (1.0 - frac) * a[i] + frac * b[i];
    return out;
}

double sup_norm(const Path& p) {
    double best = 0.0;
    for (int k = 0; k < p.nodes(); ++k) best = std::max(best, norm(p.sample(k)));
    return best;
}

double sup_norm_past(const Path& p) {
    if (p.nodes() == 1) return norm(p.sample(0));
    double best = 0.0;
    for (int k = 0; k + 1 < p.nodes(); ++k) best = std::max(best, norm(p.sample(k)));
    return best;
}

double d_infinity(const Path& p, const Path& q) {
    if (p.dim() != q.dim()) throw alignment_error("paths have different dimensions");
    if (std::fabs(p.grid_step() - q.grid_step()) > snap_tol)
        throw alignment_error("paths have incompatible grid steps");
    const Path& shorter = p.nodes() <= q.nodes() ? p : q;
    const Path& longer = p.nodes() <= q.nodes() ? q : p;
    double gap = 0.0;
    const auto last = shorter.final_value();
    for (int k = 0; k < longer.nodes(); ++k) {
        const auto a = k < shorter.nodes() ? shorter.sample(k) : last;
        gap = std::max(gap, norm(sub(a, longer.sample(k))));
    }
    return std::fabs(p.final_time() - q.final_time()) + gap;
}

namespace {

// Shared core: quadrature of |p - extended anchor|^2 following p's rule.
double h_energy(const Path& p, const Path* anchor) {
    if (anchor) {
        if (anchor->dim() != p.dim()) throw alignment_error("anchor dimension mismatch");
        if (std::fabs(anchor->grid_step() - p.grid_step()) > snap_tol)
            throw alignment_error("anchor grid step mismatch");
        if (anchor->nodes() > p.nodes())
            throw input_error("anchor final time exceeds the path's final time");
    }
    const int n = p.nodes();
    if (n == 1) return 0.0;
    const double h = p.grid_step();
    auto diff_sq = [&](int k) {
        const auto a = p.sample(k);
        if (!anchor) return norm_sq(a);
        const auto b = anchor->sample(std::min(k, anchor->nodes() - 1));
        double s = 0.0;
        for (int i = 0; i < p.dim(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
        return s;
    };
    double acc = 0.0;
    if (p.is_continuous()) {
        acc = 0.5 * (diff_sq(0) + diff_sq(n - 1));
        for (int k = 1; k + 1 < n; ++k) acc += diff_sq(k);
    } else {
        // Step interpolant: the integral is the left-rectangle sum, so the
        // final sample carries no weight.
        for (int k = 0; k + 1 < n; ++k) acc += diff_sq(k);
    }
    return acc * h;
}

} // namespace

double h_norm_sq(const Path& p) { return h_energy(p, nullptr); }
double h_norm_sq(const Path& p, const Path& anchor) { return h_energy(p, &anchor); }

Path flat_extend(const Path& p, double new_final) {
    const auto k = std::llround(new_final / p.grid_step());
    if (std::fabs(new_final - k * p.grid_step()) > snap_tol)
        throw alignment_error("extension target does not sit on the grid");
    if (k < p.nodes() - 1) throw input_error("flat_extend cannot shorten a path");
    std::vector<double> data = p.raw();
    const auto last = p.final_value();
    for (auto j = p.nodes(); j <= k; ++j) data.insert(data.end(), last.begin(), last.end());
    return {p.dim(), p.grid_step(), std::move(data), p.flag()};
}

Path flat_extend(const Path& p, double new_final, double horizon) {
    if (new_final > horizon + snap_tol)
        throw horizon_error("extension target exceeds the horizon");
    return flat_extend(p, new_final);
}

Path vertical_bump(const Path& p, const Vec& x) {
    if (static_cast<int>(x.size()) != p.dim())
        throw input_error("bump dimension mismatch");
    std::vector<double> data = p.raw();
    const std::size_t base = data.size() - p.dim();
    bool moved = false;
    for (int i = 0; i < p.dim(); ++i) {
        data[base + i] += x[i];
        moved = moved || x[i] != 0.0;
    }
    return {p.dim(), p.grid_step(), std::move(data),
            moved ? continuity::cadlag : p.flag()};
}

Path vertical_bump(const Path& p, double x) { return vertical_bump(p, Vec{x}); }

Path restrict(const Path& p, double s, double* rounding) {
    if (s < -snap_tol || s > p.final_time() + snap_tol)
        throw horizon_error("restriction time outside [0, final_time]");
    auto k = std::llround(s / p.grid_step());
    k = std::clamp<long long>(k, 0, p.nodes() - 1);
    if (rounding) *rounding = s - k * p.grid_step();
    std::vector<double> data(p.raw().begin(),
                             p.raw().begin() + (k + 1) * p.dim());
    return {p.dim(), p.grid_step(), std::move(data), p.flag()};
}

Path resample(const Path& p, double new_step) {
    if (!(new_step > 0.0)) throw input_error("grid step must be positive");
    const auto n = std::llround(p.final_time() / new_step);
    if (std::fabs(static_cast<double>(n) * new_step - p.final_time()) > snap_tol)
        throw alignment_error("final time does not sit on the requested grid");
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(n + 1) * p.dim());
    for (long long k = 0; k <= n; ++k) {
        const Vec x = p.value_at(std::min(static_cast<double>(k) * new_step,
                                          p.final_time()));
        data.insert(data.end(), x.begin(), x.end());
    }
    return {p.dim(), new_step, std::move(data), p.flag()};
}

namespace {

Path combine(const Path& p, const Path& q, double sign) {
    if (p.dim() != q.dim()) throw alignment_error("paths have different dimensions");
    if (std::fabs(p.grid_step() - q.grid_step()) > snap_tol)
        throw alignment_error("paths have incompatible grid steps");
    if (p.nodes() != q.nodes())
        throw input_error("node-wise combination needs equal final times");
    std::vector<double> data(p.raw().size());
    for (std::size_t j = 0; j < data.size(); ++j) data[j] = p.raw()[j] + sign * q.raw()[j];
    const auto flag = (p.is_continuous() && q.is_continuous()) ? continuity::continuous
                                                               : continuity::cadlag;
    return {p.dim(), p.grid_step(), std::move(data), flag};
}

} // namespace

Path path_add(const Path& p, const Path& q) { return combine(p, q, +1.0); }
Path path_sub(const Path& p, const Path& q) { return combine(p, q, -1.0); }

namespace {

struct LatticeSpec {
    int levels;      // per-coordinate values live in {-levels..levels} * value_step
    int max_step;    // per-coordinate node-to-node level change
    int first_node;  // grid index of the smallest admissible final time
    int last_node;   // grid index of the horizon
};

LatticeSpec lattice_spec(const CompactClass& c) {
    if (c.dim < 1) throw input_error("class dimension must be >= 1");
    if (!(c.time_step > 0.0) || !(c.value_step > 0.0))
        throw input_error("class grid steps must be positive");
    if (c.start_time < -snap_tol || c.start_time > c.horizon + snap_tol)
        throw input_error("class start time outside [0, horizon]");
    const double root_d = std::sqrt(static_cast<double>(c.dim));
    LatticeSpec s;
    // Box inside the sup-norm ball and per-coordinate steps inside the
    // Euclidean slope bound, so membership holds by construction.
    s.levels = static_cast<int>(std::floor(c.sup_bound / (c.value_step * root_d)));
    s.max_step = static_cast<int>(
        std::floor(c.slope_bound() * c.time_step / (c.value_step * root_d)));
    s.first_node = static_cast<int>(std::llround(c.start_time / c.time_step));
    s.last_node = static_cast<int>(std::llround(c.horizon / c.time_step));
    if (std::fabs(s.first_node * c.time_step - c.start_time) > snap_tol ||
        std::fabs(s.last_node * c.time_step - c.horizon) > snap_tol)
        throw alignment_error("class start time / horizon must sit on the time grid");
    return s;
}

} // namespace

bool class_contains(const CompactClass& c, const Path& p) {
    const double eps = 1e-12 * (1.0 + c.sup_bound);
    if (p.dim() != c.dim) return false;
    if (std::fabs(p.grid_step() - c.time_step) > snap_tol) return false;
    if (p.final_time() < c.start_time - snap_tol) return false;
    if (p.final_time() > c.horizon + snap_tol) return false;
    if (sup_norm(p) > c.sup_bound + eps) return false;
    const double max_rise = c.slope_bound() * c.time_step + eps;
    for (int k = 0; k + 1 < p.nodes(); ++k)
        if (norm(sub(p.sample(k + 1), p.sample(k))) > max_rise) return false;
    return true;
}

std::vector<Path> lattice_sample(const CompactClass& c, std::uint64_t seed, int count) {
    const auto spec = lattice_spec(c);
    rng gen(seed);
    std::vector<Path> out;
    out.reserve(count);
    std::vector<int> level(c.dim);
    for (int i = 0; i < count; ++i) {
        const auto fin = static_cast<int>(gen.uniform_int(spec.first_node, spec.last_node));
        std::vector<double> data;
        data.reserve(static_cast<std::size_t>(fin + 1) * c.dim);
        for (int d = 0; d < c.dim; ++d)
            level[d] = static_cast<int>(gen.uniform_int(-spec.levels, spec.levels));
        for (int k = 0; k <= fin; ++k) {
            if (k > 0)
                for (int d = 0; d < c.dim; ++d) {
                    const auto jump = static_cast<int>(
                        gen.uniform_int(-spec.max_step, spec.max_step));
                    level[d] = std::clamp(level[d] + jump, -spec.levels, spec.levels);
                }
            for (int d = 0; d < c.dim; ++d) data.push_back(level[d] * c.value_step);
        }
        out.emplace_back(c.dim, c.time_step, std::move(data), continuity::continuous);
    }
    return out;
}

std::vector<Path> enumerate_class(const CompactClass& c, int max_nodes,
                                  std::int64_t max_count) {
    const auto spec = lattice_spec(c);
    if (spec.last_node + 1 > max_nodes)
        throw budget_error("class enumeration needs " + std::to_string(spec.last_node + 1) +
                           " nodes per path; limit is " + std::to_string(max_nodes));
    std::vector<Path> out;
    std::vector<int> level; // node-major, coordinate-minor lattice levels
    // Depth-first over nodes; per-coordinate level changes bounded by
    // spec.max_step keep every emitted path inside the class.
    auto emit = [&] {
        std::vector<double> data(level.size());
        for (std::size_t j = 0; j < level.size(); ++j) data[j] = level[j] * c.value_step;
        out.emplace_back(c.dim, c.time_step, std::move(data), continuity::continuous);
        if (static_cast<std::int64_t>(out.size()) > max_count)
            throw budget_error("class enumeration exceeds " + std::to_string(max_count) +
                               " paths");
    };
    auto walk = [&](auto&& self, int node, int coord, int fin) -> void {
        if (node > fin) {
            emit();
            return;
        }
        const int base = (node - 1) * c.dim + coord; // previous node, same coordinate
        const int lo = node == 0 ? -spec.levels
                                 : std::max(-spec.levels, level[base] - spec.max_step);
        const int hi = node == 0 ? spec.levels
                                 : std::min(spec.levels, level[base] + spec.max_step);
        for (int v = lo; v <= hi; ++v) {
            level.push_back(v);
            if (coord + 1 < c.dim)
                self(self, node, coord + 1, fin);
            else
                self(self, node + 1, 0, fin);
            level.pop_back();
        }
    };
    for (int fin = spec.first_node; fin <= spec.last_node; ++fin) {
        level.clear();
        walk(walk, 0, 0, fin);
    }
    return out;
}

std::string to_csv(const Path& p) {
    std::string out = "time";
    for (int i = 1; i <= p.dim(); ++i) out += ",x" + std::to_string(i);
    out += '\n';
    for (int k = 0; k < p.nodes(); ++k) {
        out += fmt_double(p.time(k));
        for (double v : p.sample(k)) {
            out += ',';
            out += fmt_double(v);
        }
        out += '\n';
    }
    return out;
}

Path from_csv(const std::string& text, continuity flag) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw input_error("empty path CSV");
    if (line.rfind("time", 0) != 0) throw input_error("path CSV must start with a 'time' header");
    std::vector<double> times;
    std::vector<double> data;
    int dim = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string_view> cells;
        std::string_view rest = line;
        while (!rest.empty()) {
            const auto pos = rest.find(',');
            cells.push_back(rest.substr(0, pos));
            if (pos == std::string_view::npos) break;
            rest.remove_prefix(pos + 1);
        }
        if (dim < 0) dim = static_cast<int>(cells.size()) - 1;
        if (static_cast<int>(cells.size()) != dim + 1)
            throw input_error("ragged path CSV row: '" + line + "'");
        times.push_back(parse_double(cells[0]));
        for (int i = 1; i <= dim; ++i) data.push_back(parse_double(cells[i]));
    }
    if (times.empty()) throw input_error("path CSV has no rows");
    if (std::fabs(times.front()) > snap_tol) throw input_error("path CSV must start at time 0");
    double step = times.size() > 1 ? times[1] - times[0] : 1.0;
    for (std::size_t k = 0; k + 1 < times.size(); ++k)
        if (std::fabs(times[k + 1] - times[k] - step) > snap_tol)
            throw input_error("path CSV grid is not uniform");
    return {dim, step, std::move(data), flag};
}

std::string to_json_string(const Path& p) {
    nlohmann::ordered_json j;
    j["final_time"] = p.final_time();
    j["grid_step"] = p.grid_step();
    j["continuity"] = p.is_continuous() ? "continuous" : "cadlag";
    auto samples = nlohmann::ordered_json::array();
    for (int k = 0; k < p.nodes(); ++k) {
        auto row = nlohmann::ordered_json::array();
        for (double v : p.sample(k)) row.push_back(v);
        samples.push_back(std::move(row));
    }
    j["samples"] = std::move(samples);
    return j.dump();
}

Path from_json_string(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("path JSON does not parse: ") + e.what());
    }
    for (const char* key : {"final_time", "grid_step", "continuity", "samples"})
        if (!j.contains(key))
            throw input_error(std::string("path JSON lacks field '") + key + "'");
    try {
        const double final_time = j["final_time"].get<double>();
        const double step = j["grid_step"].get<double>();
        const std::string cont = j["continuity"].get<std::string>();
        if (cont != "continuous" && cont != "cadlag")
            throw input_error("continuity must be 'continuous' or 'cadlag'");
        const auto& samples = j["samples"];
        if (!samples.is_array() || samples.empty())
            throw input_error("path JSON needs a non-empty samples array");
        const auto dim = samples.front().size();
        std::vector<double> data;
        data.reserve(samples.size() * dim);
        for (const auto& row : samples) {
            if (row.size() != dim)
                throw input_error("ragged samples array in path JSON");
            for (const auto& v : row) data.push_back(v.get<double>());
        }
        Path p(static_cast<int>(dim), step, std::move(data),
               cont == "continuous" ? continuity::continuous : continuity::cadlag);
        if (std::llround(final_time / step) + 1 != p.nodes())
            throw input_error("path JSON sample count disagrees with final_time/grid_step");
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("path JSON has a mistyped field: ") + e.what());
    }
}

} // namespace pathctrl
