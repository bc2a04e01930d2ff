#include "l1chart/lad.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "l1chart/errors.hpp"

namespace l1chart {

namespace {

/// Core lower-weighted-median on (value, weight) pairs sorted by value:
/// smallest value whose cumulative weight reaches half the total.
double lower_median_sorted(const std::vector<std::pair<double, double>>& pts) {
    double total = 0.0;
    for (const auto& p : pts) total += p.second;
    const double half = total / 2.0;
    double cum = 0.0;
    for (const auto& p : pts) {
        cum += p.second;
        if (cum >= half) return p.first;
    }
    return pts.back().first; // unreachable barring rounding at the top
}

} // namespace

double weighted_median(std::span<const double> values, std::span<const double> weights) {
    if (values.empty())
        throw validation_error("weighted_median: empty sample");
    if (values.size() != weights.size())
        throw validation_error("weighted_median: values/weights length mismatch");

    double total = 0.0;
    std::vector<std::pair<double, double>> pts(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(weights[i] >= 0.0))
            throw validation_error("weighted_median: negative or NaN weight");
        if (!std::isfinite(values[i]))
            throw validation_error("weighted_median: non-finite value");
        total += weights[i];
        pts[i] = {values[i], weights[i]};
    }
    if (!(total > 0.0))
        throw validation_error("weighted_median: total weight must be positive");

    std::sort(pts.begin(), pts.end());
    return lower_median_sorted(pts);
}

PooledPoints PooledPoints::from_centered(const std::vector<CenteredProfile>& centered) {
    std::size_t total = 0;
    for (const auto& c : centered) total += c.size();

    struct Row { double x, y; std::uint32_t idx; };
    std::vector<Row> rows;
    rows.reserve(total);
    for (std::size_t i = 0; i < centered.size(); ++i)
        for (std::size_t j = 0; j < centered[i].size(); ++j)
            rows.push_back({centered[i].x[j], centered[i].y[j], static_cast<std::uint32_t>(i)});
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& p, const Row& q) { return p.x < q.x; });

    PooledPoints out;
    out.x.resize(total);
    out.y.resize(total);
    out.profile_index.resize(total);
    for (std::size_t k = 0; k < total; ++k) {
        out.x[k] = rows[k].x;
        out.y[k] = rows[k].y;
        out.profile_index[k] = rows[k].idx;
    }
    return out;
}

namespace {

/// Weighted median of the kernel window around one grid point; false if the
/// window holds no positive weight. The scratch buffer is reused across grid
/// points to avoid reallocation in bandwidth-search loops.
bool window_median(const PooledPoints& data, const Kernel& kernel, double bandwidth,
                   double g, std::uint32_t skip_profile,
                   std::vector<std::pair<double, double>>& scratch, double& out) {
    const double radius = kernel.support(bandwidth);
    const auto lo = std::lower_bound(data.x.begin(), data.x.end(), g - radius);
    const auto hi = std::upper_bound(lo, data.x.end(), g + radius);
    const std::size_t first = static_cast<std::size_t>(lo - data.x.begin());
    const std::size_t last = static_cast<std::size_t>(hi - data.x.begin());

    scratch.clear();
    for (std::size_t j = first; j < last; ++j) {
        if (data.profile_index[j] == skip_profile) continue;
        const double w = kernel.weight(data.x[j] - g, bandwidth);
        if (w > 0.0) scratch.emplace_back(data.y[j], w);
    }
    if (scratch.empty()) return false;
    std::sort(scratch.begin(), scratch.end());
    out = lower_median_sorted(scratch);
    return true;
}

void check_grid(const std::vector<double>& grid) {
    if (grid.empty())
        throw validation_error("curve grid must be non-empty");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw validation_error("curve grid must be strictly increasing");
}

} // namespace

std::vector<double> median_smooth(const PooledPoints& data, const std::vector<double>& grid,
                                  const Kernel& kernel, double bandwidth,
                                  std::uint32_t skip_profile) {
    if (!(bandwidth > 0.0))
        throw validation_error("bandwidth must be positive");
    check_grid(grid);
    std::vector<double> out(grid.size());
    std::vector<std::pair<double, double>> scratch;
    for (std::size_t gi = 0; gi < grid.size(); ++gi)
        if (!window_median(data, kernel, bandwidth, grid[gi], skip_profile, scratch, out[gi]))
            throw empty_window_error(grid[gi], bandwidth);
    return out;
}

void median_smooth_partial(const PooledPoints& data, const std::vector<double>& grid,
                           const Kernel& kernel, double bandwidth, std::uint32_t skip_profile,
                           std::vector<double>& out, std::vector<char>& ok) {
    if (!(bandwidth > 0.0))
        throw validation_error("bandwidth must be positive");
    check_grid(grid);
    out.assign(grid.size(), 0.0);
    ok.assign(grid.size(), 0);
    std::vector<std::pair<double, double>> scratch;
    for (std::size_t gi = 0; gi < grid.size(); ++gi)
        ok[gi] = window_median(data, kernel, bandwidth, grid[gi], skip_profile, scratch, out[gi])
                     ? 1 : 0;
}

CurveEstimate lad_curve(const PooledPoints& data, const std::vector<double>& grid,
                        const Kernel& kernel, double bandwidth) {
    CurveEstimate c;
    c.grid = grid;
    c.values = median_smooth(data, grid, kernel, bandwidth);
    c.bandwidth = bandwidth;
    c.kind = curve_kind::mu_raw;
    return c;
}

double evaluate_curve(const CurveEstimate& curve, double x) {
    const auto& g = curve.grid;
    if (g.empty())
        throw validation_error("evaluate_curve: empty curve");
    if (x < g.front() || x > g.back())
        throw out_of_domain_error("location " + format_double(x) + " outside curve domain [" +
                                  format_double(g.front()) + ", " + format_double(g.back()) + "]");
    const auto it = std::lower_bound(g.begin(), g.end(), x);
    if (it != g.end() && *it == x)
        return curve.values[static_cast<std::size_t>(it - g.begin())];
    const std::size_t hi = static_cast<std::size_t>(it - g.begin());
    const std::size_t lo = hi - 1;
    const double t = (x - g[lo]) / (g[hi] - g[lo]);
    return curve.values[lo] + t * (curve.values[hi] - curve.values[lo]);
}

std::vector<double> absolute_residuals(const PooledPoints& data, const CurveEstimate& mu) {
    std::vector<double> r(data.size());
    std::vector<double> bad;
    for (std::size_t j = 0; j < data.size(); ++j) {
        if (data.x[j] < mu.grid.front() || data.x[j] > mu.grid.back()) {
            bad.push_back(data.x[j]);
            continue;
        }
        r[j] = std::abs(data.y[j] - evaluate_curve(mu, data.x[j]));
    }
    if (!bad.empty()) {
        std::string msg = "locations outside curve domain:";
        for (double v : bad) msg += ' ' + format_double(v);
        throw out_of_domain_error(msg);
    }
    return r;
}

CurveEstimate scale_curve(const PooledPoints& data, const CurveEstimate& mu_tilde,
                          const std::vector<double>& grid, const Kernel& kernel,
                          double bandwidth, double s_floor) {
    PooledPoints resid = data;
    resid.y = absolute_residuals(data, mu_tilde);
    CurveEstimate c;
    c.grid = grid;
    c.values = median_smooth(resid, grid, kernel, bandwidth);
    for (double& v : c.values) v = std::max(v, s_floor);
    c.bandwidth = bandwidth;
    c.kind = curve_kind::s_raw;
    return c;
}

CurveEstimate jackknife(const CurveEstimate& curve_b, const CurveEstimate& curve_sqrt2b,
                        double s_floor) {
    if (curve_b.grid != curve_sqrt2b.grid)
        throw validation_error("jackknife: curves must share an identical grid");
    const bool b_is_s = curve_b.kind == curve_kind::s_raw || curve_b.kind == curve_kind::s_jackknife;
    const bool w_is_s =
        curve_sqrt2b.kind == curve_kind::s_raw || curve_sqrt2b.kind == curve_kind::s_jackknife;
    if (b_is_s != w_is_s)
        throw validation_error("jackknife: curves must be of the same kind");
    const double ratio = curve_sqrt2b.bandwidth / curve_b.bandwidth;
    if (std::abs(ratio - std::sqrt(2.0)) > 1e-9)
        throw validation_error("jackknife: bandwidth ratio must be sqrt(2), got " +
                               format_double(ratio));

    CurveEstimate out;
    out.grid = curve_b.grid;
    out.values.resize(curve_b.values.size());
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = 2.0 * curve_b.values[i] - curve_sqrt2b.values[i];
    if (b_is_s)
        for (double& v : out.values) v = std::max(v, s_floor);
    out.bandwidth = curve_b.bandwidth;
    out.kind = b_is_s ? curve_kind::s_jackknife : curve_kind::mu_jackknife;
    return out;
}

const char* curve_kind_name(curve_kind k) {
    switch (k) {
    case curve_kind::mu_raw: return "mu_raw";
    case curve_kind::mu_jackknife: return "mu_jackknife";
    case curve_kind::s_raw: return "s_raw";
    case curve_kind::s_jackknife: return "s_jackknife";
    }
    return "?";
}

curve_kind curve_kind_from_name(const std::string& name) {
    if (name == "mu_raw") return curve_kind::mu_raw;
    if (name == "mu_jackknife") return curve_kind::mu_jackknife;
    if (name == "s_raw") return curve_kind::s_raw;
    if (name == "s_jackknife") return curve_kind::s_jackknife;
    throw parse_error("unknown curve kind '" + name + "'");
}

} // namespace l1chart
