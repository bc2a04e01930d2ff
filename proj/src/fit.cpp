#include "l1chart/fit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "l1chart/errors.hpp"
#include "l1chart/screening.hpp"

namespace l1chart {

double quantile_linear(std::vector<double> values, double p) {
    if (values.empty())
        throw validation_error("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    if (p <= 0.0) return values.front();
    if (p >= 1.0) return values.back();
    const double h = p * static_cast<double>(values.size() - 1);
    const std::size_t i = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(i);
    if (i + 1 >= values.size()) return values.back();
    return values[i] + frac * (values[i + 1] - values[i]);
}

double estimate_center(const Profile& p, const LocationDensity* density) {
    p.validate();
    if (density == nullptr) {
        std::vector<double> w(p.size(), 1.0);
        return weighted_median(p.y, w);
    }
    std::vector<double> w(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) {
        w[j] = (*density)(p.x[j]);
        if (!(w[j] > 0.0))
            throw validation_error("location density vanishes at x = " + format_double(p.x[j]) +
                                   " of profile " + p.id);
    }
    return weighted_median(p.y, w);
}

std::vector<CenteredProfile> center_profiles(const ProfileSet& set,
                                             const LocationDensity* density) {
    std::vector<CenteredProfile> out;
    out.reserve(set.size());
    for (const auto& p : set.profiles) {
        CenteredProfile c;
        c.source_id = p.id;
        c.delta = estimate_center(p, density);
        c.x = p.x;
        c.y.resize(p.size());
        for (std::size_t j = 0; j < p.size(); ++j) c.y[j] = p.y[j] - c.delta;
        out.push_back(std::move(c));
    }
    return out;
}

BandwidthGrid::BandwidthGrid(std::vector<double> cands, double data_resolution)
    : candidates(std::move(cands)) {
    if (candidates.empty())
        throw validation_error("bandwidth grid must be non-empty");
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (double c : candidates) {
        if (!(c > 0.0) || !std::isfinite(c))
            throw validation_error("bandwidth candidates must be positive and finite");
        if (c <= data_resolution)
            throw validation_error("bandwidth candidate " + format_double(c) +
                                   " does not exceed the data resolution " +
                                   format_double(data_resolution));
    }
}

namespace {

/// Gaps between consecutive distinct values of a sorted sample.
std::vector<double> distinct_gaps(const std::vector<double>& sorted_x) {
    std::vector<double> gaps;
    for (std::size_t i = 1; i < sorted_x.size(); ++i)
        if (sorted_x[i] > sorted_x[i - 1]) gaps.push_back(sorted_x[i] - sorted_x[i - 1]);
    return gaps;
}

} // namespace

BandwidthGrid BandwidthGrid::default_for(const ProfileSet& set) {
    const std::vector<double> xs = set.pooled_x();
    const std::vector<double> gaps = distinct_gaps(xs);
    if (gaps.empty())
        throw validation_error("cannot build a bandwidth grid: all locations coincide");
    std::vector<double> sorted_gaps = gaps;
    std::sort(sorted_gaps.begin(), sorted_gaps.end());
    const double median_gap = sorted_gaps[(sorted_gaps.size() - 1) / 2];
    const double min_gap = sorted_gaps.front();

    const double lo = 2.0 * median_gap;
    const double hi = (set.b - set.a) / 4.0;
    std::vector<double> cands;
    if (hi <= lo) {
        cands.push_back(lo);
    } else {
        constexpr int n_cand = 12;
        const double log_lo = std::log(lo);
        const double log_hi = std::log(hi);
        for (int k = 0; k < n_cand; ++k)
            cands.push_back(std::exp(log_lo + (log_hi - log_lo) * k / (n_cand - 1)));
    }
    return BandwidthGrid(std::move(cands), min_gap);
}

namespace {

/// Leave-one-profile-out local medians for every (fold, grid point) pair at
/// one bandwidth. Each window is gathered and sorted once; a fold's median is
/// then the weight-crossing point of the window with that profile's weight
/// subtracted, found by binary search over prefix sums.
struct LooCurves {
    std::size_t n_folds = 0;
    std::size_t n_grid = 0;
    std::vector<double> val; ///< n_folds x n_grid, fold-major
    std::vector<char> ok;

    double& at(std::size_t fold, std::size_t g) { return val[fold * n_grid + g]; }
    double at(std::size_t fold, std::size_t g) const { return val[fold * n_grid + g]; }
    bool is_ok(std::size_t fold, std::size_t g) const { return ok[fold * n_grid + g] != 0; }
};

struct WindowEntry {
    double y;
    double w;
    std::uint32_t prof;
    bool operator<(const WindowEntry& o) const { return y < o.y; }
};

LooCurves loo_median_curves(const PooledPoints& data, const std::vector<double>& grid,
                            const Kernel& kernel, double bandwidth, std::size_t n_folds) {
    LooCurves out;
    out.n_folds = n_folds;
    out.n_grid = grid.size();
    out.val.assign(n_folds * grid.size(), 0.0);
    out.ok.assign(n_folds * grid.size(), 0);

    std::vector<WindowEntry> win;
    std::vector<double> prefix; // cumulative weight over the sorted window
    std::vector<double> prof_total(n_folds);
    std::vector<std::uint32_t> count(n_folds);
    std::vector<std::uint32_t> cursor(n_folds);
    std::vector<double> run(n_folds);
    // Per-profile entries as (position, cumulative-weight-within-profile),
    // concatenated; prof_begin delimits each profile's slice.
    std::vector<std::pair<std::uint32_t, double>> prof_entries;
    std::vector<std::uint32_t> prof_begin(n_folds + 1);

    const double radius = kernel.support(bandwidth);
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        const double g = grid[gi];
        const auto lo_it = std::lower_bound(data.x.begin(), data.x.end(), g - radius);
        const auto hi_it = std::upper_bound(lo_it, data.x.end(), g + radius);
        win.clear();
        for (auto it = lo_it; it != hi_it; ++it) {
            const std::size_t j = static_cast<std::size_t>(it - data.x.begin());
            const double w = kernel.weight(data.x[j] - g, bandwidth);
            if (w > 0.0) win.push_back({data.y[j], w, data.profile_index[j]});
        }
        if (win.empty()) continue; // every fold stays not-ok at this grid point
        std::sort(win.begin(), win.end());

        const std::size_t m = win.size();
        prefix.resize(m);
        double cum = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            cum += win[k].w;
            prefix[k] = cum;
        }
        const double total = cum;

        // Group window positions by profile, preserving sort order.
        std::fill(prof_total.begin(), prof_total.end(), 0.0);
        std::fill(count.begin(), count.end(), 0u);
        std::fill(run.begin(), run.end(), 0.0);
        for (const auto& e : win) {
            prof_total[e.prof] += e.w;
            ++count[e.prof];
        }
        prof_begin[0] = 0;
        for (std::size_t f = 0; f < n_folds; ++f)
            prof_begin[f + 1] = prof_begin[f] + count[f];
        prof_entries.resize(m);
        std::copy(prof_begin.begin(), prof_begin.end() - 1, cursor.begin());
        for (std::size_t k = 0; k < m; ++k) {
            const std::uint32_t f = win[k].prof;
            run[f] += win[k].w;
            prof_entries[cursor[f]++] = {static_cast<std::uint32_t>(k), run[f]};
        }

        for (std::size_t fold = 0; fold < n_folds; ++fold) {
            const double w_fold = prof_total[fold];
            const double rem = total - w_fold;
            if (!(rem > 0.0)) continue; // window empty without this profile
            const double half = rem / 2.0;
            const auto ent_lo = prof_entries.begin() + prof_begin[fold];
            const auto ent_hi = prof_entries.begin() + prof_begin[fold + 1];
            // cum_excl(k) = prefix[k] - (fold's cumulative weight up to k),
            // nondecreasing in k: binary search the crossing.
            std::size_t lo = 0, hi = m - 1;
            auto cum_excl = [&](std::size_t k) {
                auto it = std::upper_bound(
                    ent_lo, ent_hi, k,
                    [](std::size_t kk, const std::pair<std::uint32_t, double>& e) {
                        return kk < e.first;
                    });
                const double fold_cum = it == ent_lo ? 0.0 : (it - 1)->second;
                return prefix[k] - fold_cum;
            };
            while (lo < hi) {
                const std::size_t mid = (lo + hi) / 2;
                if (cum_excl(mid) >= half) hi = mid; else lo = mid + 1;
            }
            // Excluded entries add nothing to cum_excl, so the smallest
            // crossing index is always a retained entry; the guard below is
            // purely defensive.
            std::size_t k = lo;
            while (k < m && win[k].prof == fold) ++k;
            if (k == m) continue;
            out.at(fold, gi) = win[k].y;
            out.ok[fold * out.n_grid + gi] = 1;
        }
    }
    return out;
}

/// Grid bracket of a location: either an exact grid index or the pair of
/// bracketing indices with the interpolation fraction.
struct Bracket {
    std::uint32_t lo = 0;
    std::uint32_t hi = 0;
    double t = 0.0; ///< 0 when exact
};

bool bracket_of(const std::vector<double>& grid, double x, Bracket& out) {
    if (x < grid.front() || x > grid.back()) return false;
    const auto it = std::lower_bound(grid.begin(), grid.end(), x);
    if (it != grid.end() && *it == x) {
        const auto i = static_cast<std::uint32_t>(it - grid.begin());
        out = {i, i, 0.0};
        return true;
    }
    const auto hi = static_cast<std::uint32_t>(it - grid.begin());
    out = {hi - 1, hi, (x - grid[hi - 1]) / (grid[hi] - grid[hi - 1])};
    return true;
}

/// Sum of |target - loo_jackknife(x)| over all points of every fold, where
/// loo_jackknife = 2 * curve_b - curve_sqrt2b per grid point. nullopt when a
/// needed grid value is missing. For s-kind smoothing both raw values and the
/// combination are floored.
std::optional<double> loo_objective(const LooCurves& cb, const LooCurves& cw,
                                    const std::vector<CenteredProfile>& centered,
                                    const std::vector<Bracket>& brackets,
                                    const std::vector<double>& target, bool is_scale,
                                    double s_floor) {
    double obj = 0.0;
    std::size_t at = 0;
    auto combined = [&](std::size_t fold, std::uint32_t g) {
        double a = cb.at(fold, g);
        double b = cw.at(fold, g);
        if (is_scale) {
            a = std::max(a, s_floor);
            b = std::max(b, s_floor);
        }
        double v = 2.0 * a - b;
        if (is_scale) v = std::max(v, s_floor);
        return v;
    };
    for (std::size_t fold = 0; fold < centered.size(); ++fold) {
        for (std::size_t j = 0; j < centered[fold].size(); ++j, ++at) {
            const Bracket& br = brackets[at];
            if (!cb.is_ok(fold, br.lo) || !cw.is_ok(fold, br.lo) || !cb.is_ok(fold, br.hi) ||
                !cw.is_ok(fold, br.hi))
                return std::nullopt;
            const double v_lo = combined(fold, br.lo);
            const double v = br.lo == br.hi ? v_lo : v_lo + br.t * (combined(fold, br.hi) - v_lo);
            obj += std::abs(target[at] - v);
        }
    }
    return obj;
}

std::vector<Bracket> brackets_for(const std::vector<CenteredProfile>& centered,
                                  const std::vector<double>& grid) {
    std::vector<Bracket> out;
    for (const auto& c : centered)
        for (double x : c.x) {
            Bracket br;
            if (!bracket_of(grid, x, br))
                throw out_of_domain_error("location " + format_double(x) +
                                          " outside the curve grid");
            out.push_back(br);
        }
    return out;
}

std::vector<double> concat_values(const std::vector<CenteredProfile>& centered) {
    std::vector<double> out;
    for (const auto& c : centered) out.insert(out.end(), c.y.begin(), c.y.end());
    return out;
}

/// Residuals in profile-point order (not pooled order), matching brackets_for.
std::vector<double> abs_resid_by_profile(const std::vector<CenteredProfile>& centered,
                                         const CurveEstimate& mu) {
    std::vector<double> out;
    for (const auto& c : centered)
        for (std::size_t j = 0; j < c.size(); ++j)
            out.push_back(std::abs(c.y[j] - evaluate_curve(mu, c.x[j])));
    return out;
}

/// Pooled points whose y are |y* - mu(x)|, for scale smoothing during CV.
PooledPoints residual_points(const PooledPoints& data, const CurveEstimate& mu) {
    PooledPoints r = data;
    r.y = absolute_residuals(data, mu);
    return r;
}

double select_bandwidth(const BandwidthGrid& grid_candidates,
                        const std::function<std::optional<double>(double)>& objective) {
    double best_b = 0.0;
    double best_obj = std::numeric_limits<double>::infinity();
    bool any = false;
    for (double b : grid_candidates.candidates) {
        const auto obj = objective(b);
        if (!obj) continue;
        if (!any || *obj < best_obj) { // strict: ties keep the smaller bandwidth
            any = true;
            best_obj = *obj;
            best_b = b;
        }
    }
    if (!any)
        throw no_feasible_bandwidth_error(
            "every bandwidth candidate was excluded by empty leave-one-out windows");
    return best_b;
}

} // namespace

std::optional<double> cv_objective_mu(const PooledPoints& data,
                                      const std::vector<CenteredProfile>& centered,
                                      const std::vector<double>& grid, const Kernel& kernel,
                                      double b) {
    const std::size_t n = centered.size();
    const LooCurves cb = loo_median_curves(data, grid, kernel, b, n);
    const LooCurves cw = loo_median_curves(data, grid, kernel, std::sqrt(2.0) * b, n);
    const auto brackets = brackets_for(centered, grid);
    const auto target = concat_values(centered);
    return loo_objective(cb, cw, centered, brackets, target, false, 0.0);
}

std::optional<double> cv_objective_s(const PooledPoints& data,
                                     const std::vector<double>& abs_resid,
                                     const std::vector<CenteredProfile>& centered,
                                     const std::vector<double>& grid, const Kernel& kernel,
                                     double h, double s_floor) {
    PooledPoints resid = data;
    resid.y = abs_resid;
    const std::size_t n = centered.size();
    const LooCurves cb = loo_median_curves(resid, grid, kernel, h, n);
    const LooCurves cw = loo_median_curves(resid, grid, kernel, std::sqrt(2.0) * h, n);
    const auto brackets = brackets_for(centered, grid);

    // Targets are the residuals in profile-point order (matching brackets).
    // abs_resid is in pooled x-sorted order; within a profile that order
    // agrees with the profile's own point order, so regrouping by tag works.
    std::vector<std::vector<double>> per_profile(n);
    for (std::size_t k = 0; k < data.size(); ++k)
        per_profile[data.profile_index[k]].push_back(abs_resid[k]);
    std::vector<double> target;
    target.reserve(data.size());
    for (std::size_t i = 0; i < n; ++i)
        target.insert(target.end(), per_profile[i].begin(), per_profile[i].end());

    return loo_objective(cb, cw, centered, brackets, target, true, s_floor);
}

double select_bandwidth_mu(const PooledPoints& data,
                           const std::vector<CenteredProfile>& centered,
                           const std::vector<double>& grid, const Kernel& kernel,
                           const BandwidthGrid& grid_candidates) {
    if (centered.size() < 3)
        throw numeric_error("bandwidth cross-validation requires at least 3 profiles");
    return select_bandwidth(grid_candidates, [&](double b) {
        return cv_objective_mu(data, centered, grid, kernel, b);
    });
}

double select_bandwidth_s(const PooledPoints& data, const std::vector<double>& abs_resid,
                          const std::vector<CenteredProfile>& centered,
                          const std::vector<double>& grid, const Kernel& kernel,
                          const BandwidthGrid& grid_candidates, double s_floor) {
    if (centered.size() < 3)
        throw numeric_error("bandwidth cross-validation requires at least 3 profiles");
    return select_bandwidth(grid_candidates, [&](double h) {
        return cv_objective_s(data, abs_resid, centered, grid, kernel, h, s_floor);
    });
}

namespace {

std::vector<double> distinct_sorted(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

CenterStats make_center_stats(const std::vector<CenteredProfile>& centered) {
    CenterStats cs;
    cs.deltas.reserve(centered.size());
    for (const auto& c : centered) cs.deltas.push_back(c.delta);
    std::vector<double> w(cs.deltas.size(), 1.0);
    cs.mu_delta = weighted_median(cs.deltas, w);
    std::vector<double> devs(cs.deltas.size());
    for (std::size_t i = 0; i < devs.size(); ++i) devs[i] = std::abs(cs.deltas[i] - cs.mu_delta);
    cs.s_delta = weighted_median(devs, w);
    return cs;
}

double compute_s_floor(const PooledPoints& data) {
    const double q1 = quantile_linear(data.y, 0.25);
    const double q3 = quantile_linear(data.y, 0.75);
    double floor = 1e-8 * (q3 - q1);
    if (!(floor > 0.0)) {
        // Degenerate spread: fall back to a scale tied to the data magnitude
        // so deviation scores stay finite.
        double max_abs = 0.0;
        for (double v : data.y) max_abs = std::max(max_abs, std::abs(v));
        floor = 1e-8 * std::max(1.0, max_abs);
    }
    return floor;
}

/// Curves + stats for a profile subset (used for leave-one-out scoring).
/// Bandwidths, kernel, grid, and s_floor stay fixed at their full-data values
/// so that held-out scores measure the profile, not a re-tuned model.
FittedModel refit_without(const std::vector<CenteredProfile>& centered, std::size_t leave_out,
                          const std::vector<double>& grid, const FittedModel& full) {
    std::vector<CenteredProfile> sub;
    sub.reserve(centered.size() - 1);
    for (std::size_t i = 0; i < centered.size(); ++i)
        if (i != leave_out) sub.push_back(centered[i]);

    FittedModel m;
    m.kernel = full.kernel;
    m.domain_a = full.domain_a;
    m.domain_b = full.domain_b;
    m.bandwidth_mu = full.bandwidth_mu;
    m.bandwidth_s = full.bandwidth_s;
    m.s_floor = full.s_floor;

    const PooledPoints data = PooledPoints::from_centered(sub);
    const CurveEstimate mu_b = lad_curve(data, grid, m.kernel, m.bandwidth_mu);
    const CurveEstimate mu_w = lad_curve(data, grid, m.kernel, std::sqrt(2.0) * m.bandwidth_mu);
    m.mu_tilde = jackknife(mu_b, mu_w);
    const CurveEstimate s_h = scale_curve(data, m.mu_tilde, grid, m.kernel, m.bandwidth_s,
                                          m.s_floor);
    const CurveEstimate s_w = scale_curve(data, m.mu_tilde, grid, m.kernel,
                                          std::sqrt(2.0) * m.bandwidth_s, m.s_floor);
    m.s_tilde = jackknife(s_h, s_w, m.s_floor);
    m.centers = make_center_stats(sub);
    return m;
}

} // namespace

FittedModel fit(const ProfileSet& set, const FitConfig& config) {
    if (set.size() < 3)
        throw numeric_error("fitting requires at least 3 profiles, got " +
                            std::to_string(set.size()));

    std::optional<LocationDensity> density;
    if (config.uneven_locations)
        density = estimate_location_density(set, config.density_bandwidth, config.kernel);

    const std::vector<CenteredProfile> centered =
        center_profiles(set, density ? &*density : nullptr);
    const PooledPoints data = PooledPoints::from_centered(centered);
    const std::vector<double> grid = distinct_sorted(data.x);

    FittedModel m;
    m.kernel = config.kernel;
    m.domain_a = set.a;
    m.domain_b = set.b;
    m.s_floor = compute_s_floor(data);
    m.centers = make_center_stats(centered);

    BandwidthGrid bw_grid;
    if (!config.bandwidth_mu || !config.bandwidth_s)
        bw_grid = config.bandwidth_grid ? *config.bandwidth_grid : BandwidthGrid::default_for(set);

    if (config.bandwidth_mu) {
        if (!(*config.bandwidth_mu > 0.0))
            throw validation_error("bandwidth_mu must be positive");
        m.bandwidth_mu = *config.bandwidth_mu;
    } else {
        m.bandwidth_mu = select_bandwidth_mu(data, centered, grid, m.kernel, bw_grid);
    }

    const CurveEstimate mu_b = lad_curve(data, grid, m.kernel, m.bandwidth_mu);
    const CurveEstimate mu_w = lad_curve(data, grid, m.kernel, std::sqrt(2.0) * m.bandwidth_mu);
    m.mu_tilde = jackknife(mu_b, mu_w);

    if (config.bandwidth_s) {
        if (!(*config.bandwidth_s > 0.0))
            throw validation_error("bandwidth_s must be positive");
        m.bandwidth_s = *config.bandwidth_s;
    } else {
        const std::vector<double> abs_resid = absolute_residuals(data, m.mu_tilde);
        m.bandwidth_s =
            select_bandwidth_s(data, abs_resid, centered, grid, m.kernel, bw_grid, m.s_floor);
    }

    const CurveEstimate s_h = scale_curve(data, m.mu_tilde, grid, m.kernel, m.bandwidth_s,
                                          m.s_floor);
    const CurveEstimate s_w = scale_curve(data, m.mu_tilde, grid, m.kernel,
                                          std::sqrt(2.0) * m.bandwidth_s, m.s_floor);
    m.s_tilde = jackknife(s_h, s_w, m.s_floor);

    m.phase1_scores.reserve(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        DeviationScores sc;
        if (config.loo_scores) {
            const FittedModel loo = refit_without(centered, i, grid, m);
            sc = score_profile(set.profiles[i], loo);
        } else {
            sc = score_profile(set.profiles[i], m);
        }
        m.phase1_scores.push_back({set.profiles[i].id, sc.d, sc.t1, sc.t2});
    }
    return m;
}

} // namespace l1chart
