#include "l1chart/screening.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "l1chart/errors.hpp"
#include "l1chart/rng.hpp"

namespace l1chart {

std::size_t ScreeningReport::outlier_count() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.outlier ? 1 : 0;
    return n;
}

DeviationScores score_profile(const Profile& p, const FittedModel& model) {
    p.validate();
    const auto& grid = model.mu_tilde.grid;
    if (grid.empty() || model.s_tilde.grid != grid)
        throw validation_error("model curves are missing or on mismatched grids");

    std::vector<double> outside;
    for (double x : p.x)
        if (x < grid.front() || x > grid.back()) outside.push_back(x);
    if (!outside.empty()) {
        std::string msg = "profile " + p.id + " has locations outside the fitted domain [" +
                          format_double(grid.front()) + ", " + format_double(grid.back()) + "]:";
        for (double v : outside) msg += ' ' + format_double(v);
        throw out_of_domain_error(msg);
    }

    const double delta_star = estimate_center(p);

    DeviationScores sc;
    sc.n_points = p.size();
    const double dev = std::abs(delta_star - model.centers.mu_delta);
    if (model.centers.s_delta > 0.0) {
        sc.d = dev / model.centers.s_delta;
    } else if (dev == 0.0) {
        sc.d = 0.0; // zero deviation over zero spread: no evidence of a shift
    } else {
        throw degenerate_centers_error(
            "reference centers have zero spread but profile " + p.id +
            " deviates from their median by " + format_double(dev));
    }

    double t1 = 0.0, t2 = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        const double mu = evaluate_curve(model.mu_tilde, p.x[j]);
        const double s = evaluate_curve(model.s_tilde, p.x[j]);
        if (!(s > 0.0))
            throw degenerate_centers_error("scale curve is not positive at x = " +
                                           format_double(p.x[j]));
        const double e = std::abs(p.y[j] - delta_star - mu) / s;
        t1 = std::max(t1, e);
        t2 += e;
    }
    sc.t1 = t1;
    sc.t2 = t2;
    return sc;
}

namespace {

/// 1-indexed rank of the conservative upper quantile. The 1e-9 nudge keeps
/// representation noise in n*(1-alpha) from bumping the ceiling.
std::size_t upper_quantile_rank(std::size_t n, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw validation_error("quantile level must lie in (0, 1)");
    const double raw = static_cast<double>(n) * (1.0 - alpha);
    auto k = static_cast<long long>(std::ceil(raw - 1e-9));
    k = std::max<long long>(1, std::min<long long>(static_cast<long long>(n), k));
    return static_cast<std::size_t>(k);
}

} // namespace

double empirical_upper_quantile(std::vector<double> values, double alpha) {
    if (values.empty())
        throw validation_error("empirical quantile of an empty sample");
    const std::size_t k = upper_quantile_rank(values.size(), alpha);
    std::sort(values.begin(), values.end());
    return values[k - 1];
}

ControlLimits calibrate_limits(const FittedModel& model, double alpha0, limit_method method,
                               std::uint32_t bootstrap_reps, std::uint64_t seed) {
    const auto& scores = model.phase1_scores;
    const std::size_t n = scores.size();
    if (n == 0)
        throw validation_error("calibration requires Phase I scores in the model");
    if (!(alpha0 > 0.0 && alpha0 <= 1.0))
        throw validation_error("alpha0 must lie in (0, 1]");
    if (method == limit_method::bootstrap && bootstrap_reps == 0)
        throw validation_error("bootstrap calibration requires at least 1 resample");

    // Score pools per statistic, sorted ascending.
    std::vector<double> pool_d, pool_t1, pool_t2;
    if (method == limit_method::empirical) {
        pool_d.reserve(n);
        pool_t1.reserve(n);
        pool_t2.reserve(n);
        for (const auto& s : scores) {
            pool_d.push_back(s.d);
            pool_t1.push_back(s.t1);
            pool_t2.push_back(s.t2);
        }
    } else {
        // Profile-level resampling keeps each profile's three scores together;
        // scores are not recomputed (the model is fixed), so a resample is a
        // multiset of the original triples. Per-resample substreams make the
        // pool independent of evaluation order.
        const std::size_t total = n * static_cast<std::size_t>(bootstrap_reps);
        pool_d.reserve(total);
        pool_t1.reserve(total);
        pool_t2.reserve(total);
        for (std::uint32_t rep = 0; rep < bootstrap_reps; ++rep) {
            Rng rng = Rng::stream(seed, 0xB007u, rep);
            for (std::size_t k = 0; k < n; ++k) {
                const std::size_t idx = rng.uniform_index(n);
                pool_d.push_back(scores[idx].d);
                pool_t1.push_back(scores[idx].t1);
                pool_t2.push_back(scores[idx].t2);
            }
        }
    }
    std::sort(pool_d.begin(), pool_d.end());
    std::sort(pool_t1.begin(), pool_t1.end());
    std::sort(pool_t2.begin(), pool_t2.end());

    // Candidate per-statistic levels, searched from the largest down. k/n are
    // the points where the empirical quantile changes; 1/(2n) sits below 1/n
    // and puts every limit at the pool maximum, which satisfies the budget
    // whenever it is positive (no Phase I score strictly exceeds a maximum).
    std::vector<double> candidates;
    const auto max_k = static_cast<long long>(std::floor(
        static_cast<double>(n) * alpha0 + 1e-9));
    for (long long k = 1; k <= max_k; ++k)
        candidates.push_back(static_cast<double>(k) / static_cast<double>(n));
    candidates.push_back(alpha0);
    candidates.push_back(std::min(alpha0, 1.0 / (2.0 * static_cast<double>(n))));
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    const double budget = static_cast<double>(n) * alpha0 - 1e-9;
    int last_count = -1;
    for (std::size_t ci = candidates.size(); ci-- > 0;) {
        const double alpha = candidates[ci];
        if (!(alpha > 0.0 && alpha < 1.0)) continue;
        const std::size_t size = pool_d.size();
        const std::size_t rank = upper_quantile_rank(size, alpha);
        const double c_d = pool_d[rank - 1];
        const double c_t1 = pool_t1[rank - 1];
        const double c_t2 = pool_t2[rank - 1];

        int count = 0;
        for (const auto& s : scores)
            if (s.d > c_d || s.t1 > c_t1 || s.t2 > c_t2) ++count;
        last_count = count;

        if (static_cast<double>(count) < budget) {
            if (!(c_d > 0.0 && c_t1 > 0.0 && c_t2 > 0.0))
                throw validation_error("calibrated limits must be positive; the score pools "
                                       "are degenerate");
            ControlLimits lim;
            lim.alpha0 = alpha0;
            lim.alpha_star = alpha;
            lim.c_d = c_d;
            lim.c_t1 = c_t1;
            lim.c_t2 = c_t2;
            lim.method = method;
            lim.bootstrap_reps = method == limit_method::bootstrap ? bootstrap_reps : 0;
            lim.seed = seed;
            lim.model_fingerprint = model.fingerprint();
            return lim;
        }
    }
    throw alpha_infeasible_error(
        "no candidate level satisfies the joint false-alarm budget; flag count at the "
        "smallest candidate is " + std::to_string(last_count) + " with budget " +
        format_double(static_cast<double>(n) * alpha0),
        last_count);
}

ScreeningReport screen(const ProfileSet& set, const FittedModel& model,
                       const ControlLimits& limits) {
    if (limits.model_fingerprint != model.fingerprint())
        throw validation_error("control limits were calibrated from a different model "
                               "(fingerprint mismatch)");
    ScreeningReport report;
    report.limits = limits;
    report.rows.reserve(set.size());
    for (const auto& p : set.profiles) {
        const DeviationScores sc = score_profile(p, model);
        ScreeningRow row;
        row.id = p.id;
        row.d = sc.d;
        row.t1 = sc.t1;
        row.t2 = sc.t2;
        row.flag_d = sc.d > limits.c_d;
        row.flag_t1 = sc.t1 > limits.c_t1;
        row.flag_t2 = sc.t2 > limits.c_t2;
        row.outlier = row.flag_d || row.flag_t1 || row.flag_t2;
        report.rows.push_back(std::move(row));
    }
    return report;
}

ScreeningReport screen(const Profile& p, const FittedModel& model, const ControlLimits& limits) {
    ProfileSet set({p});
    return screen(set, model, limits);
}

void report_to_csv(const ScreeningReport& report, std::ostream& out) {
    out << "id,D,T1,T2,flag_D,flag_T1,flag_T2,outlier\n";
    for (const auto& r : report.rows)
        out << r.id << ',' << format_double(r.d) << ',' << format_double(r.t1) << ','
            << format_double(r.t2) << ',' << (r.flag_d ? 1 : 0) << ',' << (r.flag_t1 ? 1 : 0)
            << ',' << (r.flag_t2 ? 1 : 0) << ',' << (r.outlier ? 1 : 0) << '\n';
}

void chart_to_csv(const ScreeningReport& report, const std::string& statistic,
                  std::ostream& out) {
    double limit;
    enum { D, T1, T2 } which;
    if (statistic == "D") { which = D; limit = report.limits.c_d; }
    else if (statistic == "T1") { which = T1; limit = report.limits.c_t1; }
    else if (statistic == "T2") { which = T2; limit = report.limits.c_t2; }
    else throw validation_error("unknown chart statistic '" + statistic + "'");
    out << "id,score,limit\n";
    for (const auto& r : report.rows)
        out << r.id << ','
            << format_double(which == D ? r.d : which == T1 ? r.t1 : r.t2) << ','
            << format_double(limit) << '\n';
}

const char* limit_method_name(limit_method m) {
    return m == limit_method::empirical ? "empirical" : "bootstrap";
}

limit_method limit_method_from_name(const std::string& name) {
    if (name == "empirical") return limit_method::empirical;
    if (name == "bootstrap") return limit_method::bootstrap;
    throw validation_error("unknown limit method '" + name +
                           "' (expected empirical or bootstrap)");
}

void save_limits(const ControlLimits& limits, std::ostream& out) {
    out << "l1chart_limits 1\n";
    out << "alpha0 " << format_double(limits.alpha0) << '\n';
    out << "alpha_star " << format_double(limits.alpha_star) << '\n';
    out << "method " << limit_method_name(limits.method) << '\n';
    out << "bootstrap_reps " << limits.bootstrap_reps << '\n';
    out << "seed " << limits.seed << '\n';
    out << "model_fingerprint " << limits.model_fingerprint << '\n';
    out << "c_d " << format_double(limits.c_d) << '\n';
    out << "c_t1 " << format_double(limits.c_t1) << '\n';
    out << "c_t2 " << format_double(limits.c_t2) << '\n';
    out << "end\n";
}

namespace {

std::pair<std::string, std::string> split_key(const std::string& line) {
    const std::size_t sp = line.find(' ');
    if (sp == std::string::npos) return {line, ""};
    return {line.substr(0, sp), line.substr(sp + 1)};
}

double parse_double_or_throw(const std::string& text, const std::string& what) {
    double v;
    if (!parse_double(text, v))
        throw parse_error("cannot parse " + what + " value '" + text + "'");
    return v;
}

std::uint64_t parse_u64_or_throw(const std::string& text, const std::string& what) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw parse_error("cannot parse " + what + " value '" + text + "'");
    }
}

} // namespace

ControlLimits load_limits(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || split_key(line).first != "l1chart_limits")
        throw parse_error("limits file: missing 'l1chart_limits' header");
    if (split_key(line).second != "1")
        throw parse_error("limits file: unsupported format version '" +
                          split_key(line).second + "'");
    ControlLimits lim;
    bool ended = false;
    while (std::getline(in, line)) {
        auto [key, rest] = split_key(line);
        if (key.empty()) continue;
        if (key == "end") { ended = true; break; }
        if (key == "alpha0") lim.alpha0 = parse_double_or_throw(rest, key);
        else if (key == "alpha_star") lim.alpha_star = parse_double_or_throw(rest, key);
        else if (key == "method") lim.method = limit_method_from_name(rest);
        else if (key == "bootstrap_reps")
            lim.bootstrap_reps = static_cast<std::uint32_t>(parse_u64_or_throw(rest, key));
        else if (key == "seed") lim.seed = parse_u64_or_throw(rest, key);
        else if (key == "model_fingerprint") lim.model_fingerprint = parse_u64_or_throw(rest, key);
        else if (key == "c_d") lim.c_d = parse_double_or_throw(rest, key);
        else if (key == "c_t1") lim.c_t1 = parse_double_or_throw(rest, key);
        else if (key == "c_t2") lim.c_t2 = parse_double_or_throw(rest, key);
        else throw parse_error("limits file: unknown key '" + key + "'");
    }
    if (!ended)
        throw parse_error("limits file: missing 'end' marker");
    return lim;
}

void save_limits_file(const ControlLimits& limits, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw parse_error("cannot open '" + path + "' for writing");
    save_limits(limits, out);
    if (!out.good())
        throw parse_error("failed writing limits to '" + path + "'");
}

ControlLimits load_limits_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw parse_error("cannot open limits file '" + path + "'");
    return load_limits(in);
}

} // namespace l1chart
