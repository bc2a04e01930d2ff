#include "l1chart/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "l1chart/errors.hpp"
#include "l1chart/fit.hpp"
#include "l1chart/rng.hpp"

namespace l1chart {

namespace {

constexpr int kDegree = 2; // quadratic basis

std::vector<double> clamped_knots(double a, double b, const std::vector<double>& internal) {
    if (!(a < b))
        throw validation_error("basis domain must satisfy a < b");
    for (std::size_t i = 0; i < internal.size(); ++i) {
        if (!(internal[i] > a && internal[i] < b))
            throw validation_error("internal knots must lie strictly inside the domain");
        if (i > 0 && !(internal[i - 1] < internal[i]))
            throw validation_error("internal knots must be strictly increasing");
    }
    std::vector<double> knots;
    knots.reserve(internal.size() + 2 * (kDegree + 1));
    for (int i = 0; i <= kDegree; ++i) knots.push_back(a);
    knots.insert(knots.end(), internal.begin(), internal.end());
    for (int i = 0; i <= kDegree; ++i) knots.push_back(b);
    return knots;
}

} // namespace

BSplineBasis::BSplineBasis() : BSplineBasis(0.0, 0.626, {0.06, 0.16, 0.31, 0.47, 0.56}) {}

BSplineBasis::BSplineBasis(double a, double b, std::vector<double> internal_knots)
    : knots_(clamped_knots(a, b, internal_knots)),
      n_basis_(knots_.size() - kDegree - 1) {}

std::vector<double> BSplineBasis::operator()(double x) const {
    if (!(x >= knots_.front() && x <= knots_.back()))
        throw out_of_domain_error("location " + format_double(x) + " is outside the basis domain [" +
                                  format_double(knots_.front()) + ", " +
                                  format_double(knots_.back()) + "]");

    // Span index: knots_[span] <= x < knots_[span + 1], the closed right
    // endpoint folded into the last nonempty span.
    const std::size_t last_span = knots_.size() - kDegree - 2;
    std::size_t span;
    if (x == knots_.back()) {
        span = last_span;
    } else {
        span = static_cast<std::size_t>(
                   std::upper_bound(knots_.begin(), knots_.end(), x) - knots_.begin()) -
               1;
        span = std::min(std::max<std::size_t>(span, kDegree), last_span);
    }

    // Triangular Cox-de Boor recursion for the kDegree + 1 values that are
    // nonzero on this span.
    double n[kDegree + 1], left[kDegree + 1], right[kDegree + 1];
    n[0] = 1.0;
    for (int j = 1; j <= kDegree; ++j) {
        left[j] = x - knots_[span + 1 - j];
        right[j] = knots_[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double temp = n[r] / (right[r + 1] + left[j - r]);
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }

    std::vector<double> out(n_basis_, 0.0);
    for (int r = 0; r <= kDegree; ++r) out[span - kDegree + r] = n[r];
    return out;
}

double Contamination::operator()(double x) const {
    switch (kind) {
        case contamination_kind::none:
            return 0.0;
        case contamination_kind::sine:
            return amplitude * std::sin(10.0 * M_PI * x);
        case contamination_kind::spike: {
            const double t = (x - center) / width;
            return amplitude * std::exp(-0.5 * t * t) / (std::sqrt(2.0 * M_PI) * width);
        }
    }
    throw validation_error("unknown contamination kind");
}

void SyntheticSpec::validate() const {
    if (locations.empty())
        throw validation_error("generator needs at least one location");
    for (std::size_t j = 0; j < locations.size(); ++j) {
        if (!std::isfinite(locations[j]))
            throw validation_error("generator locations must be finite");
        if (j > 0 && !(locations[j - 1] < locations[j]))
            throw validation_error("generator locations must be strictly increasing");
        if (!(locations[j] >= basis.domain_a() && locations[j] <= basis.domain_b()))
            throw validation_error("generator location " + format_double(locations[j]) +
                                   " is outside the basis domain");
    }
    if (mean_coeffs.size() != basis.size())
        throw validation_error("mean_coeffs must supply one value per basis function (" +
                               std::to_string(basis.size()) + ")");
    for (double c : mean_coeffs)
        if (!std::isfinite(c)) throw validation_error("mean_coeffs must be finite");
    if (!(sigma_delta >= 0.0) || !std::isfinite(sigma_delta))
        throw validation_error("sigma_delta must be >= 0");
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw validation_error("sigma must be >= 0");
    if (!(corr_rate > 0.0) || !std::isfinite(corr_rate))
        throw validation_error("corr_rate must be positive");
    if (!std::isfinite(contamination.amplitude))
        throw validation_error("contamination amplitude must be finite");
    if (contamination.kind == contamination_kind::spike) {
        if (!(contamination.width > 0.0) || !std::isfinite(contamination.width))
            throw validation_error("spike width must be positive");
        if (!std::isfinite(contamination.center))
            throw validation_error("spike center must be finite");
    }
}

std::vector<double> SyntheticSpec::mean_curve() const {
    std::vector<double> out;
    out.reserve(locations.size());
    for (double x : locations) {
        const std::vector<double> pi = basis(x);
        out.push_back(std::inner_product(pi.begin(), pi.end(), mean_coeffs.begin(), 0.0));
    }
    return out;
}

std::vector<double> sample_error_path(const SyntheticSpec& spec, Rng& rng) {
    const std::size_t m = spec.locations.size();
    // Standardized path first: the exponential kernel on an ordered grid is
    // Markov, so the AR(1) recursion reproduces the covariance exactly.
    std::vector<double> u(m);
    u[0] = rng.normal();
    for (std::size_t j = 1; j < m; ++j) {
        const double rho = std::exp(-spec.corr_rate * (spec.locations[j] - spec.locations[j - 1]));
        u[j] = rho * u[j - 1] + std::sqrt(1.0 - rho * rho) * rng.normal();
    }
    if (spec.noise == noise_kind::gaussian) {
        for (double& v : u) v *= spec.sigma;
    } else {
        // Gaussian copula with a t3 margin. Var(t3) = 3, so sigma / sqrt(3)
        // restores marginal variance sigma^2; the map is odd, so the marginal
        // median stays 0. The clamp keeps an extreme underflowed tail
        // probability out of the quantile.
        const double scale = spec.sigma / std::sqrt(3.0);
        for (double& v : u) {
            const double p = std::min(1.0 - 1e-16, std::max(1e-300, normal_cdf(v)));
            v = scale * student_t3_quantile(p);
        }
    }
    return u;
}

ProfileSet generate(const SyntheticSpec& spec, std::size_t n_profiles) {
    spec.validate();
    if (n_profiles == 0)
        throw validation_error("n_profiles must be >= 1");

    const std::vector<double> mean = spec.mean_curve();
    const std::size_t m = spec.locations.size();
    std::vector<double> contam(m);
    for (std::size_t j = 0; j < m; ++j) contam[j] = spec.contamination(spec.locations[j]);

    int width = 1;
    for (std::size_t v = n_profiles; v >= 10; v /= 10) ++width;

    std::vector<Profile> profiles;
    profiles.reserve(n_profiles);
    for (std::size_t i = 0; i < n_profiles; ++i) {
        Rng rng = Rng::stream(spec.seed, i);
        const double delta = spec.sigma_delta * rng.normal();
        const std::vector<double> path = sample_error_path(spec, rng);

        Profile p;
        char buf[32];
        std::snprintf(buf, sizeof buf, "P%0*zu", width, i + 1);
        p.id = buf;
        p.x = spec.locations;
        p.y.resize(m);
        for (std::size_t j = 0; j < m; ++j) p.y[j] = delta + mean[j] + contam[j] + path[j];
        profiles.push_back(std::move(p));
    }
    return ProfileSet(std::move(profiles));
}

namespace {

/// Solves the K x K system a * beta = rhs in place (partial pivoting).
/// Throws when a pivot collapses, which is how a rank-deficient design
/// (an empty knot span leaves a zero column) surfaces.
std::vector<double> solve_normal_equations(std::vector<double> a, std::vector<double> rhs,
                                           std::size_t k) {
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    const double tol = std::max(scale, 1.0) * 1e-13;

    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < k; ++row)
            if (std::abs(a[row * k + col]) > std::abs(a[pivot * k + col])) pivot = row;
        if (std::abs(a[pivot * k + col]) <= tol)
            throw numeric_error("rank-deficient spline design: a basis function has no "
                                "supporting data (empty knot span)");
        if (pivot != col) {
            for (std::size_t j = col; j < k; ++j) std::swap(a[col * k + j], a[pivot * k + j]);
            std::swap(rhs[col], rhs[pivot]);
        }
        for (std::size_t row = col + 1; row < k; ++row) {
            const double f = a[row * k + col] / a[col * k + col];
            if (f == 0.0) continue;
            for (std::size_t j = col; j < k; ++j) a[row * k + j] -= f * a[col * k + j];
            rhs[row] -= f * rhs[col];
        }
    }
    std::vector<double> beta(k);
    for (std::size_t row = k; row-- > 0;) {
        double acc = rhs[row];
        for (std::size_t j = row + 1; j < k; ++j) acc -= a[row * k + j] * beta[j];
        beta[row] = acc / a[row * k + row];
    }
    return beta;
}

} // namespace

std::vector<double> l1_spline_fit(const BSplineBasis& basis, const std::vector<double>& x,
                                  const std::vector<double>& y, std::vector<double>* residuals) {
    if (x.empty() || x.size() != y.size())
        throw validation_error("L1 spline fit needs matching nonempty x and y");
    const std::size_t m = x.size();
    const std::size_t k = basis.size();

    std::vector<double> design(m * k);
    double y_scale = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const std::vector<double> row = basis(x[j]);
        std::copy(row.begin(), row.end(), design.begin() + static_cast<std::ptrdiff_t>(j * k));
        y_scale = std::max(y_scale, std::abs(y[j]));
    }

    // IRLS on the smoothed objective sum sqrt(r^2 + eps^2): each reweighted
    // least-squares step is a majorize-minimize update, so the objective is
    // nonincreasing and the smoothing gap to the true L1 optimum stays below
    // roughly (number of interpolated points) * eps.
    const double eps = 1e-10 * (1.0 + y_scale);
    std::vector<double> beta(k, 0.0);
    std::vector<double> r = y;
    auto smoothed = [&](const std::vector<double>& res) {
        double obj = 0.0;
        for (double v : res) obj += std::sqrt(v * v + eps * eps);
        return obj;
    };
    auto refresh_residuals = [&](const std::vector<double>& coef, std::vector<double>& res) {
        for (std::size_t j = 0; j < m; ++j) {
            double fitv = 0.0;
            for (std::size_t c = 0; c < k; ++c) fitv += design[j * k + c] * coef[c];
            res[j] = y[j] - fitv;
        }
    };

    double obj = smoothed(r);
    std::vector<double> a(k * k), rhs(k), trial(k), r_trial(m);
    for (int iter = 0; iter < 500; ++iter) {
        std::fill(a.begin(), a.end(), 0.0);
        std::fill(rhs.begin(), rhs.end(), 0.0);
        for (std::size_t j = 0; j < m; ++j) {
            const double w = 1.0 / std::sqrt(r[j] * r[j] + eps * eps);
            const double* row = design.data() + j * k;
            for (std::size_t c1 = 0; c1 < k; ++c1) {
                if (row[c1] == 0.0) continue;
                const double wc = w * row[c1];
                rhs[c1] += wc * y[j];
                for (std::size_t c2 = c1; c2 < k; ++c2) a[c1 * k + c2] += wc * row[c2];
            }
        }
        for (std::size_t c1 = 0; c1 < k; ++c1)
            for (std::size_t c2 = 0; c2 < c1; ++c2) a[c1 * k + c2] = a[c2 * k + c1];

        std::vector<double> target = solve_normal_equations(a, rhs, k);

        // Backtrack toward the previous iterate if rounding breaks descent.
        double step = 1.0;
        double trial_obj = obj;
        for (int half = 0; half < 30; ++half) {
            for (std::size_t c = 0; c < k; ++c)
                trial[c] = beta[c] + step * (target[c] - beta[c]);
            refresh_residuals(trial, r_trial);
            trial_obj = smoothed(r_trial);
            if (trial_obj <= obj || iter == 0) break;
            step *= 0.5;
        }
        if (iter == 0 || trial_obj <= obj) {
            beta.swap(trial);
            r.swap(r_trial);
            const double drop = obj - trial_obj;
            obj = trial_obj;
            if (iter > 0 && drop <= 1e-12 * (1.0 + obj)) break;
        } else {
            break;
        }
    }

    if (residuals) *residuals = r;
    return beta;
}

SyntheticSpec calibrate_spec_from_phase1(const ProfileSet& set, const BSplineBasis& basis) {
    if (set.size() == 0)
        throw validation_error("calibration needs at least one profile");

    const std::size_t k = basis.size();
    std::vector<double> coeff_sum(k, 0.0);
    std::vector<double> centers;
    std::vector<double> pooled_resid;
    centers.reserve(set.size());
    for (const auto& p : set.profiles) {
        std::vector<double> resid;
        const std::vector<double> beta = l1_spline_fit(basis, p.x, p.y, &resid);
        for (std::size_t c = 0; c < k; ++c) coeff_sum[c] += beta[c];
        pooled_resid.insert(pooled_resid.end(), resid.begin(), resid.end());
        centers.push_back(estimate_center(p));
    }

    auto sample_sd = [](const std::vector<double>& v) {
        if (v.size() < 2) return 0.0;
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double ss = 0.0;
        for (double val : v) ss += (val - mean) * (val - mean);
        return std::sqrt(ss / static_cast<double>(v.size() - 1));
    };

    SyntheticSpec spec;
    spec.basis = basis;
    std::vector<double> pooled = set.pooled_x();
    pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());
    spec.locations = std::move(pooled);
    spec.mean_coeffs.resize(k);
    for (std::size_t c = 0; c < k; ++c)
        spec.mean_coeffs[c] = coeff_sum[c] / static_cast<double>(set.size());
    spec.sigma_delta = sample_sd(centers);
    spec.sigma = sample_sd(pooled_resid);
    return spec;
}

const char* noise_kind_name(noise_kind k) {
    return k == noise_kind::gaussian ? "gaussian" : "t3_scaled";
}

noise_kind noise_kind_from_name(const std::string& name) {
    if (name == "gaussian") return noise_kind::gaussian;
    if (name == "t3_scaled") return noise_kind::t3_scaled;
    throw validation_error("unknown noise kind '" + name + "' (expected gaussian or t3_scaled)");
}

const char* contamination_kind_name(contamination_kind k) {
    switch (k) {
        case contamination_kind::none: return "none";
        case contamination_kind::sine: return "sine";
        case contamination_kind::spike: return "spike";
    }
    return "none";
}

contamination_kind contamination_kind_from_name(const std::string& name) {
    if (name == "none") return contamination_kind::none;
    if (name == "sine") return contamination_kind::sine;
    if (name == "spike") return contamination_kind::spike;
    throw validation_error("unknown contamination kind '" + name +
                           "' (expected none, sine, or spike)");
}

namespace {

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_double(v[i]);
    }
    return out;
}

std::vector<double> split_doubles(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string item =
            text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        double v;
        if (!parse_double(item, v))
            throw parse_error("cannot parse numeric list item '" + item + "'");
        out.push_back(v);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

} // namespace

void serialize_spec_comments(const SyntheticSpec& spec, std::ostream& out) {
    out << "# generator=l1chart-synthetic-1\n";
    out << "# noise=" << noise_kind_name(spec.noise) << '\n';
    out << "# corr_rate=" << format_double(spec.corr_rate) << '\n';
    out << "# sigma_delta=" << format_double(spec.sigma_delta) << '\n';
    out << "# sigma=" << format_double(spec.sigma) << '\n';
    out << "# seed=" << spec.seed << '\n';
    out << "# contamination=" << contamination_kind_name(spec.contamination.kind) << '\n';
    if (spec.contamination.kind != contamination_kind::none)
        out << "# contamination_amplitude=" << format_double(spec.contamination.amplitude) << '\n';
    if (spec.contamination.kind == contamination_kind::spike) {
        out << "# contamination_center=" << format_double(spec.contamination.center) << '\n';
        out << "# contamination_width=" << format_double(spec.contamination.width) << '\n';
    }
    out << "# basis_domain=" << format_double(spec.basis.domain_a()) << ','
        << format_double(spec.basis.domain_b()) << '\n';
    out << "# basis_knots=" << join_doubles(spec.basis.internal_knots()) << '\n';
    out << "# mean_coeffs=" << join_doubles(spec.mean_coeffs) << '\n';
    const std::size_t m = spec.locations.size();
    bool uniform = m >= 2;
    if (uniform) {
        const double step = spec.locations[1] - spec.locations[0];
        const std::vector<double> regen =
            make_grid(spec.locations.front(), spec.locations.back(), step);
        uniform = regen == spec.locations;
        if (uniform)
            out << "# locations=grid " << format_double(spec.locations.front()) << ' '
                << format_double(spec.locations.back()) << ' ' << format_double(step) << '\n';
    }
    if (!uniform)
        out << "# locations=list " << join_doubles(spec.locations) << '\n';
}

SyntheticSpec parse_spec_comments(std::istream& in) {
    SyntheticSpec spec;
    double basis_a = 0.0, basis_b = 0.626;
    std::vector<double> basis_knots = {0.06, 0.16, 0.31, 0.47, 0.56};
    bool saw_generator = false, saw_locations = false, saw_coeffs = false;
    std::string line;
    while (in.peek() == '#' && std::getline(in, line)) {
        std::string body = line.substr(1);
        if (!body.empty() && body.front() == ' ') body.erase(0, 1);
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos) continue; // ordinary comment
        const std::string key = body.substr(0, eq);
        const std::string value = body.substr(eq + 1);
        auto parse_num = [&](const std::string& text) {
            double v;
            if (!parse_double(text, v))
                throw parse_error("generator comment: cannot parse " + key + " value '" + text +
                                  "'");
            return v;
        };
        if (key == "generator") {
            if (value != "l1chart-synthetic-1")
                throw parse_error("unsupported generator tag '" + value + "'");
            saw_generator = true;
        } else if (key == "noise") {
            spec.noise = noise_kind_from_name(value);
        } else if (key == "corr_rate") {
            spec.corr_rate = parse_num(value);
        } else if (key == "sigma_delta") {
            spec.sigma_delta = parse_num(value);
        } else if (key == "sigma") {
            spec.sigma = parse_num(value);
        } else if (key == "seed") {
            try {
                spec.seed = std::stoull(value);
            } catch (const std::exception&) {
                throw parse_error("generator comment: cannot parse seed '" + value + "'");
            }
        } else if (key == "contamination") {
            spec.contamination.kind = contamination_kind_from_name(value);
        } else if (key == "contamination_amplitude") {
            spec.contamination.amplitude = parse_num(value);
        } else if (key == "contamination_center") {
            spec.contamination.center = parse_num(value);
        } else if (key == "contamination_width") {
            spec.contamination.width = parse_num(value);
        } else if (key == "basis_domain") {
            const std::vector<double> d = split_doubles(value);
            if (d.size() != 2)
                throw parse_error("generator comment: basis_domain needs two values");
            basis_a = d[0];
            basis_b = d[1];
        } else if (key == "basis_knots") {
            // An empty value is a basis without internal knots.
            basis_knots = value.empty() ? std::vector<double>{} : split_doubles(value);
        } else if (key == "mean_coeffs") {
            spec.mean_coeffs = split_doubles(value);
            saw_coeffs = true;
        } else if (key == "locations") {
            std::istringstream fields(value);
            std::string mode;
            fields >> mode;
            if (mode == "grid") {
                std::string first_s, last_s, step_s;
                if (!(fields >> first_s >> last_s >> step_s))
                    throw parse_error("generator comment: malformed grid locations");
                double first, last, step;
                if (!parse_double(first_s, first) || !parse_double(last_s, last) ||
                    !parse_double(step_s, step))
                    throw parse_error("generator comment: malformed grid locations");
                spec.locations = make_grid(first, last, step);
            } else if (mode == "list") {
                std::string rest;
                std::getline(fields, rest);
                if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
                spec.locations = split_doubles(rest);
            } else {
                throw parse_error("generator comment: unknown locations mode '" + mode + "'");
            }
            saw_locations = true;
        }
        // Unknown keys are ignored so future comments stay compatible.
    }
    if (!saw_generator)
        throw parse_error("no generator comment block found");
    if (!saw_locations || !saw_coeffs)
        throw parse_error("generator comment block is missing locations or mean_coeffs");
    spec.basis = BSplineBasis(basis_a, basis_b, basis_knots);
    spec.validate();
    return spec;
}

SyntheticSpec default_pseudo_vdp_spec() {
    SyntheticSpec spec;
    spec.locations = make_grid(0.0, 0.626, 0.002);
    // Bathtub-shaped density mean and dispersion parameters calibrated from
    // the committed reference data set (data/pseudo_vdp.csv); regenerating
    // that file and re-running the calibration reproduces these numbers.
    spec.mean_coeffs = {61.5, 59.0, 50.0, 46.5, 46.0, 47.0, 52.5, 60.5};
    spec.sigma_delta = 0.5;
    spec.sigma = 0.45;
    spec.corr_rate = 8.0;
    spec.noise = noise_kind::gaussian;
    spec.seed = 0;
    return spec;
}

} // namespace l1chart
