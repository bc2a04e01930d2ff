#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "l1chart/density.hpp"
#include "l1chart/errors.hpp"
#include "l1chart/lad.hpp"
#include "l1chart/rng.hpp"

using namespace l1chart;

namespace {

double wm(std::vector<double> v, std::vector<double> w) {
    return weighted_median(v, w);
}

// Independent reimplementation of the lower weighted median via sorted
// prefix sums, used as an oracle against the library version.
double wm_oracle(std::vector<double> v, std::vector<double> w) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < v.size(); ++i) pts.emplace_back(v[i], w[i]);
    std::sort(pts.begin(), pts.end());
    double total = 0.0;
    for (const auto& p : pts) total += p.second;
    double cum = 0.0;
    for (const auto& p : pts) {
        cum += p.second;
        if (cum >= total / 2.0) return p.first;
    }
    return pts.back().first;
}

double l1_objective(const std::vector<double>& v, const std::vector<double>& w, double theta) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * std::abs(v[i] - theta);
    return s;
}

PooledPoints make_pooled(std::vector<double> x, std::vector<double> y, std::uint32_t idx = 0) {
    PooledPoints p;
    p.x = std::move(x);
    p.y = std::move(y);
    p.profile_index.assign(p.x.size(), idx);
    return p;
}

} // namespace

TEST_CASE("weighted median basics") {
    CHECK(wm({5.0}, {1.0}) == 5.0);
    CHECK(wm({1.0, 2.0, 3.0}, {1.0, 1.0, 1.0}) == 2.0);
    CHECK(wm({3.0, 1.0, 2.0}, {1.0, 1.0, 1.0}) == 2.0);
    // Even split: cumulative weight at the lower of the two middle values
    // already reaches half the total, so the lower value wins.
    CHECK(wm({1.0, 2.0, 3.0, 4.0}, {1.0, 1.0, 1.0, 1.0}) == 2.0);
    CHECK(wm({0.0, 0.0, 10.0, 10.0, 10.0}, {3.0, 3.0, 1.0, 1.0, 1.0}) == 0.0);
    // Zero-weight entries are inert.
    CHECK(wm({-100.0, 1.0, 100.0}, {0.0, 1.0, 0.0}) == 1.0);
}

TEST_CASE("weighted median input validation") {
    CHECK_THROWS_AS(wm({}, {}), validation_error);
    CHECK_THROWS_AS(wm({1.0, 2.0}, {1.0}), validation_error);
    CHECK_THROWS_AS(wm({1.0}, {-0.5}), validation_error);
    CHECK_THROWS_AS(wm({1.0, 2.0}, {0.0, 0.0}), validation_error);
    const double nan = std::nan("");
    CHECK_THROWS_AS(wm({nan}, {1.0}), validation_error);
    CHECK_THROWS_AS(wm({1.0}, {nan}), validation_error);
}

TEST_CASE("weighted median matches prefix-sum oracle on random instances") {
    Rng rng(20240901);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t n = 1 + rng.uniform_index(40);
        std::vector<double> v(n), w(n);
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = std::floor(rng.uniform01() * 20.0) - 10.0; // many ties
            w[i] = rng.uniform01() < 0.2 ? 0.0 : rng.uniform01() * 3.0;
        }
        w[rng.uniform_index(n)] = 1.0; // keep the total positive
        CHECK(weighted_median(v, w) == wm_oracle(v, w));
    }
}

TEST_CASE("weighted median minimizes the weighted L1 objective") {
    Rng rng(77);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 1 + rng.uniform_index(25);
        std::vector<double> v(n), w(n);
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = rng.normal() * 4.0;
            w[i] = 0.05 + rng.uniform01();
        }
        const double m = weighted_median(v, w);
        const double fm = l1_objective(v, w, m);
        // The objective is piecewise linear, so checking all sample points
        // plus midpoints covers every candidate minimizer.
        std::vector<double> probes = v;
        std::sort(probes.begin(), probes.end());
        for (std::size_t i = 0; i + 1 < n; ++i)
            probes.push_back(0.5 * (probes[i] + probes[i + 1]));
        for (double t : probes)
            CHECK(fm <= l1_objective(v, w, t) + 1e-9 * (1.0 + fm));
    }
}

TEST_CASE("weighted median translation and positive scaling are exact") {
    Rng rng(31337);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 1 + rng.uniform_index(15);
        std::vector<double> v(n), w(n);
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = rng.normal();
            w[i] = 0.1 + rng.uniform01();
        }
        const double m = weighted_median(v, w);
        const double c = 0.3;
        std::vector<double> shifted(n), scaled(n);
        for (std::size_t i = 0; i < n; ++i) {
            shifted[i] = v[i] + c;
            scaled[i] = v[i] * 2.5;
        }
        // Both maps are monotone, so the same sample element is selected and
        // the result is the mapped median, bit for bit.
        CHECK(weighted_median(shifted, w) == m + c);
        CHECK(weighted_median(scaled, w) == m * 2.5);
    }
}

TEST_CASE("weighted median ignores outliers carrying under half the weight") {
    // Clean mass 0.52 in [0, 1], wild mass 0.48 far away on both sides.
    std::vector<double> v = {0.2, 0.5, 0.9, -1e9, 1e9};
    std::vector<double> w = {0.20, 0.20, 0.12, 0.24, 0.24};
    const double m = weighted_median(v, w);
    CHECK(m >= 0.2);
    CHECK(m <= 0.9);
}

TEST_CASE("kernel shapes: symmetry, support, unit mass") {
    for (const char* name : {"epanechnikov", "triangular", "boxcar"}) {
        for (double hw : {1.0, 2.0}) {
            const Kernel k = kernel_from_name(name, hw);
            for (double u : {0.1, 0.37, 0.9 * hw, 1.3}) {
                CHECK(k(u) == k(-u));
                CHECK(k(u) >= 0.0);
            }
            CHECK(k(hw + 1e-9) == 0.0);
            CHECK(k(-hw - 1e-9) == 0.0);
            CHECK(k(10.0 * hw) == 0.0);
            // Simpson's rule over the support.
            const int n = 10000;
            const double hstep = 2.0 * hw / n;
            double integral = k(-hw) + k(hw);
            for (int i = 1; i < n; ++i)
                integral += (i % 2 == 1 ? 4.0 : 2.0) * k(-hw + i * hstep);
            integral *= hstep / 3.0;
            CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("kernel names round-trip and bad inputs throw") {
    for (const char* name : {"epanechnikov", "triangular", "boxcar"})
        CHECK(kernel_name(kernel_from_name(name)) == name);
    CHECK_THROWS_AS(kernel_from_name("gauss"), validation_error);
    CHECK_THROWS_AS(kernel_from_name("epanechnikov", 0.0), validation_error);
    CHECK_THROWS_AS(kernel_from_name("epanechnikov", -1.0), validation_error);
}

TEST_CASE("boxcar includes its support boundary, epanechnikov excludes it") {
    const auto data = make_pooled({1.0}, {42.0});
    const std::vector<double> grid = {0.0};
    CHECK(median_smooth(data, grid, Kernel{kernel_id::boxcar, 1.0}, 1.0)[0] == 42.0);
    CHECK_THROWS_AS(median_smooth(data, grid, Kernel{kernel_id::epanechnikov, 1.0}, 1.0),
                    empty_window_error);
}

TEST_CASE("median smooth of a single covered point returns that point") {
    const auto data = make_pooled({0.5}, {-3.75});
    const auto values = median_smooth(data, {0.5}, Kernel{}, 0.2);
    REQUIRE(values.size() == 1);
    CHECK(values[0] == -3.75);
}

TEST_CASE("median smooth with no reachable data reports the empty window") {
    const auto data = make_pooled({0.0, 0.1}, {1.0, 2.0});
    try {
        median_smooth(data, {0.0, 5.0}, Kernel{}, 0.5);
        FAIL("expected empty_window_error");
    } catch (const empty_window_error& e) {
        CHECK(e.location == 5.0);
        CHECK(e.bandwidth == 0.5);
    }
}

TEST_CASE("median smooth partial marks empty windows instead of throwing") {
    const auto data = make_pooled({0.0, 0.1}, {1.0, 2.0});
    std::vector<double> out;
    std::vector<char> ok;
    median_smooth_partial(data, {0.05, 5.0}, Kernel{}, 0.5, UINT32_MAX, out, ok);
    REQUIRE(out.size() == 2);
    REQUIRE(ok.size() == 2);
    CHECK(ok[0] == 1);
    CHECK(ok[1] == 0);
    CHECK(out[0] == 1.0);
}

TEST_CASE("median smooth skip_profile excludes exactly that profile") {
    PooledPoints data;
    data.x = {0.4, 0.5, 0.6};
    data.y = {100.0, 1.0, 2.0};
    data.profile_index = {7, 3, 3};
    const std::vector<double> grid = {0.5};
    CHECK(median_smooth(data, grid, Kernel{}, 1.0)[0] == 2.0);
    CHECK(median_smooth(data, grid, Kernel{}, 1.0, 7)[0] == 1.0);
    CHECK_THROWS_AS(median_smooth(make_pooled({0.5}, {1.0}, 3), grid, Kernel{}, 1.0, 3),
                    empty_window_error);
}

TEST_CASE("lad_curve of constant data is that constant, with raw location kind") {
    std::vector<double> x, y;
    for (int i = 0; i <= 50; ++i) {
        x.push_back(i / 50.0);
        y.push_back(3.25);
    }
    const auto data = make_pooled(std::move(x), std::move(y));
    const std::vector<double> grid = {0.0, 0.25, 0.5, 0.75, 1.0};
    const CurveEstimate c = lad_curve(data, grid, Kernel{}, 0.2);
    CHECK(c.kind == curve_kind::mu_raw);
    CHECK(c.bandwidth == 0.2);
    CHECK(c.grid == grid);
    for (double v : c.values) CHECK(v == 3.25);
}

TEST_CASE("lad_curve translation and scaling act on the values exactly") {
    Rng rng(11);
    std::vector<double> x, y;
    for (int i = 0; i < 200; ++i) {
        x.push_back(i / 199.0);
        y.push_back(std::sin(6.0 * x.back()) + 0.3 * rng.normal());
    }
    const auto base = make_pooled(x, y);
    auto shifted = base;
    auto scaled = base;
    const double c = 2.7;
    for (std::size_t i = 0; i < base.size(); ++i) {
        shifted.y[i] = base.y[i] + c;
        scaled.y[i] = base.y[i] * 2.0;
    }
    const std::vector<double> grid = {0.1, 0.3, 0.5, 0.7, 0.9};
    const auto f0 = lad_curve(base, grid, Kernel{}, 0.15);
    const auto fs = lad_curve(shifted, grid, Kernel{}, 0.15);
    const auto fm = lad_curve(scaled, grid, Kernel{}, 0.15);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        CHECK(fs.values[g] == f0.values[g] + c);
        CHECK(fm.values[g] == f0.values[g] * 2.0);
    }
}

TEST_CASE("median smooth sup error shrinks as the sample grows") {
    const auto truth = [](double t) { return std::sin(2.0 * M_PI * t); };
    const std::vector<double> grid = [] {
        std::vector<double> g;
        for (int i = 0; i <= 20; ++i) g.push_back(i / 20.0);
        return g;
    }();
    const auto mean_sup_error = [&](std::size_t n, double b) {
        double total = 0.0;
        for (int rep = 0; rep < 20; ++rep) {
            Rng rng = Rng::stream(555, static_cast<std::uint64_t>(n), rep);
            std::vector<double> x(n), y(n);
            for (std::size_t i = 0; i < n; ++i) {
                x[i] = n == 1 ? 0.5 : static_cast<double>(i) / (n - 1);
                y[i] = truth(x[i]) + 0.5 * rng.normal();
            }
            const auto fit = median_smooth(make_pooled(std::move(x), std::move(y)), grid,
                                           Kernel{}, b);
            double sup = 0.0;
            for (std::size_t g = 0; g < grid.size(); ++g)
                sup = std::max(sup, std::abs(fit[g] - truth(grid[g])));
            total += sup;
        }
        return total / 20.0;
    };
    CHECK(mean_sup_error(100, 0.15) < mean_sup_error(25, 0.25));
}

TEST_CASE("jackknife combination 2 f_b - f_{sqrt2 b}") {
    const std::vector<double> grid = {0.0, 0.5, 1.0};

    SUBCASE("agreeing curves are a fixed point, values bit-exact") {
        CurveEstimate a{grid, {3.7, -1.2, 0.001}, 0.1, curve_kind::mu_raw};
        CurveEstimate b{grid, {3.7, -1.2, 0.001}, 0.1 * std::sqrt(2.0), curve_kind::mu_raw};
        const CurveEstimate j = jackknife(a, b);
        CHECK(j.kind == curve_kind::mu_jackknife);
        CHECK(j.bandwidth == 0.1);
        for (std::size_t i = 0; i < grid.size(); ++i)
            CHECK(j.values[i] == a.values[i]);
    }

    SUBCASE("quadratic-in-bandwidth bias cancels") {
        // values(b) = truth + c b^2 gives 2 f_b - f_{sqrt2 b} = truth.
        const double truth = 5.0, c = 3.0, b = 0.2;
        CurveEstimate fb{grid, {truth + c * b * b, truth + c * b * b, truth + c * b * b}, b,
                         curve_kind::mu_raw};
        const double b2 = b * std::sqrt(2.0);
        CurveEstimate fw{grid, {truth + c * b2 * b2, truth + c * b2 * b2, truth + c * b2 * b2},
                         b2, curve_kind::mu_raw};
        const CurveEstimate j = jackknife(fb, fw);
        for (double v : j.values) CHECK(v == doctest::Approx(truth).epsilon(1e-12));
    }

    SUBCASE("scale curves floor after combining") {
        CurveEstimate a{grid, {0.5, 1.0, 2.0}, 0.1, curve_kind::s_raw};
        CurveEstimate b{grid, {1.0, 1.5, 2.0}, 0.1 * std::sqrt(2.0), curve_kind::s_raw};
        const CurveEstimate j = jackknife(a, b, 0.25);
        CHECK(j.kind == curve_kind::s_jackknife);
        CHECK(j.values[0] == 0.25); // 2*0.5 - 1.0 = 0 floored
        CHECK(j.values[1] == 0.5);
        CHECK(j.values[2] == 2.0);
    }

    SUBCASE("location curves are never floored") {
        CurveEstimate a{grid, {0.0, 0.0, 0.0}, 0.1, curve_kind::mu_raw};
        CurveEstimate b{grid, {5.0, 5.0, 5.0}, 0.1 * std::sqrt(2.0), curve_kind::mu_raw};
        const CurveEstimate j = jackknife(a, b, 0.25);
        for (double v : j.values) CHECK(v == -5.0);
    }

    SUBCASE("grid and bandwidth-ratio preconditions") {
        CurveEstimate a{grid, {1.0, 1.0, 1.0}, 0.1, curve_kind::mu_raw};
        CurveEstimate bad_grid{{0.0, 0.4, 1.0}, {1.0, 1.0, 1.0}, 0.1 * std::sqrt(2.0),
                               curve_kind::mu_raw};
        CHECK_THROWS_AS(jackknife(a, bad_grid), validation_error);
        CurveEstimate bad_ratio{grid, {1.0, 1.0, 1.0}, 0.15, curve_kind::mu_raw};
        CHECK_THROWS_AS(jackknife(a, bad_ratio), validation_error);
        CurveEstimate bad_kind{grid, {1.0, 1.0, 1.0}, 0.1 * std::sqrt(2.0), curve_kind::s_raw};
        CHECK_THROWS_AS(jackknife(a, bad_kind), validation_error);
    }
}

TEST_CASE("jackknife reduces the smoothing bias of a curved location") {
    // Truth x^2 has constant curvature, the worst case for a local-constant
    // median. Averaging fitted curves over seeds isolates bias from noise.
    const auto truth = [](double t) { return t * t; };
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
    const double b = 0.25;
    const std::size_t n = 3000;

    std::vector<double> avg_raw(grid.size(), 0.0), avg_jk(grid.size(), 0.0);
    const int reps = 20;
    for (int rep = 0; rep < reps; ++rep) {
        Rng rng = Rng::stream(101, rep);
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = static_cast<double>(i) / (n - 1);
            y[i] = truth(x[i]) + 0.1 * rng.normal();
        }
        const auto data = make_pooled(std::move(x), std::move(y));
        const auto raw = lad_curve(data, grid, Kernel{}, b);
        const auto wide = lad_curve(data, grid, Kernel{}, b * std::sqrt(2.0));
        const auto jk = jackknife(raw, wide);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            avg_raw[g] += raw.values[g] / reps;
            avg_jk[g] += jk.values[g] / reps;
        }
    }
    // Interior comparison: stay clear of both support radii (0.25 and 0.354).
    double bias_raw = 0.0, bias_jk = 0.0;
    int m = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (grid[g] < 0.4 || grid[g] > 0.6) continue;
        bias_raw += std::abs(avg_raw[g] - truth(grid[g]));
        bias_jk += std::abs(avg_jk[g] - truth(grid[g]));
        ++m;
    }
    REQUIRE(m > 0);
    CHECK(bias_jk / m < bias_raw / m);
    CHECK(bias_raw / m > 0.005); // the raw bias is actually visible here
}

TEST_CASE("scale_curve fundamentals") {
    std::vector<double> x;
    for (int i = 0; i < 100; ++i) x.push_back(i / 99.0);
    const std::vector<double> grid = {0.0, 0.5, 1.0};
    const CurveEstimate mu0{grid, {0.0, 0.0, 0.0}, 0.1, curve_kind::mu_jackknife};

    SUBCASE("zero residuals floor at s_floor") {
        const auto data = make_pooled(x, std::vector<double>(x.size(), 0.0));
        const CurveEstimate s = scale_curve(data, mu0, grid, Kernel{}, 0.3, 1e-8);
        CHECK(s.kind == curve_kind::s_raw);
        for (double v : s.values) CHECK(v == 1e-8);
    }

    SUBCASE("unit residuals give unit scale exactly") {
        std::vector<double> y(x.size());
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = i % 2 == 0 ? 1.0 : -1.0;
        const auto data = make_pooled(x, y);
        const CurveEstimate s = scale_curve(data, mu0, grid, Kernel{}, 0.3, 0.0);
        for (double v : s.values) CHECK(v == 1.0);
    }

    SUBCASE("sign flip of the residuals changes nothing") {
        Rng rng(5);
        std::vector<double> y(x.size());
        for (double& v : y) v = rng.normal();
        auto flipped = y;
        for (double& v : flipped) v = -v;
        const auto s1 = scale_curve(make_pooled(x, y), mu0, grid, Kernel{}, 0.3, 0.0);
        const auto s2 = scale_curve(make_pooled(x, flipped), mu0, grid, Kernel{}, 0.3, 0.0);
        CHECK(s1.values == s2.values);
    }

    SUBCASE("doubling the data doubles the scale exactly") {
        Rng rng(6);
        std::vector<double> y(x.size());
        for (double& v : y) v = rng.normal();
        auto doubled = y;
        for (double& v : doubled) v *= 2.0;
        const auto s1 = scale_curve(make_pooled(x, y), mu0, grid, Kernel{}, 0.3, 0.0);
        const auto s2 = scale_curve(make_pooled(x, doubled), mu0, grid, Kernel{}, 0.3, 0.0);
        for (std::size_t g = 0; g < grid.size(); ++g)
            CHECK(s2.values[g] == 2.0 * s1.values[g]);
    }
}

TEST_CASE("scale_curve recovers a unit median absolute deviation") {
    // For N(0, sigma^2), median|e| = sigma * qnorm(0.75). Choosing sigma as
    // the reciprocal makes the target scale exactly 1.
    const double sigma = 1.0 / 0.67448975019608171;
    Rng rng(909);
    std::vector<double> x, y;
    for (int i = 0; i < 2000; ++i) {
        x.push_back(i / 1999.0);
        y.push_back(sigma * rng.normal());
    }
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
    const CurveEstimate mu0{{0.0, 1.0}, {0.0, 0.0}, 0.1, curve_kind::mu_jackknife};
    const auto s = scale_curve(make_pooled(std::move(x), std::move(y)), mu0, grid, Kernel{},
                               0.3, 0.0);
    for (double v : s.values) CHECK(v == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("absolute_residuals evaluates against the curve and checks coverage") {
    const CurveEstimate mu{{0.0, 1.0}, {0.0, 10.0}, 0.1, curve_kind::mu_jackknife};
    const auto data = make_pooled({0.0, 0.25, 1.0}, {1.0, 2.0, 9.0});
    const auto r = absolute_residuals(data, mu);
    REQUIRE(r.size() == 3);
    CHECK(r[0] == 1.0);
    CHECK(r[1] == 0.5); // |2 - 2.5|
    CHECK(r[2] == 1.0);
    const auto outside = make_pooled({-0.5, 0.5, 1.5}, {0.0, 0.0, 0.0});
    CHECK_THROWS_AS(absolute_residuals(outside, mu), out_of_domain_error);
}

TEST_CASE("evaluate_curve interpolates linearly within the grid") {
    const CurveEstimate c{{0.0, 0.5, 1.0}, {1.0, 2.0, 4.0}, 0.1, curve_kind::mu_raw};
    CHECK(evaluate_curve(c, 0.0) == 1.0);
    CHECK(evaluate_curve(c, 0.5) == 2.0);
    CHECK(evaluate_curve(c, 1.0) == 4.0);
    CHECK(evaluate_curve(c, 0.25) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(evaluate_curve(c, 0.75) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK_THROWS_AS(evaluate_curve(c, -0.01), out_of_domain_error);
    CHECK_THROWS_AS(evaluate_curve(c, 1.01), out_of_domain_error);

    const CurveEstimate point{{2.0}, {7.0}, 0.1, curve_kind::mu_raw};
    CHECK(evaluate_curve(point, 2.0) == 7.0);
    CHECK_THROWS_AS(evaluate_curve(point, 2.5), out_of_domain_error);
}

namespace {

ProfileSet flat_profiles(std::vector<double> x) {
    Profile p{"p1", x, std::vector<double>(x.size(), 0.0)};
    return ProfileSet({std::move(p)}, 0.0, 1.0);
}

double trapezoid_mass(const LocationDensity& d, int n = 20000) {
    const double a = d.a(), b = d.b();
    double total = 0.5 * (d(a) + d(b));
    for (int i = 1; i < n; ++i) total += d(a + (b - a) * i / n);
    return total * (b - a) / n;
}

} // namespace

TEST_CASE("location density is flat for evenly spread locations") {
    std::vector<double> x;
    for (int i = 0; i < 1000; ++i) x.push_back((i + 0.5) / 1000.0);
    const auto d = estimate_location_density(flat_profiles(std::move(x)));
    CHECK(d.bandwidth() > 0.0);
    double lo = 1e300, hi = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double t = 0.1 + 0.8 * i / 100.0;
        lo = std::min(lo, d(t));
        hi = std::max(hi, d(t));
    }
    CHECK(hi / lo <= 1.1);
    CHECK(d(0.5) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("location density peaks where locations cluster") {
    std::vector<double> x;
    for (int i = 0; i < 900; ++i) x.push_back(0.45 + 0.1 * (i + 0.5) / 900.0);
    for (int i = 0; i < 100; ++i) x.push_back((i + 0.5) / 100.0);
    std::sort(x.begin(), x.end());
    const auto d = estimate_location_density(flat_profiles(std::move(x)), 0.03);
    CHECK(d(0.5) > 3.0 * d(0.1));
    CHECK(d(0.5) > 3.0 * d(0.9));
}

TEST_CASE("location density ratio matches the sampling-rate ratio") {
    // Left half sampled 4x as densely as the right half: the density ratio
    // between the halves must be ~4, like a histogram would report.
    std::vector<double> x;
    for (int i = 0; i < 500; ++i) x.push_back(0.5 * i / 500.0);
    for (int i = 0; i < 125; ++i) x.push_back(0.5 + 0.5 * (i + 0.5) / 125.0);
    std::sort(x.begin(), x.end());
    const auto d = estimate_location_density(flat_profiles(std::move(x)), 0.02);
    const double ratio = d(0.25) / d(0.75);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.10));
}

TEST_CASE("location density integrates to one even with reflection-heavy bandwidths") {
    std::vector<double> x;
    for (int i = 0; i < 200; ++i) x.push_back((i + 0.5) / 200.0);
    for (double bw : {0.0, 0.05, 0.5}) {
        const auto d = estimate_location_density(flat_profiles(x), bw);
        CHECK(trapezoid_mass(d) == doctest::Approx(1.0).epsilon(1e-3));
    }
    const auto tri = estimate_location_density(flat_profiles(x), 0.3,
                                               Kernel{kernel_id::triangular, 1.0});
    CHECK(trapezoid_mass(tri) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("pooled points preserve profile tags and sort by location") {
    std::vector<CenteredProfile> centered(2);
    centered[0] = {"a", 0.0, {0.5, 0.9}, {1.0, 2.0}};
    centered[1] = {"b", 0.0, {0.1, 0.7}, {3.0, 4.0}};
    const auto p = PooledPoints::from_centered(centered);
    CHECK(p.x == std::vector<double>{0.1, 0.5, 0.7, 0.9});
    CHECK(p.y == std::vector<double>{3.0, 1.0, 4.0, 2.0});
    CHECK(p.profile_index == std::vector<std::uint32_t>{1, 0, 1, 0});
}
