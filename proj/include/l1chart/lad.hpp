#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "l1chart/curve.hpp"
#include "l1chart/kernel.hpp"
#include "l1chart/profile.hpp"

namespace l1chart {

/// Lower weighted median: the smallest value v in the sample whose cumulative
/// weight (total weight of entries <= v) reaches half the total weight. This
/// is a minimizer of sum_i w_i |v_i - theta|. Weights must be non-negative
/// with a positive total.
double weighted_median(std::span<const double> values, std::span<const double> weights);

/// Center-removed observations pooled over profiles, sorted by location.
/// profile_index tags each point with the profile it came from, enabling
/// leave-one-profile-out passes without re-pooling.
struct PooledPoints {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<std::uint32_t> profile_index;

    static PooledPoints from_centered(const std::vector<CenteredProfile>& centered);

    std::size_t size() const { return x.size(); }
};

/// Kernel-weighted local median of (x, y) at each grid point: the value
/// minimizing sum |y_j - theta| K((x_j - g) / bandwidth). Throws
/// empty_window_error if some grid point has no positively weighted data.
/// skip_profile (if not npos) excludes one profile's points.
std::vector<double> median_smooth(const PooledPoints& data, const std::vector<double>& grid,
                                  const Kernel& kernel, double bandwidth,
                                  std::uint32_t skip_profile = UINT32_MAX);

/// Lenient variant for bandwidth search: grid points with empty windows get
/// ok[g] = false instead of an error.
void median_smooth_partial(const PooledPoints& data, const std::vector<double>& grid,
                           const Kernel& kernel, double bandwidth, std::uint32_t skip_profile,
                           std::vector<double>& out, std::vector<char>& ok);

/// Location estimate: kernel-weighted local median of the centered responses
/// (kind mu_raw).
CurveEstimate lad_curve(const PooledPoints& data, const std::vector<double>& grid,
                        const Kernel& kernel, double bandwidth);

/// Scale estimate: kernel-weighted local median of |y - mu_tilde(x)| (kind
/// s_raw), floored at s_floor. mu_tilde must cover all data locations.
CurveEstimate scale_curve(const PooledPoints& data, const CurveEstimate& mu_tilde,
                          const std::vector<double>& grid, const Kernel& kernel,
                          double bandwidth, double s_floor);

/// Bias-corrected combination 2 c_b - c_{sqrt2 b}. Requires identical grids
/// and a bandwidth ratio of sqrt(2) within 1e-9. Raw kinds upgrade to their
/// jackknife kinds; s-kind results are floored at s_floor after combining.
CurveEstimate jackknife(const CurveEstimate& curve_b, const CurveEstimate& curve_sqrt2b,
                        double s_floor = 0.0);

/// Absolute residuals |y_j - mu(x_j)| against an already-fitted curve, for
/// scale smoothing. Throws out_of_domain_error if a location is uncovered.
std::vector<double> absolute_residuals(const PooledPoints& data, const CurveEstimate& mu);

} // namespace l1chart
