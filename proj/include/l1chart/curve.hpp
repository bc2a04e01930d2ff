#pragma once

#include <string>
#include <vector>

namespace l1chart {

enum class curve_kind { mu_raw, mu_jackknife, s_raw, s_jackknife };

/// A fitted curve sampled on a strictly increasing grid; evaluated elsewhere
/// by linear interpolation.
struct CurveEstimate {
    std::vector<double> grid;   ///< strictly increasing
    std::vector<double> values; ///< same length as grid
    double bandwidth = 0.0;
    curve_kind kind = curve_kind::mu_raw;
};

/// Linear interpolation on the curve grid. x must lie within
/// [grid.front(), grid.back()].
double evaluate_curve(const CurveEstimate& curve, double x);

const char* curve_kind_name(curve_kind k);
curve_kind curve_kind_from_name(const std::string& name);

} // namespace l1chart
