#pragma once

#include <cmath>
#include <string>

#include "l1chart/errors.hpp"

namespace l1chart {

enum class kernel_id { epanechnikov, triangular, boxcar };

/// Symmetric kernel with bounded support [-halfwidth, halfwidth] integrating
/// to 1. Smoothing weights are unnormalized kernel values K(d / bandwidth);
/// normalization cancels in weighted medians.
struct Kernel {
    kernel_id id = kernel_id::epanechnikov;
    double halfwidth = 1.0;

    /// Kernel value at u. Zero outside the support.
    double operator()(double u) const {
        const double t = u / halfwidth;
        switch (id) {
        case kernel_id::epanechnikov:
            return std::abs(t) < 1.0 ? 0.75 * (1.0 - t * t) / halfwidth : 0.0;
        case kernel_id::triangular:
            return std::abs(t) < 1.0 ? (1.0 - std::abs(t)) / halfwidth : 0.0;
        case kernel_id::boxcar:
            return std::abs(t) <= 1.0 ? 0.5 / halfwidth : 0.0;
        }
        return 0.0;
    }

    /// Smoothing weight for a point at distance d from the target, scaled by
    /// bandwidth b: K(d / b).
    double weight(double d, double b) const { return (*this)(d / b); }

    /// Support radius of the bandwidth-b window.
    double support(double b) const { return halfwidth * b; }
};

inline Kernel kernel_from_name(const std::string& name, double halfwidth = 1.0) {
    if (!(halfwidth > 0.0))
        throw validation_error("kernel halfwidth must be positive");
    if (name == "epanechnikov") return {kernel_id::epanechnikov, halfwidth};
    if (name == "triangular") return {kernel_id::triangular, halfwidth};
    if (name == "boxcar") return {kernel_id::boxcar, halfwidth};
    throw validation_error("unknown kernel '" + name +
                           "' (expected epanechnikov, triangular, or boxcar)");
}

inline std::string kernel_name(const Kernel& k) {
    switch (k.id) {
    case kernel_id::epanechnikov: return "epanechnikov";
    case kernel_id::triangular: return "triangular";
    case kernel_id::boxcar: return "boxcar";
    }
    return "?";
}

} // namespace l1chart
