#pragma once

#include <vector>

#include "l1chart/kernel.hpp"
#include "l1chart/profile.hpp"

namespace l1chart {

/// Kernel density estimate of the measurement-location distribution, built
/// from the pooled locations of a profile set. Mass falling outside the
/// domain is reflected back at the endpoints, so the estimate integrates to 1
/// over [a, b] regardless of bandwidth.
class LocationDensity {
public:
    LocationDensity(std::vector<double> sorted_pooled_x, double a, double b, Kernel kernel,
                    double bandwidth);

    /// Density at x in [a, b].
    double operator()(double x) const;

    double bandwidth() const { return bandwidth_; }
    double a() const { return a_; }
    double b() const { return b_; }

private:
    double raw(double x) const; ///< unreflected KDE term

    std::vector<double> x_;
    double a_, b_;
    Kernel kernel_;
    double bandwidth_;
};

/// Density of pooled locations of `set`. If bandwidth <= 0, a normal-reference
/// rule bandwidth (1.06 sd N^{-1/5}) is used.
LocationDensity estimate_location_density(const ProfileSet& set, double bandwidth = 0.0,
                                          Kernel kernel = {});

} // namespace l1chart
