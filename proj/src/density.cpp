#include "l1chart/density.hpp"

#include <algorithm>
#include <cmath>

#include "l1chart/errors.hpp"

namespace l1chart {

LocationDensity::LocationDensity(std::vector<double> sorted_pooled_x, double a, double b,
                                 Kernel kernel, double bandwidth)
    : x_(std::move(sorted_pooled_x)), a_(a), b_(b), kernel_(kernel), bandwidth_(bandwidth) {
    if (x_.empty())
        throw validation_error("location density requires at least one location");
    if (!(bandwidth_ > 0.0))
        throw validation_error("location density bandwidth must be positive");
    if (!std::is_sorted(x_.begin(), x_.end()))
        std::sort(x_.begin(), x_.end());
}

double LocationDensity::raw(double x) const {
    const double radius = kernel_.support(bandwidth_);
    const auto lo = std::lower_bound(x_.begin(), x_.end(), x - radius);
    const auto hi = std::upper_bound(lo, x_.end(), x + radius);
    double sum = 0.0;
    for (auto it = lo; it != hi; ++it) sum += kernel_.weight(*it - x, bandwidth_) / bandwidth_;
    return sum / static_cast<double>(x_.size());
}

double LocationDensity::operator()(double x) const {
    if (x < a_ || x > b_)
        throw out_of_domain_error("density evaluated outside [" + format_double(a_) + ", " +
                                  format_double(b_) + "] at " + format_double(x));
    // Reflect at both endpoints; for bandwidths below the domain width only
    // the adjacent image can contribute, but both are cheap window lookups.
    double v = raw(x) + raw(2.0 * a_ - x) + raw(2.0 * b_ - x);
    return v;
}

LocationDensity estimate_location_density(const ProfileSet& set, double bandwidth, Kernel kernel) {
    std::vector<double> xs = set.pooled_x();
    if (xs.empty())
        throw validation_error("location density requires a non-empty profile set");
    if (bandwidth <= 0.0) {
        const double n = static_cast<double>(xs.size());
        double mean = 0.0;
        for (double v : xs) mean += v;
        mean /= n;
        double var = 0.0;
        for (double v : xs) var += (v - mean) * (v - mean);
        var = n > 1 ? var / (n - 1) : 0.0;
        const double sd = std::sqrt(var);
        const double width = set.b - set.a;
        bandwidth = 1.06 * (sd > 0.0 ? sd : width > 0.0 ? width : 1.0) * std::pow(n, -0.2);
        if (!(bandwidth > 0.0)) bandwidth = 1.0;
    }
    return LocationDensity(std::move(xs), set.a, set.b, kernel, bandwidth);
}

} // namespace l1chart
