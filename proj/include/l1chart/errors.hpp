#pragma once

#include <stdexcept>
#include <string>

namespace l1chart {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input: bad CSV, bad model/limits file, unparsable numbers.
class parse_error : public error {
public:
    explicit parse_error(const std::string& msg) : error(msg) {}
};

/// Structurally valid input that violates a documented precondition
/// (duplicate locations, empty id, out-of-range parameter, mismatched
/// model fingerprint, ...).
class validation_error : public error {
public:
    explicit validation_error(const std::string& msg) : error(msg) {}
};

/// A numeric procedure could not produce a result. Subtypes below.
class numeric_error : public error {
public:
    explicit numeric_error(const std::string& msg) : error(msg) {}
};

/// A kernel window at some grid point contains no positively weighted data.
class empty_window_error : public numeric_error {
public:
    empty_window_error(double location, double bandwidth)
        : numeric_error("empty kernel window at grid location " + std::to_string(location) +
                        " (bandwidth " + std::to_string(bandwidth) + ")"),
          location(location), bandwidth(bandwidth) {}
    double location;
    double bandwidth;
};

/// Every bandwidth candidate was excluded during cross-validation.
class no_feasible_bandwidth_error : public numeric_error {
public:
    explicit no_feasible_bandwidth_error(const std::string& msg) : numeric_error(msg) {}
};

/// A profile location falls outside the fitted curve domain.
class out_of_domain_error : public numeric_error {
public:
    explicit out_of_domain_error(const std::string& msg) : numeric_error(msg) {}
};

/// The reference-center spread is zero while a center deviates from it.
class degenerate_centers_error : public numeric_error {
public:
    explicit degenerate_centers_error(const std::string& msg) : numeric_error(msg) {}
};

/// No candidate per-statistic level satisfies the overall false-alarm budget.
class alpha_infeasible_error : public numeric_error {
public:
    alpha_infeasible_error(const std::string& msg, int flag_count)
        : numeric_error(msg), flag_count(flag_count) {}
    int flag_count;
};

} // namespace l1chart
