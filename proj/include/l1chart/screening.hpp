#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "l1chart/fit.hpp"
#include "l1chart/profile.hpp"

namespace l1chart {

/// Deviation of one profile from the reference model: center deviation in
/// MAD units (d), and the max and sum of absolute standardized residuals
/// (t1, t2).
struct DeviationScores {
    double d = 0.0;
    double t1 = 0.0;
    double t2 = 0.0;
    std::size_t n_points = 0;
};

enum class limit_method { empirical, bootstrap };

/// Per-statistic control limits at the family level alpha_star, chosen so the
/// Phase I joint flag count stays below n * alpha0.
struct ControlLimits {
    double alpha0 = 0.0;
    double alpha_star = 0.0;
    double c_d = 0.0;
    double c_t1 = 0.0;
    double c_t2 = 0.0;
    limit_method method = limit_method::empirical;
    std::uint32_t bootstrap_reps = 0; ///< 0 for empirical
    std::uint64_t seed = 0;
    std::uint64_t model_fingerprint = 0;
};

struct ScreeningRow {
    std::string id;
    double d = 0.0;
    double t1 = 0.0;
    double t2 = 0.0;
    bool flag_d = false;
    bool flag_t1 = false;
    bool flag_t2 = false;
    bool outlier = false;
};

struct ScreeningReport {
    std::vector<ScreeningRow> rows; ///< input order
    ControlLimits limits;

    std::size_t outlier_count() const;
};

/// Scores one profile against the model. All its locations must lie within
/// the fitted curve domain; a zero center spread with a deviating center is
/// an error (a zero deviation over zero spread scores d = 0).
DeviationScores score_profile(const Profile& p, const FittedModel& model);

/// Conservative upper empirical quantile: the ceil(n (1 - alpha))-th order
/// statistic (1-indexed, ascending). alpha in (0, 1).
double empirical_upper_quantile(std::vector<double> values, double alpha);

/// Searches the per-statistic level alpha over {k/n} U {alpha0} U {1/(2n)}
/// (descending) for the largest value whose joint Phase I flag count is below
/// n * alpha0; quantiles of the score pools at that level become the limits.
/// The bootstrap method pools profile-level resamples of the Phase I scores
/// (reps resamples, per-resample substreams of `seed`).
ControlLimits calibrate_limits(const FittedModel& model, double alpha0,
                               limit_method method = limit_method::empirical,
                               std::uint32_t bootstrap_reps = 1000, std::uint64_t seed = 0);

/// Flags strict exceedances of the limits. The limits must have been
/// calibrated from this model (fingerprint check).
ScreeningReport screen(const ProfileSet& set, const FittedModel& model,
                       const ControlLimits& limits);
ScreeningReport screen(const Profile& p, const FittedModel& model, const ControlLimits& limits);

/// CSV: id,D,T1,T2,flag_D,flag_T1,flag_T2,outlier (flags as 0/1).
void report_to_csv(const ScreeningReport& report, std::ostream& out);

/// Chart-ready CSV for one statistic: id,score,limit. statistic is "D", "T1",
/// or "T2".
void chart_to_csv(const ScreeningReport& report, const std::string& statistic, std::ostream& out);

void save_limits(const ControlLimits& limits, std::ostream& out);
ControlLimits load_limits(std::istream& in);
void save_limits_file(const ControlLimits& limits, const std::string& path);
ControlLimits load_limits_file(const std::string& path);

const char* limit_method_name(limit_method m);
limit_method limit_method_from_name(const std::string& name);

} // namespace l1chart
