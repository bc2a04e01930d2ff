#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "l1chart/curve.hpp"
#include "l1chart/density.hpp"
#include "l1chart/kernel.hpp"
#include "l1chart/lad.hpp"
#include "l1chart/profile.hpp"

namespace l1chart {

/// Location and spread of the per-profile centers: lower median and
/// (unscaled) median absolute deviation.
struct CenterStats {
    std::vector<double> deltas; ///< per-profile centers, in profile-set order
    double mu_delta = 0.0;
    double s_delta = 0.0;
};

/// Candidate bandwidths for cross-validation, sorted ascending. Candidates at
/// or below the data resolution (minimum gap between distinct pooled
/// locations) are rejected at construction.
struct BandwidthGrid {
    std::vector<double> candidates;

    BandwidthGrid() = default;
    BandwidthGrid(std::vector<double> candidates, double data_resolution);

    /// Default: 12 log-spaced candidates from twice the median gap between
    /// consecutive distinct pooled locations up to a quarter of the domain.
    static BandwidthGrid default_for(const ProfileSet& set);
};

struct FitConfig {
    Kernel kernel{};
    std::optional<double> bandwidth_mu;   ///< fixed location bandwidth; CV if absent
    std::optional<double> bandwidth_s;    ///< fixed scale bandwidth; CV if absent
    std::optional<BandwidthGrid> bandwidth_grid; ///< CV grid override
    bool uneven_locations = false;        ///< weight centers by location density
    double density_bandwidth = 0.0;       ///< 0 = normal-reference rule
    bool loo_scores = false;              ///< leave-one-out Phase I scores
};

/// Per-profile deviation statistics retained from the reference fit.
struct Phase1Score {
    std::string id;
    double d = 0.0;
    double t1 = 0.0;
    double t2 = 0.0;
};

/// Reference model: centers, bias-corrected location and scale curves, and
/// the Phase I deviation scores used for calibration.
struct FittedModel {
    CenterStats centers;
    CurveEstimate mu_tilde; ///< kind mu_jackknife
    CurveEstimate s_tilde;  ///< kind s_jackknife, same grid as mu_tilde
    double bandwidth_mu = 0.0;
    double bandwidth_s = 0.0;
    Kernel kernel{};
    double domain_a = 0.0;
    double domain_b = 0.0;
    double s_floor = 0.0;
    std::vector<Phase1Score> phase1_scores;

    /// Hash of the canonical serialization (excluding the fingerprint line).
    /// Control limits store it so screening can reject a mismatched pairing.
    std::uint64_t fingerprint() const;
};

/// Center of one profile: lower median of its responses, weighted by the
/// location density when given. Weights must be positive at every location.
double estimate_center(const Profile& p, const LocationDensity* density = nullptr);

/// Centers every profile. Density weighting is applied when `density` is
/// non-null.
std::vector<CenteredProfile> center_profiles(const ProfileSet& set,
                                             const LocationDensity* density = nullptr);

/// Leave-one-profile-out L1 cross-validation objective for the location
/// bandwidth b: total absolute error of the bias-corrected leave-one-out
/// curves at the held-out points. nullopt if some required grid value has an
/// empty kernel window.
std::optional<double> cv_objective_mu(const PooledPoints& data,
                                      const std::vector<CenteredProfile>& centered,
                                      const std::vector<double>& grid, const Kernel& kernel,
                                      double b);

/// Same for the scale bandwidth h: leave-one-out bias-corrected scale curves
/// fitted to the full-data absolute residuals (taken against mu_tilde).
std::optional<double> cv_objective_s(const PooledPoints& data,
                                     const std::vector<double>& abs_resid,
                                     const std::vector<CenteredProfile>& centered,
                                     const std::vector<double>& grid, const Kernel& kernel,
                                     double h, double s_floor);

/// Smallest-objective candidate (ties break to the smaller bandwidth).
/// Throws no_feasible_bandwidth_error if every candidate is excluded.
double select_bandwidth_mu(const PooledPoints& data,
                           const std::vector<CenteredProfile>& centered,
                           const std::vector<double>& grid, const Kernel& kernel,
                           const BandwidthGrid& grid_candidates);

double select_bandwidth_s(const PooledPoints& data, const std::vector<double>& abs_resid,
                          const std::vector<CenteredProfile>& centered,
                          const std::vector<double>& grid, const Kernel& kernel,
                          const BandwidthGrid& grid_candidates, double s_floor);

/// Full reference fit: centers, bandwidth selection (unless fixed),
/// bias-corrected curves, Phase I scores. Requires >= 3 profiles.
FittedModel fit(const ProfileSet& set, const FitConfig& config = {});

/// Versioned key-value text serialization. Doubles are rendered with 17
/// significant digits, so a load reproduces the model bit for bit.
void save_model(const FittedModel& model, std::ostream& out);
FittedModel load_model(std::istream& in);
void save_model_file(const FittedModel& model, const std::string& path);
FittedModel load_model_file(const std::string& path);

/// Shared quantile helper (linear interpolation between order statistics).
double quantile_linear(std::vector<double> values, double p);

} // namespace l1chart
