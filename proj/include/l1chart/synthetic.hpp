#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "l1chart/profile.hpp"

namespace l1chart {

class Rng;

/// Quadratic (order 3) clamped B-spline basis on [a, b]. The default basis
/// spans [0, 0.626] with internal knots (0.06, 0.16, 0.31, 0.47, 0.56),
/// giving exactly 8 functions.
class BSplineBasis {
  public:
    BSplineBasis();
    BSplineBasis(double a, double b, std::vector<double> internal_knots);

    std::size_t size() const { return n_basis_; }
    double domain_a() const { return knots_.front(); }
    double domain_b() const { return knots_.back(); }

    /// The knots strictly between the repeated endpoint triples.
    std::vector<double> internal_knots() const {
        return {knots_.begin() + 3, knots_.end() - 3};
    }

    /// All basis values at x (Cox-de Boor). Nonnegative, sum to 1, at most 3
    /// nonzero. x must lie in [a, b]; the right endpoint is closed.
    std::vector<double> operator()(double x) const;

  private:
    std::vector<double> knots_; ///< clamped: endpoints repeated 3 times
    std::size_t n_basis_ = 0;
};

enum class noise_kind { gaussian, t3_scaled };

enum class contamination_kind { none, sine, spike };

/// Additive mean disturbance: A sin(10 pi x), or a Gaussian bump
/// B phi((x - center)/width)/width of height B phi(0)/width at the center.
struct Contamination {
    contamination_kind kind = contamination_kind::none;
    double amplitude = 0.0; ///< A (sine) or B (spike)
    double center = 0.3;    ///< spike only
    double width = 0.005;   ///< spike only

    static Contamination none() { return {}; }
    static Contamination sine(double a) {
        return {contamination_kind::sine, a, 0.0, 0.0};
    }
    static Contamination spike(double b, double center = 0.3, double width = 0.005) {
        return {contamination_kind::spike, b, center, width};
    }

    double operator()(double x) const;
};

/// Generator configuration: spline mean, random profile centers
/// N(0, sigma_delta^2), and a stationary error process with marginal SD sigma
/// and correlation exp(-corr_rate |x - x'|).
struct SyntheticSpec {
    std::vector<double> locations; ///< strictly increasing, inside the basis domain
    std::vector<double> mean_coeffs; ///< one per basis function
    double sigma_delta = 0.0;
    double sigma = 0.0;
    noise_kind noise = noise_kind::gaussian;
    double corr_rate = 8.0;
    Contamination contamination{};
    std::uint64_t seed = 0;
    BSplineBasis basis{};

    void validate() const;

    /// Spline mean over `locations`.
    std::vector<double> mean_curve() const;
};

/// One correlated error path over spec.locations, consuming `rng`. Gaussian:
/// exact Markov sampling of the exponential-kernel process (marginal SD
/// sigma). t3_scaled: the same Gaussian path mapped pointwise through the
/// Gaussian copula to a t3 margin scaled by sigma/sqrt(3), so the marginal
/// variance is again sigma^2 and the marginal median 0.
std::vector<double> sample_error_path(const SyntheticSpec& spec, Rng& rng);

/// n_profiles independent profiles Y_i(x) = delta_i + mean(x) + c(x) + e_i(x).
/// Profile i draws from its own substream of spec.seed (center first, then
/// the path), so output is deterministic and independent of generation order.
ProfileSet generate(const SyntheticSpec& spec, std::size_t n_profiles);

/// Recovers generator parameters from reference data: per-profile L1
/// regression on the basis (IRLS), mean_coeffs = mean coefficient vector,
/// sigma_delta = SD of the per-profile centers, sigma = SD of the pooled
/// regression residuals. Throws numeric_error on a rank-deficient design.
SyntheticSpec calibrate_spec_from_phase1(const ProfileSet& set,
                                         const BSplineBasis& basis = BSplineBasis());

/// Per-profile L1 spline fit used by the calibration. Returns the
/// coefficients; `residuals`, when non-null, receives y - fit.
std::vector<double> l1_spline_fit(const BSplineBasis& basis, const std::vector<double>& x,
                                  const std::vector<double>& y,
                                  std::vector<double>* residuals = nullptr);

/// The committed reference generator: 314 locations at spacing 0.002 over
/// [0, 0.626], bathtub-shaped mean, parameters calibrated from the committed
/// fixture data set.
SyntheticSpec default_pseudo_vdp_spec();

/// Provenance comments ("# key=value" lines) describing the generator;
/// `parse_spec_comments` inverts them (locations are restored from
/// first/step/count). Used by the data emitter so a simulated CSV carries its
/// own generator configuration.
void serialize_spec_comments(const SyntheticSpec& spec, std::ostream& out);
SyntheticSpec parse_spec_comments(std::istream& in);

const char* noise_kind_name(noise_kind k);
noise_kind noise_kind_from_name(const std::string& name);
const char* contamination_kind_name(contamination_kind k);
contamination_kind contamination_kind_from_name(const std::string& name);

} // namespace l1chart
