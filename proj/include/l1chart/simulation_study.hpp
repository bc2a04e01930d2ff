#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>

#include "l1chart/fit.hpp"
#include "l1chart/screening.hpp"
#include "l1chart/synthetic.hpp"

namespace l1chart {

inline constexpr std::array<double, 3> kSineAmplitudes = {0.75, 1.00, 1.25};
inline constexpr std::array<double, 3> kSpikeAmplitudes = {0.02, 0.03, 0.04};

/// Seed of record for the committed study results.
inline constexpr std::uint64_t kDefaultStudySeed = 1;

/// Detection rates (fractions of flagged Phase II profiles) for one error
/// kind: clean data plus the three sine and three spike disturbance levels.
struct Table1Row {
    double false_alarm = 0.0;
    std::array<double, 3> sine{};
    std::array<double, 3> spike{};
};

/// Output of the full screening study, with the fitted reference models and
/// limits retained so follow-up experiments can screen more data against the
/// same charts.
struct Table1Result {
    Table1Row gaussian;
    Table1Row t3;
    FittedModel model_gaussian;
    FittedModel model_t3;
    ControlLimits limits_gaussian;
    ControlLimits limits_t3;
    SyntheticSpec spec_gaussian; ///< Phase I generator (resolved seed)
    SyntheticSpec spec_t3;
};

/// Runs the whole protocol once per error kind: generate n_phase1 clean
/// profiles, fit the reference model (cross-validated bandwidths), calibrate
/// empirical limits at alpha0, then screen n_phase2 fresh profiles from the
/// clean model and from each disturbance cell. Every data set draws from its
/// own substream of `seed`, so the result is deterministic.
Table1Result run_table1(const SyntheticSpec& base, std::uint64_t seed,
                        std::size_t n_phase1 = 100, std::size_t n_phase2 = 100,
                        double alpha0 = 0.05);

/// Human-readable 2 x 7 percentage table.
void print_table1(const Table1Result& result, std::ostream& out);

/// CSV: error_kind plus the seven cell rates as fractions.
void table1_to_csv(const Table1Result& result, std::ostream& out);

} // namespace l1chart
