#include "l1chart/simulation_study.hpp"

#include <cstdio>
#include <ostream>

#include "l1chart/rng.hpp"

namespace l1chart {

namespace {

/// Independent data-set seed for (error kind, cell). Cell 0 is Phase I,
/// 1 the clean Phase II set, 2-4 the sine cells, 5-7 the spike cells.
std::uint64_t derived_seed(std::uint64_t base, unsigned kind, unsigned cell) {
    return Rng::stream(base, 0x7AB1E100u + kind, cell).next_u64();
}

struct KindOutcome {
    Table1Row row;
    FittedModel model;
    ControlLimits limits;
    SyntheticSpec phase1_spec;
};

KindOutcome run_kind(const SyntheticSpec& base, noise_kind kind, unsigned kind_index,
                     std::uint64_t seed, std::size_t n_phase1, std::size_t n_phase2,
                     double alpha0) {
    SyntheticSpec spec = base;
    spec.noise = kind;
    spec.contamination = Contamination::none();

    KindOutcome out;
    spec.seed = derived_seed(seed, kind_index, 0);
    out.phase1_spec = spec;
    const ProfileSet phase1 = generate(spec, n_phase1);
    out.model = fit(phase1);
    out.limits = calibrate_limits(out.model, alpha0);

    auto cell_rate = [&](const Contamination& contamination, unsigned cell) {
        SyntheticSpec cell_spec = spec;
        cell_spec.contamination = contamination;
        cell_spec.seed = derived_seed(seed, kind_index, cell);
        const ProfileSet batch = generate(cell_spec, n_phase2);
        const ScreeningReport report = screen(batch, out.model, out.limits);
        return static_cast<double>(report.outlier_count()) / static_cast<double>(n_phase2);
    };

    out.row.false_alarm = cell_rate(Contamination::none(), 1);
    for (unsigned k = 0; k < kSineAmplitudes.size(); ++k)
        out.row.sine[k] = cell_rate(Contamination::sine(kSineAmplitudes[k]), 2 + k);
    for (unsigned k = 0; k < kSpikeAmplitudes.size(); ++k)
        out.row.spike[k] = cell_rate(Contamination::spike(kSpikeAmplitudes[k]), 5 + k);
    return out;
}

} // namespace

Table1Result run_table1(const SyntheticSpec& base, std::uint64_t seed, std::size_t n_phase1,
                        std::size_t n_phase2, double alpha0) {
    Table1Result result;
    KindOutcome gaussian =
        run_kind(base, noise_kind::gaussian, 0, seed, n_phase1, n_phase2, alpha0);
    KindOutcome t3 = run_kind(base, noise_kind::t3_scaled, 1, seed, n_phase1, n_phase2, alpha0);
    result.gaussian = gaussian.row;
    result.t3 = t3.row;
    result.model_gaussian = std::move(gaussian.model);
    result.model_t3 = std::move(t3.model);
    result.limits_gaussian = gaussian.limits;
    result.limits_t3 = t3.limits;
    result.spec_gaussian = std::move(gaussian.phase1_spec);
    result.spec_t3 = std::move(t3.phase1_spec);
    return result;
}

namespace {

void print_row(const char* label, const Table1Row& row, std::ostream& out) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-10s %7.1f %10.1f %10.1f %10.1f %11.1f %11.1f %11.1f\n",
                  label, 100.0 * row.false_alarm, 100.0 * row.sine[0], 100.0 * row.sine[1],
                  100.0 * row.sine[2], 100.0 * row.spike[0], 100.0 * row.spike[1],
                  100.0 * row.spike[2]);
    out << buf;
}

} // namespace

void print_table1(const Table1Result& result, std::ostream& out) {
    out << "percent of profiles beyond the control limits\n";
    char head[160];
    std::snprintf(head, sizeof head, "%-10s %7s %10s %10s %10s %11s %11s %11s\n", "errors",
                  "true", "sine 0.75", "sine 1.00", "sine 1.25", "spike 0.02", "spike 0.03",
                  "spike 0.04");
    out << head;
    print_row("gaussian", result.gaussian, out);
    print_row("t3_scaled", result.t3, out);
}

void table1_to_csv(const Table1Result& result, std::ostream& out) {
    out << "error_kind,true,sine_0.75,sine_1.00,sine_1.25,spike_0.02,spike_0.03,spike_0.04\n";
    auto emit = [&](const char* label, const Table1Row& row) {
        out << label << ',' << format_double(row.false_alarm) << ','
            << format_double(row.sine[0]) << ',' << format_double(row.sine[1]) << ','
            << format_double(row.sine[2]) << ',' << format_double(row.spike[0]) << ','
            << format_double(row.spike[1]) << ',' << format_double(row.spike[2]) << '\n';
    };
    emit("gaussian", result.gaussian);
    emit("t3_scaled", result.t3);
}

} // namespace l1chart
