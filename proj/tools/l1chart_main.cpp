// Command-line front end: fit a reference model from Phase I profiles,
// calibrate control limits, screen new profiles, generate synthetic data, and
// rerun the full screening study.
//
// Exit codes: 0 success (no outliers), 1 outliers flagged, 2 input or
// validation errors, 3 numeric-procedure errors.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "l1chart/errors.hpp"
#include "l1chart/fit.hpp"
#include "l1chart/screening.hpp"
#include "l1chart/simulation_study.hpp"
#include "l1chart/synthetic.hpp"

namespace {

using namespace l1chart;

constexpr int kExitOutliers = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

ProfileSet read_profiles(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw parse_error("cannot open input file '" + path + "'");
    return parse_profiles(in);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out)
        throw parse_error("cannot open '" + path + "' for writing");
    out << text;
    if (!out.good())
        throw parse_error("failed writing '" + path + "'");
}

void write_charts(const ScreeningReport& report, const std::string& prefix) {
    for (const char* stat : {"D", "T1", "T2"}) {
        std::ostringstream text;
        chart_to_csv(report, stat, text);
        write_text_file(prefix + "_" + stat + ".csv", text.str());
    }
}

/// Phase I scores rendered as a screening report so the calibrate command can
/// emit the same chart CSVs as screening does.
ScreeningReport phase1_report(const FittedModel& model, const ControlLimits& limits) {
    ScreeningReport report;
    report.limits = limits;
    report.rows.reserve(model.phase1_scores.size());
    for (const auto& s : model.phase1_scores) {
        ScreeningRow row;
        row.id = s.id;
        row.d = s.d;
        row.t1 = s.t1;
        row.t2 = s.t2;
        row.flag_d = s.d > limits.c_d;
        row.flag_t1 = s.t1 > limits.c_t1;
        row.flag_t2 = s.t2 > limits.c_t2;
        row.outlier = row.flag_d || row.flag_t1 || row.flag_t2;
        report.rows.push_back(std::move(row));
    }
    return report;
}

struct FitArgs {
    std::string input;
    std::string model_path;
    std::string kernel = "epanechnikov";
    std::optional<double> bandwidth_mu;
    std::optional<double> bandwidth_s;
    bool uneven_locations = false;
    bool loo_scores = false;
    double density_bandwidth = 0.0;
};

int run_fit(const FitArgs& args) {
    std::cout << "command: fit\n"
              << "  input: " << args.input << '\n'
              << "  model: " << args.model_path << '\n'
              << "  kernel: " << args.kernel << '\n'
              << "  bandwidth-mu: "
              << (args.bandwidth_mu ? format_double(*args.bandwidth_mu) : "cross-validated")
              << '\n'
              << "  bandwidth-s: "
              << (args.bandwidth_s ? format_double(*args.bandwidth_s) : "cross-validated")
              << '\n'
              << "  uneven-locations: " << (args.uneven_locations ? "true" : "false") << '\n'
              << "  loo-scores: " << (args.loo_scores ? "true" : "false") << '\n';

    const ProfileSet set = read_profiles(args.input);
    FitConfig config;
    config.kernel = kernel_from_name(args.kernel);
    config.bandwidth_mu = args.bandwidth_mu;
    config.bandwidth_s = args.bandwidth_s;
    config.uneven_locations = args.uneven_locations;
    config.loo_scores = args.loo_scores;
    config.density_bandwidth = args.density_bandwidth;

    const FittedModel model = fit(set, config);
    save_model_file(model, args.model_path);

    std::cout << "fitted " << set.size() << " profiles over ["
              << format_double(model.domain_a) << ", " << format_double(model.domain_b)
              << "]\n"
              << "  location bandwidth b: " << format_double(model.bandwidth_mu) << '\n'
              << "  scale bandwidth h: " << format_double(model.bandwidth_s) << '\n'
              << "  center median mu_delta: " << format_double(model.centers.mu_delta) << '\n'
              << "  center spread s_delta: " << format_double(model.centers.s_delta) << '\n'
              << "model written to " << args.model_path << '\n';
    return 0;
}

struct CalibrateArgs {
    std::string model_path;
    std::string limits_path;
    double alpha0 = 0.05;
    std::string method = "empirical";
    std::uint32_t reps = 1000;
    std::uint64_t seed = 0;
    std::string chart_prefix;
};

int run_calibrate(const CalibrateArgs& args) {
    std::cout << "command: calibrate\n"
              << "  model: " << args.model_path << '\n'
              << "  limits: " << args.limits_path << '\n'
              << "  alpha0: " << format_double(args.alpha0) << '\n'
              << "  method: " << args.method << '\n'
              << "  reps: " << args.reps << '\n'
              << "  seed: " << args.seed << '\n';

    const FittedModel model = load_model_file(args.model_path);
    const limit_method method = limit_method_from_name(args.method);
    const ControlLimits limits = calibrate_limits(model, args.alpha0, method, args.reps, args.seed);
    save_limits_file(limits, args.limits_path);

    const std::string prefix =
        args.chart_prefix.empty() ? args.limits_path : args.chart_prefix;
    write_charts(phase1_report(model, limits), prefix);

    std::cout << "per-statistic level alpha*: " << format_double(limits.alpha_star) << '\n'
              << "  limit D:  " << format_double(limits.c_d) << '\n'
              << "  limit T1: " << format_double(limits.c_t1) << '\n'
              << "  limit T2: " << format_double(limits.c_t2) << '\n'
              << "limits written to " << args.limits_path << ", charts to " << prefix
              << "_{D,T1,T2}.csv\n";
    return 0;
}

struct ScreenArgs {
    std::string model_path;
    std::string limits_path;
    std::string input;
    std::string out;
    std::string chart_prefix;
};

int run_screen(const ScreenArgs& args) {
    std::cout << "command: screen\n"
              << "  model: " << args.model_path << '\n'
              << "  limits: " << args.limits_path << '\n'
              << "  input: " << args.input << '\n'
              << "  report: " << (args.out.empty() ? "(stdout)" : args.out) << '\n';

    const FittedModel model = load_model_file(args.model_path);
    const ControlLimits limits = load_limits_file(args.limits_path);
    const ProfileSet set = read_profiles(args.input);
    const ScreeningReport report = screen(set, model, limits);

    std::ostringstream text;
    report_to_csv(report, text);
    if (args.out.empty())
        std::cout << text.str();
    else
        write_text_file(args.out, text.str());
    if (!args.chart_prefix.empty())
        write_charts(report, args.chart_prefix);

    const std::size_t flagged = report.outlier_count();
    std::cout << "flagged " << flagged << " of " << report.rows.size() << " profiles\n";
    return flagged > 0 ? kExitOutliers : 0;
}

struct SimulateArgs {
    std::size_t n = 100;
    std::uint64_t seed = 0;
    std::string noise = "gaussian";
    std::string contamination = "none";
    double amplitude = 0.0;
    double spike_center = 0.3;
    double spike_width = 0.005;
    std::optional<double> sigma;
    std::optional<double> sigma_delta;
    std::optional<double> corr_rate;
    std::string out;
};

int run_simulate(const SimulateArgs& args) {
    SyntheticSpec spec = default_pseudo_vdp_spec();
    spec.noise = noise_kind_from_name(args.noise);
    spec.seed = args.seed;
    if (args.sigma) spec.sigma = *args.sigma;
    if (args.sigma_delta) spec.sigma_delta = *args.sigma_delta;
    if (args.corr_rate) spec.corr_rate = *args.corr_rate;
    const contamination_kind kind = contamination_kind_from_name(args.contamination);
    if (kind == contamination_kind::sine)
        spec.contamination = Contamination::sine(args.amplitude);
    else if (kind == contamination_kind::spike)
        spec.contamination = Contamination::spike(args.amplitude, args.spike_center,
                                                  args.spike_width);

    std::cout << "command: simulate\n"
              << "  profiles: " << args.n << '\n'
              << "  noise: " << noise_kind_name(spec.noise) << '\n'
              << "  contamination: " << contamination_kind_name(spec.contamination.kind) << '\n';
    if (spec.contamination.kind != contamination_kind::none)
        std::cout << "  amplitude: " << format_double(spec.contamination.amplitude) << '\n';
    std::cout << "  sigma: " << format_double(spec.sigma) << '\n'
              << "  sigma-delta: " << format_double(spec.sigma_delta) << '\n'
              << "  corr-rate: " << format_double(spec.corr_rate) << '\n'
              << "  seed: " << spec.seed << '\n'
              << "  out: " << (args.out.empty() ? "(stdout)" : args.out) << '\n';

    const ProfileSet set = generate(spec, args.n);
    std::ostringstream text;
    serialize_spec_comments(spec, text);
    emit_profiles(set, text);
    if (args.out.empty())
        std::cout << text.str();
    else
        write_text_file(args.out, text.str());
    std::cout << "wrote " << set.size() << " profiles at " << spec.locations.size()
              << " locations\n";
    return 0;
}

struct Table1Args {
    std::uint64_t seed = kDefaultStudySeed;
    std::size_t n_phase1 = 100;
    std::size_t n_phase2 = 100;
    double alpha0 = 0.05;
    std::string out;
};

int run_reproduce_table1(const Table1Args& args) {
    std::cout << "command: reproduce-table1\n"
              << "  seed: " << args.seed << '\n'
              << "  phase1 profiles: " << args.n_phase1 << '\n'
              << "  phase2 profiles per cell: " << args.n_phase2 << '\n'
              << "  alpha0: " << format_double(args.alpha0) << '\n';

    const Table1Result result =
        run_table1(default_pseudo_vdp_spec(), args.seed, args.n_phase1, args.n_phase2,
                   args.alpha0);
    print_table1(result, std::cout);
    if (!args.out.empty()) {
        std::ostringstream text;
        table1_to_csv(result, text);
        write_text_file(args.out, text.str());
        std::cout << "rates written to " << args.out << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonparametric L1 location-scale profile monitoring"};
    app.require_subcommand(1);

    FitArgs fit_args;
    double fit_bmu = 0.0, fit_bs = 0.0;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a reference model from Phase I profiles");
    fit_cmd->add_option("--input", fit_args.input, "Phase I profiles CSV")->required();
    fit_cmd->add_option("--model", fit_args.model_path, "output model file")->required();
    fit_cmd->add_option("--kernel", fit_args.kernel,
                        "kernel: epanechnikov, triangular, or boxcar");
    auto* bmu_opt =
        fit_cmd->add_option("--bandwidth-mu", fit_bmu, "fixed location bandwidth (skips CV)");
    auto* bs_opt =
        fit_cmd->add_option("--bandwidth-s", fit_bs, "fixed scale bandwidth (skips CV)");
    fit_cmd->add_flag("--uneven-locations", fit_args.uneven_locations,
                      "weight profile centers by the location density");
    fit_cmd->add_flag("--loo-scores", fit_args.loo_scores,
                      "leave-one-out Phase I deviation scores");
    fit_cmd->add_option("--density-bandwidth", fit_args.density_bandwidth,
                        "location-density bandwidth (0 = plug-in rule)");

    CalibrateArgs cal_args;
    auto* cal_cmd = app.add_subcommand("calibrate", "Calibrate control limits from a model");
    cal_cmd->add_option("--model", cal_args.model_path, "fitted model file")->required();
    cal_cmd->add_option("--limits", cal_args.limits_path, "output limits file")->required();
    cal_cmd->add_option("--alpha0", cal_args.alpha0, "overall false-alarm budget in (0, 1]");
    cal_cmd->add_option("--method", cal_args.method, "empirical or bootstrap");
    cal_cmd->add_option("--reps", cal_args.reps, "bootstrap resamples");
    cal_cmd->add_option("--seed", cal_args.seed, "bootstrap seed");
    cal_cmd->add_option("--chart-prefix", cal_args.chart_prefix,
                        "prefix for the Phase I chart CSVs (default: the limits path)");

    ScreenArgs screen_args;
    auto* screen_cmd = app.add_subcommand("screen", "Screen profiles against calibrated limits");
    screen_cmd->add_option("--model", screen_args.model_path, "fitted model file")->required();
    screen_cmd->add_option("--limits", screen_args.limits_path, "limits file")->required();
    screen_cmd->add_option("--input", screen_args.input, "profiles CSV to screen")->required();
    screen_cmd->add_option("--out", screen_args.out, "report CSV path (default: stdout)");
    screen_cmd->add_option("--chart-prefix", screen_args.chart_prefix,
                           "also write per-statistic chart CSVs with this prefix");

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate", "Generate synthetic profile data");
    sim_cmd->add_option("--n", sim_args.n, "number of profiles");
    sim_cmd->add_option("--seed", sim_args.seed, "generator seed");
    sim_cmd->add_option("--noise", sim_args.noise, "gaussian or t3_scaled");
    sim_cmd->add_option("--contamination", sim_args.contamination, "none, sine, or spike");
    sim_cmd->add_option("--amplitude", sim_args.amplitude, "sine A or spike B");
    sim_cmd->add_option("--spike-center", sim_args.spike_center, "spike location");
    sim_cmd->add_option("--spike-width", sim_args.spike_width, "spike width");
    double sim_sigma = 0.0, sim_sigma_delta = 0.0, sim_corr = 0.0;
    auto* sigma_opt = sim_cmd->add_option("--sigma", sim_sigma, "error-process marginal SD");
    auto* sigma_delta_opt =
        sim_cmd->add_option("--sigma-delta", sim_sigma_delta, "profile-center SD");
    auto* corr_opt = sim_cmd->add_option("--corr-rate", sim_corr, "correlation decay rate");
    sim_cmd->add_option("--out", sim_args.out, "output CSV path (default: stdout)");

    Table1Args t1_args;
    auto* t1_cmd = app.add_subcommand(
        "reproduce-table1", "Run the full screening study on the reference generator");
    t1_cmd->add_option("--seed", t1_args.seed, "study seed");
    t1_cmd->add_option("--phase1", t1_args.n_phase1, "Phase I profiles");
    t1_cmd->add_option("--phase2", t1_args.n_phase2, "Phase II profiles per cell");
    t1_cmd->add_option("--alpha0", t1_args.alpha0, "calibration false-alarm budget");
    t1_cmd->add_option("--out", t1_args.out, "also write the rates as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (fit_cmd->parsed()) {
            if (bmu_opt->count()) fit_args.bandwidth_mu = fit_bmu;
            if (bs_opt->count()) fit_args.bandwidth_s = fit_bs;
            return run_fit(fit_args);
        }
        if (cal_cmd->parsed()) return run_calibrate(cal_args);
        if (screen_cmd->parsed()) return run_screen(screen_args);
        if (sim_cmd->parsed()) {
            if (sigma_opt->count()) sim_args.sigma = sim_sigma;
            if (sigma_delta_opt->count()) sim_args.sigma_delta = sim_sigma_delta;
            if (corr_opt->count()) sim_args.corr_rate = sim_corr;
            return run_simulate(sim_args);
        }
        if (t1_cmd->parsed()) return run_reproduce_table1(t1_args);
        std::cerr << "no command given\n";
        return kExitInput;
    } catch (const parse_error& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const validation_error& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitInput;
    } catch (const out_of_domain_error& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
}
