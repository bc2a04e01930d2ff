#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "l1chart/errors.hpp"
#include "l1chart/fit.hpp"
#include "l1chart/profile.hpp"

namespace l1chart {

void save_model(const FittedModel& model, std::ostream& out) {
    out << "l1chart_model 1\n";
    out << "kernel " << kernel_name(model.kernel) << '\n';
    out << "kernel_halfwidth " << format_double(model.kernel.halfwidth) << '\n';
    out << "domain_a " << format_double(model.domain_a) << '\n';
    out << "domain_b " << format_double(model.domain_b) << '\n';
    out << "bandwidth_mu " << format_double(model.bandwidth_mu) << '\n';
    out << "bandwidth_s " << format_double(model.bandwidth_s) << '\n';
    out << "s_floor " << format_double(model.s_floor) << '\n';
    out << "mu_delta " << format_double(model.centers.mu_delta) << '\n';
    out << "s_delta " << format_double(model.centers.s_delta) << '\n';
    out << "n_profiles " << model.centers.deltas.size() << '\n';
    for (double d : model.centers.deltas) out << "delta " << format_double(d) << '\n';
    out << "grid_size " << model.mu_tilde.grid.size() << '\n';
    for (double g : model.mu_tilde.grid) out << "grid " << format_double(g) << '\n';
    for (double v : model.mu_tilde.values) out << "mu " << format_double(v) << '\n';
    for (double v : model.s_tilde.values) out << "s " << format_double(v) << '\n';
    out << "n_scores " << model.phase1_scores.size() << '\n';
    for (const auto& s : model.phase1_scores)
        out << "score " << format_double(s.d) << ' ' << format_double(s.t1) << ' '
            << format_double(s.t2) << ' ' << s.id << '\n';
    out << "end\n";
}

std::uint64_t FittedModel::fingerprint() const {
    std::ostringstream text;
    save_model(*this, text);
    const std::string bytes = text.str();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

/// Sequential reader for the fixed key order of the model format.
class LineReader {
  public:
    explicit LineReader(std::istream& in) : in_(in) {}

    /// Next line's payload, which must carry exactly `key`.
    std::string expect(const std::string& key) {
        std::string line;
        if (!std::getline(in_, line))
            throw parse_error("model file: unexpected end of file, expected '" + key + "'");
        ++line_no_;
        const std::size_t sp = line.find(' ');
        const std::string head = sp == std::string::npos ? line : line.substr(0, sp);
        if (head != key)
            throw parse_error("model file line " + std::to_string(line_no_) + ": expected '" +
                              key + "', found '" + head + "'");
        return sp == std::string::npos ? std::string() : line.substr(sp + 1);
    }

    double expect_double(const std::string& key) {
        const std::string text = expect(key);
        double v;
        if (!parse_double(text, v) || !std::isfinite(v))
            throw parse_error("model file line " + std::to_string(line_no_) +
                              ": cannot parse " + key + " value '" + text + "'");
        return v;
    }

    std::size_t expect_count(const std::string& key) {
        const std::string text = expect(key);
        try {
            std::size_t pos = 0;
            const unsigned long long v = std::stoull(text, &pos);
            if (pos != text.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw parse_error("model file line " + std::to_string(line_no_) +
                              ": cannot parse " + key + " count '" + text + "'");
        }
    }

    std::size_t line_no() const { return line_no_; }

  private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

} // namespace

FittedModel load_model(std::istream& in) {
    LineReader reader(in);
    {
        const std::string version = reader.expect("l1chart_model");
        if (version != "1")
            throw parse_error("model file: unsupported format version '" + version + "'");
    }

    FittedModel m;
    m.kernel = kernel_from_name(reader.expect("kernel"));
    m.kernel.halfwidth = reader.expect_double("kernel_halfwidth");
    if (!(m.kernel.halfwidth > 0.0))
        throw parse_error("model file: kernel halfwidth must be positive");
    m.domain_a = reader.expect_double("domain_a");
    m.domain_b = reader.expect_double("domain_b");
    m.bandwidth_mu = reader.expect_double("bandwidth_mu");
    m.bandwidth_s = reader.expect_double("bandwidth_s");
    m.s_floor = reader.expect_double("s_floor");
    m.centers.mu_delta = reader.expect_double("mu_delta");
    m.centers.s_delta = reader.expect_double("s_delta");

    const std::size_t n_profiles = reader.expect_count("n_profiles");
    m.centers.deltas.reserve(n_profiles);
    for (std::size_t i = 0; i < n_profiles; ++i)
        m.centers.deltas.push_back(reader.expect_double("delta"));

    const std::size_t grid_size = reader.expect_count("grid_size");
    if (grid_size == 0)
        throw parse_error("model file: empty curve grid");
    std::vector<double> grid, mu, s;
    grid.reserve(grid_size);
    mu.reserve(grid_size);
    s.reserve(grid_size);
    for (std::size_t i = 0; i < grid_size; ++i) grid.push_back(reader.expect_double("grid"));
    for (std::size_t i = 1; i < grid_size; ++i)
        if (!(grid[i - 1] < grid[i]))
            throw parse_error("model file: curve grid must be strictly increasing");
    for (std::size_t i = 0; i < grid_size; ++i) mu.push_back(reader.expect_double("mu"));
    for (std::size_t i = 0; i < grid_size; ++i) s.push_back(reader.expect_double("s"));
    m.mu_tilde = CurveEstimate{grid, std::move(mu), m.bandwidth_mu, curve_kind::mu_jackknife};
    m.s_tilde =
        CurveEstimate{std::move(grid), std::move(s), m.bandwidth_s, curve_kind::s_jackknife};

    const std::size_t n_scores = reader.expect_count("n_scores");
    m.phase1_scores.reserve(n_scores);
    for (std::size_t i = 0; i < n_scores; ++i) {
        const std::string payload = reader.expect("score");
        std::istringstream fields(payload);
        Phase1Score sc;
        std::string d_text, t1_text, t2_text;
        if (!(fields >> d_text >> t1_text >> t2_text) || !parse_double(d_text, sc.d) ||
            !parse_double(t1_text, sc.t1) || !parse_double(t2_text, sc.t2))
            throw parse_error("model file line " + std::to_string(reader.line_no()) +
                              ": malformed score line");
        if (fields.peek() == ' ') fields.get();
        std::getline(fields, sc.id);
        if (sc.id.empty())
            throw parse_error("model file line " + std::to_string(reader.line_no()) +
                              ": score line is missing the profile id");
        m.phase1_scores.push_back(std::move(sc));
    }

    if (!reader.expect("end").empty())
        throw parse_error("model file: malformed 'end' marker");
    return m;
}

void save_model_file(const FittedModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw parse_error("cannot open '" + path + "' for writing");
    save_model(model, out);
    if (!out.good())
        throw parse_error("failed writing model to '" + path + "'");
}

FittedModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw parse_error("cannot open model file '" + path + "'");
    return load_model(in);
}

} // namespace l1chart
