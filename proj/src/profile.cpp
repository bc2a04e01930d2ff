#include "l1chart/profile.hpp"

#include "l1chart/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace l1chart {

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

bool parse_double(const std::string& text, double& out) {
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

void Profile::validate() const {
    if (id.empty())
        throw validation_error("profile id must be non-empty");
    if (id.front() == '#')
        throw validation_error("profile id must not start with '#': " + id);
    if (id.find(',') != std::string::npos || id.find('\n') != std::string::npos ||
        id.find('\r') != std::string::npos)
        throw validation_error("profile id must not contain commas or newlines: " + id);
    if (std::isspace(static_cast<unsigned char>(id.front())) ||
        std::isspace(static_cast<unsigned char>(id.back())))
        throw validation_error("profile id must not have surrounding whitespace: '" + id + "'");
    if (x.empty())
        throw validation_error("profile " + id + " has no points");
    if (x.size() != y.size())
        throw validation_error("profile " + id + " has mismatched x/y lengths");
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (!std::isfinite(x[j]) || !std::isfinite(y[j]))
            throw validation_error("profile " + id + " contains a non-finite value");
        if (j > 0 && !(x[j] > x[j - 1]))
            throw validation_error("profile " + id + " has duplicate or unordered location " +
                                   format_double(x[j]));
    }
}

ProfileSet::ProfileSet(std::vector<Profile> ps, double a_, double b_)
    : profiles(std::move(ps)), a(a_), b(b_) {
    if (!(a <= b) || !std::isfinite(a) || !std::isfinite(b))
        throw validation_error("domain must satisfy a <= b with finite endpoints");
    std::sort(profiles.begin(), profiles.end(),
              [](const Profile& p, const Profile& q) { return p.id < q.id; });
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        profiles[i].validate();
        if (i > 0 && profiles[i].id == profiles[i - 1].id)
            throw validation_error("duplicate profile id: " + profiles[i].id);
        for (double xv : profiles[i].x)
            if (xv < a || xv > b)
                throw validation_error("profile " + profiles[i].id + " location " +
                                       format_double(xv) + " lies outside the domain [" +
                                       format_double(a) + ", " + format_double(b) + "]");
    }
}

namespace {

std::pair<double, double> inferred_domain(const std::vector<Profile>& ps) {
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (const auto& p : ps)
        for (double xv : p.x) {
            if (!any) { lo = hi = xv; any = true; }
            lo = std::min(lo, xv);
            hi = std::max(hi, xv);
        }
    return {lo, hi};
}

} // namespace

ProfileSet::ProfileSet(std::vector<Profile> ps) {
    auto [lo, hi] = inferred_domain(ps);
    *this = ProfileSet(std::move(ps), lo, hi);
}

std::vector<double> ProfileSet::pooled_x() const {
    std::vector<double> xs;
    for (const auto& p : profiles) xs.insert(xs.end(), p.x.begin(), p.x.end());
    std::sort(xs.begin(), xs.end());
    return xs;
}

ProfileSet parse_profiles(std::istream& in) {
    std::string line;
    long line_no = 0;
    bool header_seen = false;

    struct Point { double x, y; long line; };
    std::map<std::string, std::vector<Point>> rows;

    bool any_line = false;
    while (std::getline(in, line)) {
        ++line_no;
        any_line = true;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;   // blank
        if (line[start] == '#') continue;           // comment

        if (!header_seen) {
            std::string h = line;
            h.erase(std::remove_if(h.begin(), h.end(),
                                   [](unsigned char c) { return std::isspace(c); }),
                    h.end());
            if (h != "profile_id,x,y")
                throw parse_error("line " + std::to_string(line_no) +
                                  ": expected header 'profile_id,x,y', got '" + line + "'");
            header_seen = true;
            continue;
        }

        std::size_t c1 = line.find(',');
        std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos ||
            line.find(',', c2 + 1) != std::string::npos)
            throw parse_error("line " + std::to_string(line_no) +
                              ": expected exactly 3 comma-separated fields");
        std::string id = line.substr(0, c1);
        std::string xs = line.substr(c1 + 1, c2 - c1 - 1);
        std::string ys = line.substr(c2 + 1);
        double xv, yv;
        if (id.empty())
            throw parse_error("line " + std::to_string(line_no) + ": empty profile_id");
        if (!parse_double(xs, xv))
            throw parse_error("line " + std::to_string(line_no) + ": cannot parse x '" + xs + "'");
        if (!parse_double(ys, yv))
            throw parse_error("line " + std::to_string(line_no) + ": cannot parse y '" + ys + "'");
        if (!std::isfinite(xv))
            throw parse_error("line " + std::to_string(line_no) + ": x is not finite");
        if (!std::isfinite(yv))
            throw parse_error("line " + std::to_string(line_no) + ": y is not finite");
        rows[id].push_back({xv, yv, line_no});
    }
    if (!any_line)
        throw parse_error("empty input: expected header 'profile_id,x,y'");
    if (!header_seen)
        throw parse_error("missing header 'profile_id,x,y'");

    std::vector<Profile> profiles;
    profiles.reserve(rows.size());
    for (auto& [id, pts] : rows) {
        std::stable_sort(pts.begin(), pts.end(),
                         [](const Point& p, const Point& q) { return p.x < q.x; });
        Profile p;
        p.id = id;
        p.x.reserve(pts.size());
        p.y.reserve(pts.size());
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (j > 0 && pts[j].x == pts[j - 1].x)
                throw validation_error("line " + std::to_string(pts[j].line) +
                                       ": duplicate location " + format_double(pts[j].x) +
                                       " for profile " + id);
            p.x.push_back(pts[j].x);
            p.y.push_back(pts[j].y);
        }
        profiles.push_back(std::move(p));
    }
    return ProfileSet(std::move(profiles));
}

ProfileSet parse_profiles_from_string(const std::string& text) {
    std::istringstream in(text);
    return parse_profiles(in);
}

void emit_profiles(const ProfileSet& set, std::ostream& out) {
    out << "profile_id,x,y\n";
    for (const auto& p : set.profiles)
        for (std::size_t j = 0; j < p.size(); ++j)
            out << p.id << ',' << format_double(p.x[j]) << ',' << format_double(p.y[j]) << '\n';
}

std::string emit_profiles_to_string(const ProfileSet& set) {
    std::ostringstream out;
    emit_profiles(set, out);
    return out.str();
}

std::vector<double> make_grid(double a, double b, double step) {
    if (!(step > 0.0) || !std::isfinite(step))
        throw validation_error("grid step must be positive and finite");
    if (!(a <= b))
        throw validation_error("grid requires a <= b");
    std::vector<double> grid;
    for (std::size_t k = 0;; ++k) {
        const double x = a + static_cast<double>(k) * step;
        if (x > b + 1e-12) break;
        grid.push_back(x);
    }
    return grid;
}

} // namespace l1chart
