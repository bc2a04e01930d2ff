#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace l1chart {

/// One observed profile: a response sampled at strictly increasing locations.
struct Profile {
    std::string id;
    std::vector<double> x; ///< strictly increasing, finite
    std::vector<double> y; ///< same length as x, finite

    std::size_t size() const { return x.size(); }

    /// Enforces: non-empty id without commas, newlines, surrounding
    /// whitespace, or a leading '#'; x strictly increasing; all values finite.
    void validate() const;

    bool operator==(const Profile&) const = default;
};

/// A profile with its estimated center removed: y = source y - delta.
struct CenteredProfile {
    std::string source_id;
    double delta = 0.0;
    std::vector<double> x;
    std::vector<double> y;

    std::size_t size() const { return x.size(); }
};

/// A collection of profiles over a common domain [a, b].
/// Profiles are held sorted by id so that ingestion is insensitive to row
/// order; ids are unique.
struct ProfileSet {
    std::vector<Profile> profiles;
    double a = 0.0;
    double b = 0.0;

    ProfileSet() = default;

    /// Sorts by id, validates each profile, checks id uniqueness and that
    /// every location lies inside [a, b].
    ProfileSet(std::vector<Profile> profiles, double a, double b);

    /// Domain inferred as the min/max location over all profiles.
    explicit ProfileSet(std::vector<Profile> profiles);

    std::size_t size() const { return profiles.size(); }

    /// All locations pooled over profiles, sorted ascending (duplicates kept).
    std::vector<double> pooled_x() const;

    bool operator==(const ProfileSet&) const = default;
};

/// Parses CSV with header "profile_id,x,y". '#' starts a comment line; blank
/// lines are skipped. Rows may arrive in any order: points are grouped by id
/// and sorted by x. Errors carry 1-based physical line numbers.
ProfileSet parse_profiles(std::istream& in);
ProfileSet parse_profiles_from_string(const std::string& text);

/// Writes the canonical CSV (header, then rows sorted by id and x). Numbers
/// are rendered round-trip exactly so parse(emit(s)) == s.
void emit_profiles(const ProfileSet& set, std::ostream& out);
std::string emit_profiles_to_string(const ProfileSet& set);

/// {a, a + step, a + 2 step, ...} truncated at b (inclusive within 1e-12).
std::vector<double> make_grid(double a, double b, double step);

/// Shared number rendering: shortest decimal that parses back to the
/// identical double.
std::string format_double(double v);

/// Locale-independent strict double parse; returns false on trailing junk.
bool parse_double(const std::string& text, double& out);

} // namespace l1chart
