#include "l1chart/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace l1chart {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    // xoshiro state must not be all zero; splitmix64 never yields four zeros
    // from distinct counter values.
    for (auto& s : s_) s = splitmix64(sm);
}

Rng Rng::stream(std::uint64_t seed, std::uint64_t tag0, std::uint64_t tag1) {
    std::uint64_t sm = seed;
    std::uint64_t a = splitmix64(sm);
    sm ^= tag0 * 0xD1B54A32D192ED03ull + 0x8CB92BA72F3D8DD7ull;
    std::uint64_t b = splitmix64(sm);
    sm ^= tag1 * 0xEB44ACCAB455D165ull + 0x2545F4914F6CDD1Dull;
    std::uint64_t c = splitmix64(sm);
    return Rng(a ^ rotl(b, 23) ^ rotl(c, 47));
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform01() {
    // 53 random bits; +1 maps to (0, 1].
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_normal_ = r * std::sin(a);
    has_cached_normal_ = true;
    return r * std::cos(a);
}

std::size_t Rng::uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be >= 1");
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % static_cast<std::uint64_t>(n);
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return static_cast<std::size_t>(x % static_cast<std::uint64_t>(n));
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z * M_SQRT1_2);
}

double student_t3_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("student_t3_quantile: p must lie in (0, 1)");
    // CDF in u = t / sqrt(3):  F(u) = 1/2 + (atan(u) + u / (1 + u^2)) / pi,
    // dF/du = 2 / (pi (1 + u^2)^2).
    const double target = p - 0.5;
    double u = std::tan(M_PI * target); // Cauchy quantile: same tail order
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 200; ++iter) {
        const double one_plus = 1.0 + u * u;
        const double f = (std::atan(u) + u / one_plus) / M_PI - target;
        if (f > 0.0) hi = u; else lo = u;
        const double step = f * M_PI * one_plus * one_plus / 2.0;
        double next = u - step;
        if (!(next > lo && next < hi))
            next = std::isinf(lo) ? u - 1.0 - std::abs(step)
                 : std::isinf(hi) ? u + 1.0 + std::abs(step)
                 : 0.5 * (lo + hi);
        if (std::abs(next - u) <= 1e-15 * (1.0 + std::abs(u))) {
            u = next;
            break;
        }
        u = next;
    }
    return u * std::sqrt(3.0);
}

} // namespace l1chart
