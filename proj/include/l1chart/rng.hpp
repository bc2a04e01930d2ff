#pragma once

#include <cstddef>
#include <cstdint>

namespace l1chart {

/// Deterministic pseudo-random generator (xoshiro256++ core, splitmix64
/// seeding). Hand-rolled so that identical seeds give identical streams on
/// every platform; <random> distributions are implementation-defined and
/// would break reproducibility guarantees.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Independent substream for (seed, tag0, tag1). Streams with different
    /// tags are decorrelated regardless of the order they are consumed in.
    static Rng stream(std::uint64_t seed, std::uint64_t tag0, std::uint64_t tag1 = 0);

    std::uint64_t next_u64();

    /// Uniform on (0, 1]. Never returns 0, so log() is safe.
    double uniform01();

    /// Standard normal via Box-Muller (pair cached).
    double normal();

    /// Uniform integer in [0, n), unbiased (rejection sampling). n >= 1.
    std::size_t uniform_index(std::size_t n);

private:
    std::uint64_t s_[4];
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

/// Standard normal CDF.
double normal_cdf(double z);

/// Quantile of Student's t with 3 degrees of freedom (unit scale).
/// Closed-form CDF inverted by safeguarded Newton; p in (0, 1).
double student_t3_quantile(double p);

} // namespace l1chart
