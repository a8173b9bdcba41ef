#pragma once

#include <cstdint>
#include <random>

#include "gkt/nat.hpp"

namespace gkt {

/// Seedable random source injected into every randomized protocol step.
/// Output depends only on the seed (mt19937_64 is fully specified by the
/// standard and no implementation-defined distributions are used).
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 2^bits).
    Nat bits(std::size_t bits);

    /// Uniform in [0, bound). bound must be positive.
    Nat below(const Nat& bound);

    /// Uniform in [lo, hi]. Requires lo <= hi.
    Nat in_range(const Nat& lo, const Nat& hi);

    std::uint64_t below_u64(std::uint64_t bound);

private:
    std::mt19937_64 engine_;
};

}  // namespace gkt
