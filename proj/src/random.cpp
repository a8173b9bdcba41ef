#include "gkt/random.hpp"

#include <stdexcept>

namespace gkt {

Nat RandomSource::bits(std::size_t bits) {
    Nat out = 0;
    std::size_t remaining = bits;
    while (remaining >= 64) {
        out <<= 64;
        out += nat_from_u64(next_u64());
        remaining -= 64;
    }
    if (remaining > 0) {
        out <<= remaining;
        out += nat_from_u64(next_u64() >> (64 - remaining));
    }
    return out;
}

Nat RandomSource::below(const Nat& bound) {
    if (sgn(bound) <= 0) throw std::invalid_argument("RandomSource::below: bound must be positive");
    if (bound == 1) return 0;
    const std::size_t width = bit_length(Nat(bound - 1));
    // Rejection sampling; expected draws < 2.
    for (;;) {
        Nat candidate = bits(width);
        if (candidate < bound) return candidate;
    }
}

Nat RandomSource::in_range(const Nat& lo, const Nat& hi) {
    if (lo > hi) throw std::invalid_argument("RandomSource::in_range: empty range");
    return lo + below(Nat(hi - lo + 1));
}

std::uint64_t RandomSource::below_u64(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("RandomSource::below_u64: bound must be positive");
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    for (;;) {
        std::uint64_t v = next_u64();
        if (v < limit) return v % bound;
    }
}

}  // namespace gkt
