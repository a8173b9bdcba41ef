#include "gkt/primes.hpp"

#include <array>
#include <random>

namespace gkt {
namespace {

constexpr std::array<unsigned, 12> kWitnessBases{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
constexpr std::array<unsigned, 25> kSmallPrimes{2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                                43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};
constexpr int kRandomRounds = 40;

// One Miller-Rabin round: true if n passes for witness a.
bool passes_round(const Nat& n, const Nat& n_minus_1, const Nat& odd_part, unsigned long twos,
                  const Nat& a) {
    Nat x;
    mpz_powm(x.get_mpz_t(), a.get_mpz_t(), odd_part.get_mpz_t(), n.get_mpz_t());
    if (x == 1 || x == n_minus_1) return true;
    for (unsigned long r = 1; r < twos; ++r) {
        x = (x * x) % n;
        if (x == n_minus_1) return true;
        if (x == 1) return false;
    }
    return false;
}

}  // namespace

bool is_probable_prime(const Nat& n) {
    if (n < 2) return false;
    for (unsigned p : kSmallPrimes) {
        if (n == p) return true;
        if (mpz_divisible_ui_p(n.get_mpz_t(), p)) return false;
    }

    const Nat n_minus_1 = n - 1;
    Nat odd_part = n_minus_1;
    unsigned long twos = mpz_scan1(odd_part.get_mpz_t(), 0);
    mpz_tdiv_q_2exp(odd_part.get_mpz_t(), odd_part.get_mpz_t(), twos);

    if (bit_length(n) <= 64) {
        for (unsigned base : kWitnessBases) {
            if (!passes_round(n, n_minus_1, odd_part, twos, Nat(base))) return false;
        }
        return true;
    }

    // Bases drawn from a generator keyed by n, so the answer never depends on caller state.
    std::mt19937_64 engine(mpz_get_ui(n.get_mpz_t()) ^ bit_length(n));
    const Nat span = n - 3;  // bases in [2, n-2]
    for (int round = 0; round < kRandomRounds; ++round) {
        Nat raw = 0;
        for (std::size_t i = 0; i < (bit_length(n) + 63) / 64 + 1; ++i) {
            raw <<= 64;
            raw += nat_from_u64(engine());
        }
        Nat a = raw % span + 2;
        if (!passes_round(n, n_minus_1, odd_part, twos, a)) return false;
    }
    return true;
}

}  // namespace gkt
