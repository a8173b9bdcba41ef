#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "gkt/error.hpp"
#include "gkt/nat.hpp"
#include "gkt/random.hpp"

namespace gkt {

/// A member's KGC-assigned prime P. Primality is established by
/// generate_member_prime; values imported from files or test vectors are
/// carried as-is.
struct MemberPrime {
    Nat value;
    std::size_t bit_length = 0;

    static MemberPrime of(const Nat& v) { return {v, gkt::bit_length(v)}; }
    friend bool operator==(const MemberPrime&, const MemberPrime&) = default;
};

/// The secret S a member shares with the KGC at registration.
struct MemberSecret {
    Nat value;
    std::size_t bit_length = 0;

    static MemberSecret of(const Nat& v) { return {v, gkt::bit_length(v)}; }
    friend bool operator==(const MemberSecret&, const MemberSecret&) = default;
};

/// D = P xor S, the member's modulus. Valid shares are >= 2.
struct MaskedShare {
    Nat value;
    friend bool operator==(const MaskedShare&, const MaskedShare&) = default;
};

struct GroupKey {
    Nat value;
    std::uint64_t epoch = 0;
    friend bool operator==(const GroupKey&, const GroupKey&) = default;
};

enum class BroadcastKind : std::uint8_t { initial, join, leave };

std::string_view to_string(BroadcastKind kind);

/// The public message M = prod(D_i) + K.
struct BroadcastMessage {
    Nat value;
    std::uint64_t epoch = 0;
    BroadcastKind kind = BroadcastKind::initial;
    friend bool operator==(const BroadcastMessage&, const BroadcastMessage&) = default;
};

/// Throws InvalidShare if the xor is below 2.
MaskedShare xor_mask(const MemberPrime& prime, const MemberSecret& secret);

/// Product of the share values; EmptyGroup when empty.
Nat share_product(std::span<const MaskedShare> shares);

/// M = prod(D_i) + K, stamped with the key's epoch.
/// Throws EmptyGroup for no shares and KeyTooLarge unless K < every D_i.
BroadcastMessage compose_broadcast(std::span<const MaskedShare> shares, const GroupKey& key,
                                   BroadcastKind kind);

/// M mod (P xor S). Equals the group key whenever the caller's share is a
/// factor of the broadcast product and K is below that share.
Nat extract_key(const BroadcastMessage& message, const MemberPrime& prime,
                const MemberSecret& secret);

/// Uniform key in [1, min(2^key_bits, min D) - 1], epoch 0. With prime_key
/// set, only primes in that range are drawn.
/// Throws NoValidKey when the range is empty (or holds no prime in prime mode).
GroupKey select_group_key(std::span<const MaskedShare> shares, std::size_t key_bits,
                          RandomSource& rng, bool prime_key = false);

/// Random prime of exactly bit_length bits, absent from `existing`. Tries at
/// most 10 * bit_length^2 candidates before throwing Exhausted.
/// bit_length must be >= 8 (InvalidArgument otherwise).
MemberPrime generate_member_prime(std::size_t bit_length, std::span<const Nat> existing,
                                  RandomSource& rng);

/// Uniform secret in [1, 2^bit_length).
MemberSecret random_secret(std::size_t bit_length, RandomSource& rng);

/// True when S is non-zero and fits in bit_length(P) - 1 bits, which keeps
/// the prime's top bit in D.
bool secret_within_rule(const MemberSecret& secret, std::size_t prime_bits);

}  // namespace gkt
