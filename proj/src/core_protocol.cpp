#include "gkt/core_protocol.hpp"

#include <algorithm>

#include "gkt/primes.hpp"

namespace gkt {

std::string_view to_string(BroadcastKind kind) {
    switch (kind) {
        case BroadcastKind::initial: return "initial";
        case BroadcastKind::join: return "join";
        case BroadcastKind::leave: return "leave";
    }
    return "?";
}

MaskedShare xor_mask(const MemberPrime& prime, const MemberSecret& secret) {
    Nat d = prime.value ^ secret.value;
    if (d < 2) {
        throw Error(ErrorCode::InvalidShare, "P xor S = " + to_hex(d) + " is below 2");
    }
    return MaskedShare{std::move(d)};
}

Nat share_product(std::span<const MaskedShare> shares) {
    if (shares.empty()) throw Error(ErrorCode::EmptyGroup, "no shares to compose");
    // Balanced pairwise multiplication keeps operands similar in size.
    std::vector<Nat> level;
    level.reserve(shares.size());
    for (const auto& s : shares) level.push_back(s.value);
    while (level.size() > 1) {
        std::vector<Nat> next;
        next.reserve((level.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < level.size(); i += 2) next.push_back(level[i] * level[i + 1]);
        if (level.size() % 2 == 1) next.push_back(std::move(level.back()));
        level = std::move(next);
    }
    return level.front();
}

BroadcastMessage compose_broadcast(std::span<const MaskedShare> shares, const GroupKey& key,
                                   BroadcastKind kind) {
    if (shares.empty()) throw Error(ErrorCode::EmptyGroup, "no shares to compose");
    for (std::size_t i = 0; i < shares.size(); ++i) {
        if (key.value >= shares[i].value) {
            throw Error(ErrorCode::KeyTooLarge, "key " + to_hex(key.value) + " >= share #" +
                                                    std::to_string(i) + " (" +
                                                    to_hex(shares[i].value) + ")");
        }
    }
    return BroadcastMessage{share_product(shares) + key.value, key.epoch, kind};
}

Nat extract_key(const BroadcastMessage& message, const MemberPrime& prime,
                const MemberSecret& secret) {
    const MaskedShare share = xor_mask(prime, secret);
    return message.value % share.value;
}

GroupKey select_group_key(std::span<const MaskedShare> shares, std::size_t key_bits,
                          RandomSource& rng, bool prime_key) {
    if (shares.empty()) throw Error(ErrorCode::EmptyGroup, "no shares to bound the key");
    if (key_bits == 0) throw Error(ErrorCode::InvalidArgument, "key_bits must be positive");
    const auto smallest = std::min_element(shares.begin(), shares.end(),
                                           [](const auto& a, const auto& b) { return a.value < b.value; });
    Nat cap = Nat(1) << key_bits;
    if (smallest->value < cap) cap = smallest->value;
    if (cap < 2) {
        throw Error(ErrorCode::NoValidKey, "smallest share " + to_hex(smallest->value) +
                                               " leaves no key in [1, D-1]");
    }
    const Nat hi = cap - 1;
    if (!prime_key) return GroupKey{rng.in_range(1, hi), 0};

    if (hi < 2) throw Error(ErrorCode::NoValidKey, "no prime key below " + to_hex(cap));
    const std::size_t width = bit_length(hi);
    const std::size_t attempts = 10 * width * width + 100;
    for (std::size_t i = 0; i < attempts; ++i) {
        Nat candidate = rng.in_range(2, hi);
        if (is_probable_prime(candidate)) return GroupKey{std::move(candidate), 0};
    }
    throw Error(ErrorCode::NoValidKey, "no prime key found below " + to_hex(cap));
}

MemberPrime generate_member_prime(std::size_t bit_length, std::span<const Nat> existing,
                                  RandomSource& rng) {
    if (bit_length < 8) {
        throw Error(ErrorCode::InvalidArgument, "prime bit length must be >= 8");
    }
    const Nat top = Nat(1) << (bit_length - 1);
    const std::size_t attempts = 10 * bit_length * bit_length;
    for (std::size_t i = 0; i < attempts; ++i) {
        Nat candidate = rng.bits(bit_length - 1) | top;
        candidate |= 1;
        if (std::find(existing.begin(), existing.end(), candidate) != existing.end()) continue;
        if (is_probable_prime(candidate)) return MemberPrime{std::move(candidate), bit_length};
    }
    throw Error(ErrorCode::Exhausted, "no unused " + std::to_string(bit_length) +
                                          "-bit prime after " + std::to_string(attempts) +
                                          " candidates");
}

MemberSecret random_secret(std::size_t bit_length, RandomSource& rng) {
    if (bit_length == 0) throw Error(ErrorCode::InvalidArgument, "secret bit length must be positive");
    Nat v = rng.in_range(1, (Nat(1) << bit_length) - 1);
    return MemberSecret::of(v);
}

bool secret_within_rule(const MemberSecret& secret, std::size_t prime_bits) {
    return sgn(secret.value) > 0 && prime_bits >= 1 && bit_length(secret.value) <= prime_bits - 1;
}

}  // namespace gkt
