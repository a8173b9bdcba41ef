#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace gkt {

/// Unbounded non-negative integer. Every protocol quantity (P, S, K, M) is a Nat.
/// Callers must keep values non-negative; the helpers below assume it.
using Nat = mpz_class;

/// Number of significant bits; 0 for zero.
std::size_t bit_length(const Nat& n);

/// Lowercase hex, no leading zeros, "0" for zero.
std::string to_hex(const Nat& n);

/// Strict inverse of to_hex: rejects empty input, uppercase, signs and
/// leading zeros. Returns nullopt on any violation.
std::optional<Nat> parse_hex(std::string_view text);

/// Big-endian magnitude with no leading zero bytes (empty for zero).
std::vector<std::uint8_t> to_bytes(const Nat& n);
Nat from_bytes(std::span<const std::uint8_t> bytes);

Nat nat_from_u64(std::uint64_t v);
/// Requires n < 2^64.
std::uint64_t nat_to_u64(const Nat& n);

}  // namespace gkt
