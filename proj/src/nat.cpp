#include "gkt/nat.hpp"

#include <stdexcept>

namespace gkt {

std::size_t bit_length(const Nat& n) {
    if (sgn(n) == 0) return 0;
    return mpz_sizeinbase(n.get_mpz_t(), 2);
}

std::string to_hex(const Nat& n) { return n.get_str(16); }

std::optional<Nat> parse_hex(std::string_view text) {
    if (text.empty()) return std::nullopt;
    for (char c : text) {
        bool digit = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
        if (!digit) return std::nullopt;
    }
    if (text.size() > 1 && text.front() == '0') return std::nullopt;
    Nat out;
    if (out.set_str(std::string(text), 16) != 0) return std::nullopt;
    return out;
}

std::vector<std::uint8_t> to_bytes(const Nat& n) {
    if (sgn(n) == 0) return {};
    std::vector<std::uint8_t> out((bit_length(n) + 7) / 8);
    std::size_t written = 0;
    mpz_export(out.data(), &written, 1, 1, 1, 0, n.get_mpz_t());
    out.resize(written);
    return out;
}

Nat from_bytes(std::span<const std::uint8_t> bytes) {
    Nat out;
    if (!bytes.empty()) mpz_import(out.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
    return out;
}

Nat nat_from_u64(std::uint64_t v) {
    Nat out;
    mpz_import(out.get_mpz_t(), 1, 1, sizeof(v), 0, 0, &v);
    return out;
}

std::uint64_t nat_to_u64(const Nat& n) {
    if (bit_length(n) > 64) throw std::out_of_range("nat_to_u64: value exceeds 64 bits");
    std::uint64_t v = 0;
    mpz_export(&v, nullptr, 1, sizeof(v), 0, 0, n.get_mpz_t());
    return v;
}

}  // namespace gkt
