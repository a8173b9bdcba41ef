#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gkt/core_protocol.hpp"
#include "gkt/kgc.hpp"

namespace gkt::sim {

struct RegisterEvent {
    std::string member_id;
    std::size_t secret_bits = 0;  // 0 = scenario default
    std::optional<Nat> pinned_prime;
    std::optional<Nat> pinned_secret;
};
struct StartEvent {
    std::vector<std::string> member_ids;
    std::optional<Nat> pinned_key;
};
struct JoinEvent {
    std::string member_id;
    std::optional<Nat> pinned_key;
};
struct LeaveEvent {
    std::string member_id;
    std::optional<Nat> pinned_key;
};
struct EavesdropEvent {};

using Event = std::variant<RegisterEvent, StartEvent, JoinEvent, LeaveEvent, EavesdropEvent>;

struct Scenario {
    std::uint64_t seed = 0;
    std::size_t prime_bits = 64;
    std::size_t secret_bits = 63;
    std::size_t key_bits = 32;
    JoinPolicy join_policy = JoinPolicy::fresh_key;
    std::vector<Event> events;
};

/// Reads the `gkt-scenario v1 seed=.. pbits=.. sbits=.. kbits=..` format.
/// Throws ScenarioInvalid naming the 1-based line.
Scenario parse_scenario(std::istream& in);
void write_scenario(const Scenario& scenario, std::ostream& out);

/// Replays the events against membership bookkeeping only (no arithmetic).
/// Throws ScenarioInvalid naming the 0-based event index.
void validate_scenario(const Scenario& scenario);

struct Observation {
    std::string party;
    Nat extracted;
    bool matches_key = false;
};

struct BroadcastRecord {
    std::uint64_t epoch = 0;
    BroadcastKind kind = BroadcastKind::initial;
    std::size_t message_bits = 0;
    Nat message;
    Nat key;
};

struct EventRecord {
    std::size_t index = 0;
    std::string summary;
    std::optional<BroadcastRecord> broadcast;
    std::vector<Observation> members;   // active members on this broadcast
    std::vector<Observation> departed;  // former members trying the new broadcast
    /// Joiner applied to each earlier broadcast, compared with that epoch's key.
    std::vector<Observation> backward;
    std::optional<Observation> outsider;
};

struct Transcript {
    std::vector<EventRecord> events;
    MemberPrime outsider_prime;
    MemberSecret outsider_secret;
};

/// Deterministic in the scenario (seed included). Throws ScenarioInvalid
/// with the event index for invalid scenarios and for protocol errors hit
/// while running.
Transcript run_scenario(const Scenario& scenario);

/// Stable text rendering (byte-identical for identical transcripts).
std::string render_transcript(const Transcript& transcript);

/// A non-member's direct attempt: M mod (P_k xor S_k).
Nat eavesdrop_extract(const BroadcastMessage& message, const MemberPrime& outsider_prime,
                      const MemberSecret& outsider_secret);

/// What the attacker assumes about the shares hidden in M.
struct ShareShape {
    std::size_t factor_count = 0;  // members in the group
    std::size_t share_bits = 0;    // every D_i in [2^(b-1), 2^b)
};

inline constexpr std::size_t kAttackCapBits = 48;

/// Toy attack: every k < known_key_bound for which M - k splits, by trial
/// division, into factors that could be shares. With a shape, exactly
/// factor_count factors in [max(2^(b-1), k+1), 2^b); without, any number of
/// factors each above k. Throws TooLarge when M exceeds
/// min(max_product_bits, 48) bits.
std::vector<Nat> brute_force_recover(const BroadcastMessage& message, const Nat& known_key_bound,
                                     std::size_t max_product_bits,
                                     std::optional<ShareShape> shape = std::nullopt);

}  // namespace gkt::sim
