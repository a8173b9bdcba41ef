#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gkt/core_protocol.hpp"

namespace gkt {

enum class MemberStatus : std::uint8_t { registered, active, departed };

std::string_view to_string(MemberStatus status);
std::optional<MemberStatus> parse_status(std::string_view text);

struct MemberRecord {
    std::string member_id;
    MemberPrime prime;
    MemberSecret secret;
    MemberStatus status = MemberStatus::registered;

    MaskedShare share() const { return xor_mask(prime, secret); }
    friend bool operator==(const MemberRecord&, const MemberRecord&) = default;
};

/// KGC-side member table. Records keep insertion order; member ids and
/// primes are unique, and primes of deregistered members are retired for good.
class Registry {
public:
    /// Stores a fully formed record (file import, pinned vectors). Checks
    /// uniqueness of id and prime against live and retired entries but not
    /// primality.
    void insert(MemberRecord record);

    /// Deletes the record and retires its prime.
    void remove(const std::string& member_id);

    void retire(const Nat& prime) { retired_.insert(prime); }

    bool contains(const std::string& member_id) const { return index_.contains(member_id); }
    const MemberRecord& at(const std::string& member_id) const;
    MemberRecord& at(const std::string& member_id);

    const std::vector<MemberRecord>& records() const { return records_; }
    const std::set<Nat>& retired() const { return retired_; }

    /// Every prime that may not be handed out again: live and retired.
    std::vector<Nat> used_primes() const;

    bool prime_in_use(const Nat& prime) const;
    std::size_t size() const { return records_.size(); }

    friend bool operator==(const Registry& a, const Registry& b) {
        return a.records_ == b.records_ && a.retired_ == b.retired_;
    }

private:
    void reindex();

    std::vector<MemberRecord> records_;
    std::map<std::string, std::size_t> index_;
    std::set<Nat> retired_;
};

/// Text form: header `gkt-registry v1`, then `id\tstatus\tprime_hex\tsecret_hex`
/// per record, then `-- retired --` and one hex prime per line.
void save_registry(const Registry& registry, std::ostream& sink);
/// Throws MalformedRecord naming the 1-based line number.
Registry load_registry(std::istream& source);

enum class JoinPolicy : std::uint8_t {
    fresh_key,      ///< select a new key on every join
    reuse_key,  ///< reuse the current key: M' = (M - K) * D_new + K
};

struct KgcConfig {
    std::size_t prime_bits = 64;
    std::size_t secret_bits = 63;
    std::size_t key_bits = 32;
    JoinPolicy join_policy = JoinPolicy::fresh_key;
    /// Reject secrets wider than prime_bits - 1.
    bool strict_secrets = true;
    /// Draw prime group keys instead of arbitrary integers.
    bool prime_keys = false;
};

struct GroupState {
    std::vector<std::string> active_members;  // product order
    GroupKey key;
    std::uint64_t epoch = 0;  // 0 = no session
    std::size_t key_bits = 0;

    friend bool operator==(const GroupState&, const GroupState&) = default;
};

/// The key generation center for one group.
///
/// Single-writer: mutating calls must be serialized by the owner; const
/// queries may run concurrently with each other but not with a mutation.
class Kgc {
public:
    explicit Kgc(KgcConfig config, Registry registry = {});

    const KgcConfig& config() const { return config_; }
    const Registry& registry() const { return registry_; }
    Registry& registry() { return registry_; }

    /// Assigns a fresh prime distinct from every live or retired prime.
    /// Throws DuplicateMember, InvalidSecret.
    const MemberRecord& register_member(const std::string& member_id, const MemberSecret& secret,
                                        RandomSource& rng);

    /// Registers with a caller-chosen prime (test vectors, imported data).
    const MemberRecord& register_member_pinned(const std::string& member_id,
                                               const MemberPrime& prime,
                                               const MemberSecret& secret);

    /// Throws UnknownMember, MemberActive.
    void deregister_member(const std::string& member_id);

    /// Epoch 1, kind initial. Throws UnknownMember, EmptyGroup, NoValidKey,
    /// SessionActive, DuplicateMember (id listed twice), MemberDeparted.
    BroadcastMessage start_session(const std::vector<std::string>& member_ids, RandomSource& rng,
                                   std::optional<Nat> pinned_key = std::nullopt);

    /// Throws UnknownMember, AlreadyActive, MemberDeparted, NoSession, NoValidKey.
    BroadcastMessage process_join(const std::string& member_id, RandomSource& rng,
                                  std::optional<Nat> pinned_key = std::nullopt);

    /// Throws UnknownMember, NotActive, LastMember, NoSession, NoValidKey.
    BroadcastMessage process_leave(const std::string& member_id, RandomSource& rng,
                                   std::optional<Nat> pinned_key = std::nullopt);

    bool has_session() const { return state_.epoch > 0 && !state_.active_members.empty(); }
    const GroupState& state() const { return state_; }
    const std::optional<BroadcastMessage>& last_broadcast() const { return last_broadcast_; }

    /// Active member ids whose masked shares coincide (logged, not rejected).
    const std::vector<std::pair<std::string, std::string>>& share_collisions() const {
        return collisions_;
    }

private:
    std::vector<MaskedShare> active_shares() const;
    GroupKey choose_key(std::span<const MaskedShare> shares, RandomSource& rng,
                        const std::optional<Nat>& pinned) const;
    BroadcastMessage commit(std::vector<std::string> members, GroupKey key, BroadcastKind kind);

    KgcConfig config_;
    Registry registry_;
    GroupState state_;
    std::optional<BroadcastMessage> last_broadcast_;
    std::vector<std::pair<std::string, std::string>> collisions_;
};

}  // namespace gkt
