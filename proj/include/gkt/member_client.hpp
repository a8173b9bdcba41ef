#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "gkt/core_protocol.hpp"

namespace gkt {

/// Member-side view: holds (P, S) and follows the group key across epochs.
/// Owned by a single logical user; not internally synchronized.
class MemberSession {
public:
    MemberSession(std::string member_id, MemberPrime prime, MemberSecret secret);

    /// Extracts K from M and records it under the message's epoch.
    /// Throws StaleEpoch if the epoch does not advance, InvalidShare if the
    /// member's own share is unusable. State is untouched on error.
    const GroupKey& on_broadcast(const BroadcastMessage& message);

    const std::optional<GroupKey>& current() const { return current_key_; }
    std::uint64_t last_epoch() const { return last_epoch_; }

    const std::string& member_id() const { return member_id_; }
    const MemberPrime& prime() const { return prime_; }
    const MemberSecret& secret() const { return secret_; }

private:
    std::string member_id_;
    MemberPrime prime_;
    MemberSecret secret_;
    std::optional<GroupKey> current_key_;
    std::uint64_t last_epoch_ = 0;
};

}  // namespace gkt
