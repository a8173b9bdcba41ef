#include "gkt/member_client.hpp"

namespace gkt {

MemberSession::MemberSession(std::string member_id, MemberPrime prime, MemberSecret secret)
    : member_id_(std::move(member_id)), prime_(std::move(prime)), secret_(std::move(secret)) {}

const GroupKey& MemberSession::on_broadcast(const BroadcastMessage& message) {
    if (message.epoch <= last_epoch_) {
        throw Error(ErrorCode::StaleEpoch, "epoch " + std::to_string(message.epoch) +
                                               " is not after " + std::to_string(last_epoch_));
    }
    Nat key = extract_key(message, prime_, secret_);
    current_key_ = GroupKey{std::move(key), message.epoch};
    last_epoch_ = message.epoch;
    return *current_key_;
}

}  // namespace gkt
