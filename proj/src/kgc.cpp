#include "gkt/kgc.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <utility>

namespace gkt {

namespace {

constexpr std::string_view kRegistryHeader = "gkt-registry v1";
constexpr std::string_view kRetiredMarker = "-- retired --";

[[noreturn]] void malformed(std::size_t line, const std::string& why) {
    throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line) + ": " + why);
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t tab = line.find('\t', start);
        out.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
    }
    return out;
}

}  // namespace

std::string_view to_string(MemberStatus status) {
    switch (status) {
        case MemberStatus::registered: return "registered";
        case MemberStatus::active: return "active";
        case MemberStatus::departed: return "departed";
    }
    return "?";
}

std::optional<MemberStatus> parse_status(std::string_view text) {
    if (text == "registered") return MemberStatus::registered;
    if (text == "active") return MemberStatus::active;
    if (text == "departed") return MemberStatus::departed;
    return std::nullopt;
}

// ---------------------------------------------------------------- Registry

void Registry::insert(MemberRecord record) {
    if (record.member_id.empty()) throw Error(ErrorCode::InvalidArgument, "empty member id");
    if (contains(record.member_id)) {
        throw Error(ErrorCode::DuplicateMember, "member '" + record.member_id + "' already registered");
    }
    if (prime_in_use(record.prime.value)) {
        throw Error(ErrorCode::DuplicateMember,
                    "prime " + to_hex(record.prime.value) + " already issued");
    }
    if (sgn(record.secret.value) <= 0) {
        throw Error(ErrorCode::InvalidSecret, "secret of '" + record.member_id + "' is zero");
    }
    index_.emplace(record.member_id, records_.size());
    records_.push_back(std::move(record));
}

void Registry::remove(const std::string& member_id) {
    auto it = index_.find(member_id);
    if (it == index_.end()) throw Error(ErrorCode::UnknownMember, "no member '" + member_id + "'");
    retired_.insert(records_[it->second].prime.value);
    records_.erase(records_.begin() + static_cast<std::ptrdiff_t>(it->second));
    reindex();
}

const MemberRecord& Registry::at(const std::string& member_id) const {
    auto it = index_.find(member_id);
    if (it == index_.end()) throw Error(ErrorCode::UnknownMember, "no member '" + member_id + "'");
    return records_[it->second];
}

MemberRecord& Registry::at(const std::string& member_id) {
    return const_cast<MemberRecord&>(std::as_const(*this).at(member_id));
}

std::vector<Nat> Registry::used_primes() const {
    std::vector<Nat> out(retired_.begin(), retired_.end());
    for (const auto& r : records_) out.push_back(r.prime.value);
    return out;
}

bool Registry::prime_in_use(const Nat& prime) const {
    if (retired_.contains(prime)) return true;
    return std::any_of(records_.begin(), records_.end(),
                       [&](const MemberRecord& r) { return r.prime.value == prime; });
}

void Registry::reindex() {
    index_.clear();
    for (std::size_t i = 0; i < records_.size(); ++i) index_.emplace(records_[i].member_id, i);
}

void save_registry(const Registry& registry, std::ostream& sink) {
    sink << kRegistryHeader << '\n';
    for (const auto& r : registry.records()) {
        sink << r.member_id << '\t' << to_string(r.status) << '\t' << to_hex(r.prime.value) << '\t'
             << to_hex(r.secret.value) << '\n';
    }
    sink << kRetiredMarker << '\n';
    for (const auto& p : registry.retired()) sink << to_hex(p) << '\n';
}

Registry load_registry(std::istream& source) {
    Registry registry;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(source, line)) malformed(1, "missing header");
    ++line_no;
    if (line != kRegistryHeader) malformed(line_no, "expected '" + std::string(kRegistryHeader) + "'");

    bool in_retired = false;
    while (std::getline(source, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (!in_retired && line == kRetiredMarker) {
            in_retired = true;
            continue;
        }
        if (in_retired) {
            auto prime = parse_hex(line);
            if (!prime) malformed(line_no, "retired prime is not canonical hex");
            if (registry.prime_in_use(*prime)) malformed(line_no, "retired prime listed twice");
            registry.retire(*prime);
            continue;
        }
        const auto fields = split_tabs(line);
        if (fields.size() != 4) malformed(line_no, "expected 4 tab-separated fields");
        if (fields[0].empty()) malformed(line_no, "empty member id");
        auto status = parse_status(fields[1]);
        if (!status) malformed(line_no, "unknown status '" + std::string(fields[1]) + "'");
        auto prime = parse_hex(fields[2]);
        if (!prime) malformed(line_no, "prime is not canonical hex");
        auto secret = parse_hex(fields[3]);
        if (!secret) malformed(line_no, "secret is not canonical hex");
        try {
            registry.insert(MemberRecord{std::string(fields[0]), MemberPrime::of(*prime),
                                         MemberSecret::of(*secret), *status});
        } catch (const Error& e) {
            malformed(line_no, e.what());
        }
    }
    if (!in_retired) malformed(line_no, "missing '" + std::string(kRetiredMarker) + "' section");
    return registry;
}

// --------------------------------------------------------------------- Kgc

Kgc::Kgc(KgcConfig config, Registry registry) : config_(config), registry_(std::move(registry)) {
    if (config_.key_bits == 0) throw Error(ErrorCode::InvalidArgument, "key_bits must be positive");
    state_.key_bits = config_.key_bits;
}

const MemberRecord& Kgc::register_member(const std::string& member_id, const MemberSecret& secret,
                                         RandomSource& rng) {
    if (member_id.empty()) throw Error(ErrorCode::InvalidArgument, "empty member id");
    if (registry_.contains(member_id)) {
        throw Error(ErrorCode::DuplicateMember, "member '" + member_id + "' already registered");
    }
    if (sgn(secret.value) <= 0) throw Error(ErrorCode::InvalidSecret, "secret must be non-zero");
    if (config_.strict_secrets && !secret_within_rule(secret, config_.prime_bits)) {
        throw Error(ErrorCode::InvalidSecret,
                    "secret has " + std::to_string(bit_length(secret.value)) +
                        " bits; at most " + std::to_string(config_.prime_bits - 1) + " allowed");
    }

    std::vector<Nat> excluded = registry_.used_primes();
    std::vector<Nat> taken_shares;
    for (const auto& r : registry_.records()) taken_shares.push_back(r.prime.value ^ r.secret.value);

    for (;;) {
        MemberPrime prime = generate_member_prime(config_.prime_bits, excluded, rng);
        const Nat share = prime.value ^ secret.value;
        const bool clash = share < 2 || std::find(taken_shares.begin(), taken_shares.end(), share) !=
                                            taken_shares.end();
        if (!clash) {
            registry_.insert(MemberRecord{member_id, std::move(prime), secret, MemberStatus::registered});
            return registry_.at(member_id);
        }
        excluded.push_back(prime.value);
    }
}

const MemberRecord& Kgc::register_member_pinned(const std::string& member_id,
                                                const MemberPrime& prime,
                                                const MemberSecret& secret) {
    registry_.insert(MemberRecord{member_id, prime, secret, MemberStatus::registered});
    return registry_.at(member_id);
}

void Kgc::deregister_member(const std::string& member_id) {
    const auto& record = registry_.at(member_id);
    if (record.status == MemberStatus::active) {
        throw Error(ErrorCode::MemberActive, "member '" + member_id + "' is in the live session");
    }
    registry_.remove(member_id);
}

std::vector<MaskedShare> Kgc::active_shares() const {
    std::vector<MaskedShare> shares;
    shares.reserve(state_.active_members.size());
    for (const auto& id : state_.active_members) shares.push_back(registry_.at(id).share());
    return shares;
}

GroupKey Kgc::choose_key(std::span<const MaskedShare> shares, RandomSource& rng,
                         const std::optional<Nat>& pinned) const {
    if (pinned) return GroupKey{*pinned, 0};
    return select_group_key(shares, config_.key_bits, rng, config_.prime_keys);
}

BroadcastMessage Kgc::start_session(const std::vector<std::string>& member_ids, RandomSource& rng,
                                    std::optional<Nat> pinned_key) {
    if (state_.epoch > 0) throw Error(ErrorCode::SessionActive, "a session is already running");
    if (member_ids.empty()) throw Error(ErrorCode::EmptyGroup, "no members to start with");
    std::set<std::string> seen;
    std::vector<MaskedShare> shares;
    for (const auto& id : member_ids) {
        const auto& record = registry_.at(id);
        if (!seen.insert(id).second) {
            throw Error(ErrorCode::DuplicateMember, "member '" + id + "' listed twice");
        }
        if (record.status == MemberStatus::departed) {
            throw Error(ErrorCode::MemberDeparted, "member '" + id + "' has departed");
        }
        shares.push_back(record.share());
    }
    GroupKey key = choose_key(shares, rng, pinned_key);
    return commit(member_ids, std::move(key), BroadcastKind::initial);
}

BroadcastMessage Kgc::process_join(const std::string& member_id, RandomSource& rng,
                                   std::optional<Nat> pinned_key) {
    const auto& record = registry_.at(member_id);
    if (!has_session()) throw Error(ErrorCode::NoSession, "no session to join");
    if (record.status == MemberStatus::active) {
        throw Error(ErrorCode::AlreadyActive, "member '" + member_id + "' is already active");
    }
    if (record.status == MemberStatus::departed) {
        throw Error(ErrorCode::MemberDeparted,
                    "member '" + member_id + "' has departed; re-register for a fresh prime");
    }

    std::vector<std::string> members = state_.active_members;
    members.push_back(member_id);
    std::vector<MaskedShare> shares = active_shares();
    shares.push_back(record.share());

    GroupKey key;
    if (config_.join_policy == JoinPolicy::reuse_key && !pinned_key) {
        key = GroupKey{state_.key.value, 0};
        if (key.value >= shares.back().value) {
            throw Error(ErrorCode::NoValidKey, "current key is not below the joining member's share");
        }
    } else {
        key = choose_key(shares, rng, pinned_key);
    }
    return commit(std::move(members), std::move(key), BroadcastKind::join);
}

BroadcastMessage Kgc::process_leave(const std::string& member_id, RandomSource& rng,
                                    std::optional<Nat> pinned_key) {
    const auto& record = registry_.at(member_id);
    if (!has_session()) throw Error(ErrorCode::NoSession, "no session to leave");
    if (record.status != MemberStatus::active) {
        throw Error(ErrorCode::NotActive, "member '" + member_id + "' is not active");
    }
    if (state_.active_members.size() == 1) {
        throw Error(ErrorCode::LastMember, "member '" + member_id + "' is the last one");
    }

    std::vector<std::string> members;
    std::vector<MaskedShare> shares;
    for (const auto& id : state_.active_members) {
        if (id == member_id) continue;
        members.push_back(id);
        shares.push_back(registry_.at(id).share());
    }
    GroupKey key = choose_key(shares, rng, pinned_key);
    BroadcastMessage message = commit(std::move(members), std::move(key), BroadcastKind::leave);
    registry_.at(member_id).status = MemberStatus::departed;
    return message;
}

BroadcastMessage Kgc::commit(std::vector<std::string> members, GroupKey key, BroadcastKind kind) {
    std::vector<MaskedShare> shares;
    shares.reserve(members.size());
    for (const auto& id : members) shares.push_back(registry_.at(id).share());

    key.epoch = state_.epoch + 1;
    // Validates K < every share before anything is mutated.
    BroadcastMessage message = compose_broadcast(shares, key, kind);

    for (const auto& id : state_.active_members) registry_.at(id).status = MemberStatus::registered;
    for (const auto& id : members) registry_.at(id).status = MemberStatus::active;
    state_.active_members = std::move(members);
    state_.key = std::move(key);
    state_.epoch = state_.key.epoch;
    last_broadcast_ = message;

    collisions_.clear();
    for (std::size_t i = 0; i < shares.size(); ++i) {
        for (std::size_t j = i + 1; j < shares.size(); ++j) {
            if (shares[i] == shares[j]) {
                collisions_.emplace_back(state_.active_members[i], state_.active_members[j]);
            }
        }
    }
    return message;
}

}  // namespace gkt
