#include "gkt/sim_adversary.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "gkt/member_client.hpp"

namespace gkt::sim {

namespace {

constexpr std::string_view kScenarioMagic = "gkt-scenario";
constexpr std::uint64_t kOutsiderSeedMix = 0x9e3779b97f4a7c15ULL;

[[noreturn]] void bad_line(std::size_t line, const std::string& why) {
    throw Error(ErrorCode::ScenarioInvalid, "line " + std::to_string(line) + ": " + why);
}

[[noreturn]] void bad_event(std::size_t index, const std::string& why) {
    throw Error(ErrorCode::ScenarioInvalid, "event " + std::to_string(index) + ": " + why);
}

std::vector<std::string> tokenize(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    for (std::string tok; in >> tok;) out.push_back(tok);
    return out;
}

std::uint64_t parse_uint(const std::string& text, std::size_t line, const std::string& what) {
    if (text.empty() || !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        bad_line(line, what + " must be a non-negative integer");
    }
    try {
        return std::stoull(text);
    } catch (const std::exception&) {
        bad_line(line, what + " out of range");
    }
}

// Splits "name=value"; returns false if there is no '='.
bool split_assign(const std::string& tok, std::string& name, std::string& value) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) return false;
    name = tok.substr(0, eq);
    value = tok.substr(eq + 1);
    return true;
}

Nat parse_hex_field(const std::string& value, std::size_t line, const std::string& what) {
    auto n = parse_hex(value);
    if (!n) bad_line(line, what + " is not canonical lowercase hex");
    return *n;
}

}  // namespace

// ------------------------------------------------------------------ parsing

Scenario parse_scenario(std::istream& in) {
    Scenario scenario;
    std::string line;
    std::size_t line_no = 0;

    bool have_header = false;
    while (!have_header && std::getline(in, line)) {
        ++line_no;
        auto toks = tokenize(line);
        if (toks.empty() || toks[0].starts_with('#')) continue;
        if (toks.size() < 2 || toks[0] != kScenarioMagic || toks[1] != "v1") {
            bad_line(line_no, "expected header 'gkt-scenario v1 seed=<int> pbits=<int> sbits=<int> kbits=<int>'");
        }
        std::set<std::string> seen;
        for (std::size_t i = 2; i < toks.size(); ++i) {
            std::string name, value;
            if (!split_assign(toks[i], name, value)) bad_line(line_no, "bad header field '" + toks[i] + "'");
            if (!seen.insert(name).second) bad_line(line_no, "header field '" + name + "' repeated");
            if (name == "seed") {
                scenario.seed = parse_uint(value, line_no, "seed");
            } else if (name == "pbits") {
                scenario.prime_bits = parse_uint(value, line_no, "pbits");
            } else if (name == "sbits") {
                scenario.secret_bits = parse_uint(value, line_no, "sbits");
            } else if (name == "kbits") {
                scenario.key_bits = parse_uint(value, line_no, "kbits");
            } else if (name == "policy") {
                if (value == "fresh") scenario.join_policy = JoinPolicy::fresh_key;
                else if (value == "reuse") scenario.join_policy = JoinPolicy::reuse_key;
                else bad_line(line_no, "policy must be 'fresh' or 'reuse'");
            } else {
                bad_line(line_no, "unknown header field '" + name + "'");
            }
        }
        for (const char* required : {"seed", "pbits", "sbits", "kbits"}) {
            if (!seen.contains(required)) bad_line(line_no, std::string("header lacks ") + required);
        }
        if (scenario.prime_bits < 8) bad_line(line_no, "pbits must be >= 8");
        if (scenario.secret_bits == 0) bad_line(line_no, "sbits must be positive");
        if (scenario.key_bits == 0) bad_line(line_no, "kbits must be positive");
        have_header = true;
    }
    if (!have_header) bad_line(line_no + 1, "missing header");

    while (std::getline(in, line)) {
        ++line_no;
        auto toks = tokenize(line);
        if (toks.empty() || toks[0].starts_with('#')) continue;
        const std::string& verb = toks[0];

        // Trailing key=hex pins a group key for start/join/leave.
        std::optional<Nat> pinned_key;
        auto take_key = [&] {
            std::string name, value;
            if (toks.size() > 1 && split_assign(toks.back(), name, value)) {
                if (name != "key") bad_line(line_no, "unknown field '" + name + "'");
                pinned_key = parse_hex_field(value, line_no, "key");
                toks.pop_back();
            }
        };

        if (verb == "register") {
            if (toks.size() < 2) bad_line(line_no, "register needs a member id");
            RegisterEvent ev{toks[1], 0, std::nullopt, std::nullopt};
            for (std::size_t i = 2; i < toks.size(); ++i) {
                std::string name, value;
                if (!split_assign(toks[i], name, value)) {
                    if (ev.secret_bits != 0) bad_line(line_no, "secret bits given twice");
                    ev.secret_bits = parse_uint(toks[i], line_no, "secret bits");
                    if (ev.secret_bits == 0) bad_line(line_no, "secret bits must be positive");
                } else if (name == "prime") {
                    ev.pinned_prime = parse_hex_field(value, line_no, "prime");
                } else if (name == "secret") {
                    ev.pinned_secret = parse_hex_field(value, line_no, "secret");
                } else {
                    bad_line(line_no, "unknown field '" + name + "'");
                }
            }
            scenario.events.emplace_back(std::move(ev));
        } else if (verb == "start") {
            take_key();
            if (toks.size() < 2) bad_line(line_no, "start needs at least one member id");
            scenario.events.emplace_back(StartEvent{{toks.begin() + 1, toks.end()}, pinned_key});
        } else if (verb == "join" || verb == "leave") {
            take_key();
            if (toks.size() != 2) bad_line(line_no, verb + " takes exactly one member id");
            if (verb == "join") scenario.events.emplace_back(JoinEvent{toks[1], pinned_key});
            else scenario.events.emplace_back(LeaveEvent{toks[1], pinned_key});
        } else if (verb == "eavesdrop") {
            if (toks.size() != 1) bad_line(line_no, "eavesdrop takes no arguments");
            scenario.events.emplace_back(EavesdropEvent{});
        } else {
            bad_line(line_no, "unknown event '" + verb + "'");
        }
    }
    return scenario;
}

void write_scenario(const Scenario& scenario, std::ostream& out) {
    out << kScenarioMagic << " v1 seed=" << scenario.seed << " pbits=" << scenario.prime_bits
        << " sbits=" << scenario.secret_bits << " kbits=" << scenario.key_bits;
    if (scenario.join_policy == JoinPolicy::reuse_key) out << " policy=reuse";
    out << '\n';
    auto key_suffix = [](const std::optional<Nat>& key) {
        return key ? " key=" + to_hex(*key) : std::string();
    };
    for (const auto& event : scenario.events) {
        std::visit(
            [&](const auto& ev) {
                using T = std::decay_t<decltype(ev)>;
                if constexpr (std::is_same_v<T, RegisterEvent>) {
                    out << "register " << ev.member_id;
                    if (ev.secret_bits) out << ' ' << ev.secret_bits;
                    if (ev.pinned_prime) out << " prime=" << to_hex(*ev.pinned_prime);
                    if (ev.pinned_secret) out << " secret=" << to_hex(*ev.pinned_secret);
                } else if constexpr (std::is_same_v<T, StartEvent>) {
                    out << "start";
                    for (const auto& id : ev.member_ids) out << ' ' << id;
                    out << key_suffix(ev.pinned_key);
                } else if constexpr (std::is_same_v<T, JoinEvent>) {
                    out << "join " << ev.member_id << key_suffix(ev.pinned_key);
                } else if constexpr (std::is_same_v<T, LeaveEvent>) {
                    out << "leave " << ev.member_id << key_suffix(ev.pinned_key);
                } else {
                    out << "eavesdrop";
                }
            },
            event);
        out << '\n';
    }
}

// --------------------------------------------------------------- validation

void validate_scenario(const Scenario& scenario) {
    if (scenario.prime_bits < 8) bad_event(0, "prime bits must be >= 8");
    if (scenario.key_bits == 0) bad_event(0, "key bits must be positive");

    std::map<std::string, MemberStatus> members;
    std::size_t active = 0;
    bool session = false;

    for (std::size_t i = 0; i < scenario.events.size(); ++i) {
        const Event& event = scenario.events[i];
        if (const auto* ev = std::get_if<RegisterEvent>(&event)) {
            if (members.contains(ev->member_id)) bad_event(i, "'" + ev->member_id + "' registered twice");
            const std::size_t bits = ev->secret_bits ? ev->secret_bits : scenario.secret_bits;
            if (!ev->pinned_prime && !ev->pinned_secret && bits > scenario.prime_bits - 1) {
                bad_event(i, "secret of " + std::to_string(bits) + " bits exceeds prime bits - 1");
            }
            if (ev->pinned_secret && sgn(*ev->pinned_secret) == 0) bad_event(i, "pinned secret is zero");
            members.emplace(ev->member_id, MemberStatus::registered);
        } else if (const auto* ev = std::get_if<StartEvent>(&event)) {
            if (session) bad_event(i, "session already started");
            std::set<std::string> seen;
            for (const auto& id : ev->member_ids) {
                auto it = members.find(id);
                if (it == members.end()) bad_event(i, "'" + id + "' is not registered");
                if (!seen.insert(id).second) bad_event(i, "'" + id + "' listed twice");
                it->second = MemberStatus::active;
            }
            active = ev->member_ids.size();
            session = true;
        } else if (const auto* ev = std::get_if<JoinEvent>(&event)) {
            if (!session) bad_event(i, "join before start");
            auto it = members.find(ev->member_id);
            if (it == members.end()) bad_event(i, "'" + ev->member_id + "' is not registered");
            if (it->second == MemberStatus::active) bad_event(i, "'" + ev->member_id + "' is already active");
            if (it->second == MemberStatus::departed) bad_event(i, "'" + ev->member_id + "' has departed");
            it->second = MemberStatus::active;
            ++active;
        } else if (const auto* ev = std::get_if<LeaveEvent>(&event)) {
            if (!session) bad_event(i, "leave before start");
            auto it = members.find(ev->member_id);
            if (it == members.end() || it->second != MemberStatus::active) {
                bad_event(i, "'" + ev->member_id + "' is not active");
            }
            if (active == 1) bad_event(i, "'" + ev->member_id + "' is the last member");
            it->second = MemberStatus::departed;
            --active;
        } else {
            if (!session) bad_event(i, "eavesdrop before start");
        }
    }
}

// ------------------------------------------------------------------ running

Transcript run_scenario(const Scenario& scenario) {
    validate_scenario(scenario);

    KgcConfig config;
    config.prime_bits = scenario.prime_bits;
    config.secret_bits = scenario.secret_bits;
    config.key_bits = scenario.key_bits;
    config.join_policy = scenario.join_policy;
    Kgc kgc(config);
    RandomSource rng(scenario.seed);

    Transcript transcript;
    {
        RandomSource outsider_rng(scenario.seed ^ kOutsiderSeedMix);
        transcript.outsider_prime = generate_member_prime(scenario.prime_bits, {}, outsider_rng);
        transcript.outsider_secret = random_secret(scenario.prime_bits - 1, outsider_rng);
    }

    std::map<std::string, MemberSession> sessions;
    std::vector<std::string> departed;
    std::vector<BroadcastRecord> history;

    auto observe = [&](EventRecord& rec, const BroadcastMessage& message) {
        const GroupState& state = kgc.state();
        rec.broadcast = BroadcastRecord{message.epoch, message.kind, bit_length(message.value),
                                        message.value, state.key.value};
        for (const auto& id : state.active_members) {
            const GroupKey& key = sessions.at(id).on_broadcast(message);
            rec.members.push_back({id, key.value, key.value == state.key.value});
        }
        for (const auto& id : departed) {
            const auto& s = sessions.at(id);
            Nat got = extract_key(message, s.prime(), s.secret());
            bool same = got == state.key.value;
            rec.departed.push_back({id, std::move(got), same});
        }
        history.push_back(*rec.broadcast);
    };

    for (std::size_t i = 0; i < scenario.events.size(); ++i) {
        EventRecord rec;
        rec.index = i;
        try {
            const Event& event = scenario.events[i];
            if (const auto* ev = std::get_if<RegisterEvent>(&event)) {
                const std::size_t bits = ev->secret_bits ? ev->secret_bits : scenario.secret_bits;
                MemberSecret secret = ev->pinned_secret ? MemberSecret::of(*ev->pinned_secret)
                                                        : random_secret(bits, rng);
                const MemberRecord& record =
                    ev->pinned_prime
                        ? kgc.register_member_pinned(ev->member_id, MemberPrime::of(*ev->pinned_prime), secret)
                        : kgc.register_member(ev->member_id, secret, rng);
                sessions.emplace(record.member_id,
                                 MemberSession(record.member_id, record.prime, record.secret));
                rec.summary = "register " + record.member_id + " prime=" + to_hex(record.prime.value);
            } else if (const auto* ev = std::get_if<StartEvent>(&event)) {
                BroadcastMessage m = kgc.start_session(ev->member_ids, rng, ev->pinned_key);
                rec.summary = "start";
                for (const auto& id : ev->member_ids) rec.summary += " " + id;
                observe(rec, m);
            } else if (const auto* ev = std::get_if<JoinEvent>(&event)) {
                const std::vector<BroadcastRecord> before = history;
                BroadcastMessage m = kgc.process_join(ev->member_id, rng, ev->pinned_key);
                rec.summary = "join " + ev->member_id;
                const auto& joiner = sessions.at(ev->member_id);
                for (const auto& past : before) {
                    Nat got = extract_key(BroadcastMessage{past.message, past.epoch, past.kind},
                                          joiner.prime(), joiner.secret());
                    bool same = got == past.key;
                    rec.backward.push_back({ev->member_id + "@" + std::to_string(past.epoch), std::move(got), same});
                }
                observe(rec, m);
            } else if (const auto* ev = std::get_if<LeaveEvent>(&event)) {
                BroadcastMessage m = kgc.process_leave(ev->member_id, rng, ev->pinned_key);
                rec.summary = "leave " + ev->member_id;
                departed.push_back(ev->member_id);
                observe(rec, m);
            } else {
                const auto& last = *kgc.last_broadcast();
                Nat got = eavesdrop_extract(last, transcript.outsider_prime, transcript.outsider_secret);
                bool same = got == kgc.state().key.value;
                rec.summary = "eavesdrop epoch=" + std::to_string(last.epoch);
                rec.outsider = Observation{"outsider", std::move(got), same};
            }
        } catch (const Error& e) {
            if (e.code() == ErrorCode::ScenarioInvalid) throw;
            bad_event(i, e.what());
        }
        transcript.events.push_back(std::move(rec));
    }
    return transcript;
}

std::string render_transcript(const Transcript& transcript) {
    std::ostringstream out;
    auto verdict = [](bool same) { return same ? "ok" : "differs"; };
    out << "gkt-transcript v1\n";
    out << "outsider prime=" << to_hex(transcript.outsider_prime.value)
        << " secret=" << to_hex(transcript.outsider_secret.value) << '\n';
    for (const auto& rec : transcript.events) {
        out << '[' << rec.index << "] " << rec.summary << '\n';
        if (rec.broadcast) {
            const auto& b = *rec.broadcast;
            out << "  broadcast epoch=" << b.epoch << " kind=" << to_string(b.kind)
                << " bits=" << b.message_bits << " m=" << to_hex(b.message) << " key=" << to_hex(b.key)
                << '\n';
        }
        for (const auto& o : rec.backward) {
            out << "  backward " << o.party << " got=" << to_hex(o.extracted) << ' ' << verdict(o.matches_key) << '\n';
        }
        for (const auto& o : rec.members) {
            out << "  member " << o.party << " key=" << to_hex(o.extracted) << ' ' << verdict(o.matches_key) << '\n';
        }
        for (const auto& o : rec.departed) {
            out << "  departed " << o.party << " got=" << to_hex(o.extracted) << ' ' << verdict(o.matches_key) << '\n';
        }
        if (rec.outsider) {
            out << "  outsider got=" << to_hex(rec.outsider->extracted) << ' ' << verdict(rec.outsider->matches_key)
                << '\n';
        }
    }
    return out.str();
}

// ------------------------------------------------------------------ attacks

Nat eavesdrop_extract(const BroadcastMessage& message, const MemberPrime& outsider_prime,
                      const MemberSecret& outsider_secret) {
    return extract_key(message, outsider_prime, outsider_secret);
}

namespace {

using u128 = unsigned __int128;

// base^exp, saturating at 2^64.
u128 saturating_pow(std::uint64_t base, std::size_t exp) {
    const u128 limit = u128(1) << 64;
    u128 acc = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        acc *= base;
        if (acc >= limit) return limit;
    }
    return acc;
}

// Can n be written as exactly `count` factors, each in [lo, hi), non-decreasing?
bool splits_into(std::uint64_t n, std::size_t count, std::uint64_t lo, std::uint64_t hi) {
    if (count == 1) return n >= lo && n < hi;
    if (saturating_pow(lo, count) > n) return false;
    for (std::uint64_t d = lo; d < hi && saturating_pow(d, count) <= n; ++d) {
        if (n % d == 0 && splits_into(n / d, count - 1, d, hi)) return true;
    }
    return false;
}

}  // namespace

std::vector<Nat> brute_force_recover(const BroadcastMessage& message, const Nat& known_key_bound,
                                     std::size_t max_product_bits, std::optional<ShareShape> shape) {
    const std::size_t cap = std::min(max_product_bits, kAttackCapBits);
    if (max_product_bits > kAttackCapBits || bit_length(message.value) > cap) {
        throw Error(ErrorCode::TooLarge, "message has " + std::to_string(bit_length(message.value)) +
                                             " bits; toy attack is capped at " +
                                             std::to_string(cap) + " bits");
    }
    if (shape && (shape->factor_count == 0 || shape->share_bits == 0 || shape->share_bits > 48)) {
        throw Error(ErrorCode::InvalidArgument, "share shape needs factor_count >= 1 and 1..48 share bits");
    }
    const std::uint64_t m = nat_to_u64(message.value);
    const std::uint64_t bound = known_key_bound > m ? m : nat_to_u64(known_key_bound);

    std::vector<Nat> candidates;
    for (std::uint64_t k = 1; k < bound; ++k) {
        const std::uint64_t rest = m - k;
        bool plausible;
        if (shape) {
            const std::uint64_t hi = std::uint64_t{1} << shape->share_bits;
            const std::uint64_t lo = std::max(hi >> 1, k + 1);
            plausible = lo < hi && splits_into(rest, shape->factor_count, lo, hi);
        } else {
            // A single factor above k is always a valid split.
            plausible = rest > k;
        }
        if (plausible) candidates.push_back(nat_from_u64(k));
    }
    return candidates;
}

}  // namespace gkt::sim
