#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gkt/kgc.hpp"
#include "gkt/member_client.hpp"

using namespace gkt;

namespace {

MemberSession session_for(const Kgc& kgc, const std::string& id) {
    const auto& r = kgc.registry().at(id);
    return MemberSession(id, r.prime, r.secret);
}

}  // namespace

TEST_CASE("fresh session has no key") {
    MemberSession s("a", MemberPrime::of(Nat(11)), MemberSecret::of(Nat(6)));
    CHECK_FALSE(s.current());
    CHECK(s.last_epoch() == 0);
}

TEST_CASE("on_broadcast extracts and stamps the epoch") {
    MemberSession s("a", MemberPrime::of(Nat(11)), MemberSecret::of(Nat(6)));
    const auto& key = s.on_broadcast(BroadcastMessage{Nat(55), 1, BroadcastKind::initial});
    CHECK(key.value == 3);
    CHECK(key.epoch == 1);
    REQUIRE(s.current());
    CHECK(s.current()->value == 3);
    CHECK(s.last_epoch() == 1);
}

TEST_CASE("replays and older epochs are rejected without touching state") {
    MemberSession s("a", MemberPrime::of(Nat(11)), MemberSecret::of(Nat(6)));
    s.on_broadcast(BroadcastMessage{Nat(55), 2, BroadcastKind::initial});
    try {
        s.on_broadcast(BroadcastMessage{Nat(1147), 2, BroadcastKind::join});
        FAIL("expected StaleEpoch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::StaleEpoch);
    }
    CHECK_THROWS_AS(s.on_broadcast(BroadcastMessage{Nat(1147), 1, BroadcastKind::join}), Error);
    CHECK(s.last_epoch() == 2);
    CHECK(s.current()->value == 3);
}

TEST_CASE("unusable own share is reported") {
    MemberSession s("a", MemberPrime::of(Nat(7)), MemberSecret::of(Nat(7)));
    try {
        s.on_broadcast(BroadcastMessage{Nat(55), 1, BroadcastKind::initial});
        FAIL("expected InvalidShare");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidShare);
    }
    CHECK_FALSE(s.current());
    CHECK(s.last_epoch() == 0);
}

TEST_CASE("member tracks rekeys across join and leave") {
    KgcConfig c;
    c.prime_bits = 64;
    c.secret_bits = 63;
    Kgc kgc(c);
    RandomSource rng(31);
    for (const char* id : {"a", "b", "c"}) kgc.register_member(id, random_secret(63, rng), rng);
    MemberSession a = session_for(kgc, "a");
    MemberSession b = session_for(kgc, "b");
    MemberSession cc = session_for(kgc, "c");

    auto m1 = kgc.start_session({"a", "b"}, rng);
    a.on_broadcast(m1);
    b.on_broadcast(m1);
    CHECK(a.current() == kgc.state().key);
    CHECK(b.current() == kgc.state().key);

    auto m2 = kgc.process_join("c", rng);
    for (auto* s : {&a, &b, &cc}) {
        s->on_broadcast(m2);
        CHECK(s->current() == kgc.state().key);
        CHECK(s->last_epoch() == 2);
    }

    const GroupKey b_last = *b.current();
    auto m3 = kgc.process_leave("b", rng);
    a.on_broadcast(m3);
    cc.on_broadcast(m3);
    CHECK(a.current() == kgc.state().key);
    CHECK(cc.current() == kgc.state().key);
    // The departed member keeps its old key; applying the new broadcast does not yield the new one.
    CHECK(b.current() == b_last);
    const auto& br = kgc.registry().at("b");
    CHECK(extract_key(m3, br.prime, br.secret) != kgc.state().key.value);
}

TEST_CASE("out-of-order delivery never regresses the epoch") {
    KgcConfig c;
    c.prime_bits = 16;
    c.secret_bits = 15;
    c.key_bits = 12;
    Kgc kgc(c);
    RandomSource rng(32);
    for (const char* id : {"a", "b", "c", "d"}) kgc.register_member(id, random_secret(15, rng), rng);
    std::vector<BroadcastMessage> messages;
    messages.push_back(kgc.start_session({"a", "b"}, rng));
    messages.push_back(kgc.process_join("c", rng));
    messages.push_back(kgc.process_join("d", rng));
    messages.push_back(kgc.process_leave("c", rng));

    MemberSession a = session_for(kgc, "a");
    for (int order : {2, 0, 3, 1}) {
        const std::uint64_t before = a.last_epoch();
        try {
            a.on_broadcast(messages[order]);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::StaleEpoch);
        }
        CHECK(a.last_epoch() >= before);
    }
    CHECK(a.last_epoch() == 4);
    CHECK(a.current() == kgc.state().key);
}
