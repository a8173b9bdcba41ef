#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gkt/random.hpp"
#include "gkt/wire.hpp"

using namespace gkt;
using namespace gkt::wire;

namespace {

using Bytes = std::vector<std::uint8_t>;

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected gkt::Error");
    return ErrorCode::InvalidArgument;
}

Bytes random_bytes(RandomSource& rng, std::size_t n) {
    Bytes out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng.next_u64());
    return out;
}

const FrameKind kAllKinds[] = {FrameKind::register_req, FrameKind::register_resp, FrameKind::start_req,
                               FrameKind::broadcast,    FrameKind::join_req,      FrameKind::leave_req,
                               FrameKind::error,        FrameKind::ack};

}  // namespace

TEST_CASE("ACK frame bytes") {
    CHECK(encode_frame(make_ack()) == Bytes{0x47, 0x4B, 0x54, 0x50, 0x01, 0x08, 0x00, 0x00, 0x00, 0x00});
}

TEST_CASE("BROADCAST frame bytes follow the encoding rules") {
    // Built by hand: magic, version, kind 0x04, length 8, epoch 1, kind byte 0x01, int(55) = 00 01 37.
    const Bytes expected{0x47, 0x4B, 0x54, 0x50, 0x01, 0x04, 0x00, 0x00, 0x00, 0x08,
                         0x00, 0x00, 0x00, 0x01, 0x01, 0x00, 0x01, 0x37};
    const Bytes got = encode_frame(make_broadcast(BroadcastMessage{Nat(55), 1, BroadcastKind::initial}));
    CHECK(got == expected);
    auto back = parse_broadcast(decode_frame(got).frame);
    CHECK(back == BroadcastMessage{Nat(55), 1, BroadcastKind::initial});
}

TEST_CASE("typed payloads round trip") {
    CHECK(parse_register_req(make_register_req({"u1", Nat(28931)})).member_id == "u1");
    CHECK(parse_register_req(make_register_req({"u1", Nat(28931)})).secret == 28931);
    auto resp = parse_register_resp(make_register_resp({"u1", Nat(55837)}));
    CHECK(resp.prime == 55837);
    auto start = parse_start_req(make_start_req({{"a", "bb", "ccc"}}));
    CHECK(start.member_ids == std::vector<std::string>{"a", "bb", "ccc"});
    CHECK(parse_member_req(make_join_req({"x"})).member_id == "x");
    CHECK(parse_member_req(make_leave_req({"y"})).member_id == "y");
    auto err = parse_error(make_error({10, "already active"}));
    CHECK(err.code == 10);
    CHECK(err.message == "already active");
    auto zero = parse_broadcast(make_broadcast(BroadcastMessage{Nat(0), 7, BroadcastKind::leave}));
    CHECK(zero.value == 0);
    CHECK(zero.kind == BroadcastKind::leave);
}

TEST_CASE("payload parsing rejects junk") {
    Frame f = make_broadcast(BroadcastMessage{Nat(55), 1, BroadcastKind::initial});
    Frame extra = f;
    extra.payload.push_back(0);
    CHECK(code_of([&] { parse_broadcast(extra); }) == ErrorCode::MalformedPayload);
    Frame shortf = f;
    shortf.payload.pop_back();
    CHECK(code_of([&] { parse_broadcast(shortf); }) == ErrorCode::MalformedPayload);
    Frame badkind = f;
    badkind.payload[4] = 0x09;
    CHECK(code_of([&] { parse_broadcast(badkind); }) == ErrorCode::MalformedPayload);
    CHECK(code_of([&] { parse_broadcast(make_ack()); }) == ErrorCode::MalformedPayload);
    Frame leading_zero{kVersion, FrameKind::register_resp, {0, 1, 'a', 0, 2, 0, 5}};
    CHECK(code_of([&] { parse_register_resp(leading_zero); }) == ErrorCode::MalformedPayload);
}

TEST_CASE("decode errors") {
    Bytes good = encode_frame(make_join_req({"abc"}));
    Bytes bad_magic = good;
    bad_magic[0] = 'X';
    CHECK(code_of([&] { decode_frame(bad_magic); }) == ErrorCode::BadMagic);
    Bytes bad_version = good;
    bad_version[4] = 0x02;
    CHECK(code_of([&] { decode_frame(bad_version); }) == ErrorCode::BadVersion);
    Bytes bad_kind = good;
    bad_kind[5] = 0x09;
    CHECK(code_of([&] { decode_frame(bad_kind); }) == ErrorCode::UnknownKind);
    bad_kind[5] = 0x00;
    CHECK(code_of([&] { decode_frame(bad_kind); }) == ErrorCode::UnknownKind);
    Bytes truncated(good.begin(), good.end() - 1);
    CHECK(code_of([&] { decode_frame(truncated); }) == ErrorCode::Truncated);
    CHECK(code_of([&] { decode_frame(Bytes{0x47, 0x4B}); }) == ErrorCode::Truncated);
    CHECK(code_of([&] { decode_frame(Bytes{}); }) == ErrorCode::Truncated);
}

TEST_CASE("trailing bytes are left unconsumed") {
    Bytes a = encode_frame(make_join_req({"abc"}));
    Bytes b = encode_frame(make_ack());
    Bytes both = a;
    both.insert(both.end(), b.begin(), b.end());
    auto first = decode_frame(both);
    CHECK(first.consumed == a.size());
    CHECK(first.frame == make_join_req({"abc"}));
    auto second = decode_frame(std::span(both).subspan(first.consumed));
    CHECK(second.frame == make_ack());
    CHECK(second.consumed == b.size());
}

TEST_CASE("payload size bound") {
    Frame big{kVersion, FrameKind::ack, Bytes(1u << 24)};
    CHECK(code_of([&] { encode_frame(big); }) == ErrorCode::PayloadTooLarge);
    big.payload.pop_back();
    CHECK(encode_frame(big).size() == kHeaderSize + (1u << 24) - 1);
}

TEST_CASE("property: decode(encode(f)) == f over all kinds and sizes") {
    RandomSource rng(2718);
    for (FrameKind kind : kAllKinds) {
        for (std::size_t size : {0u, 1u, 255u, 1u << 16}) {
            Frame f{kVersion, kind, random_bytes(rng, size)};
            auto bytes = encode_frame(f);
            auto d = decode_frame(bytes);
            CHECK(d.frame == f);
            CHECK(d.consumed == bytes.size());
        }
    }
    for (int i = 0; i < 10'000; ++i) {
        Frame f{kVersion, kAllKinds[rng.below_u64(8)], random_bytes(rng, rng.below_u64(512))};
        auto bytes = encode_frame(f);
        REQUIRE(decode_frame(bytes).frame == f);
    }
}

TEST_CASE("property: broadcast payload round trip on wide integers") {
    RandomSource rng(31415);
    for (int i = 0; i < 500; ++i) {
        BroadcastMessage m{rng.bits(rng.below_u64(8000)), rng.below_u64(1u << 31),
                           static_cast<BroadcastKind>(rng.below_u64(3))};
        CHECK(parse_broadcast(decode_frame(encode_frame(make_broadcast(m))).frame) == m);
    }
}
