#include "gkt/wire.hpp"

#include <algorithm>
#include <array>

namespace gkt::wire {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'G', 'K', 'T', 'P'};

void expect_kind(const Frame& frame, FrameKind kind) {
    if (frame.kind != kind) {
        throw Error(ErrorCode::MalformedPayload,
                    "frame kind " + std::to_string(static_cast<int>(frame.kind)) + " where " +
                        std::to_string(static_cast<int>(kind)) + " expected");
    }
}

std::uint8_t kind_byte(BroadcastKind kind) {
    switch (kind) {
        case BroadcastKind::initial: return 0x01;
        case BroadcastKind::join: return 0x02;
        case BroadcastKind::leave: return 0x03;
    }
    return 0;
}

BroadcastKind kind_from_byte(std::uint8_t b) {
    switch (b) {
        case 0x01: return BroadcastKind::initial;
        case 0x02: return BroadcastKind::join;
        case 0x03: return BroadcastKind::leave;
        default: throw Error(ErrorCode::MalformedPayload, "unknown broadcast kind byte " + std::to_string(b));
    }
}

Frame frame_of(FrameKind kind, std::vector<std::uint8_t> payload) {
    return Frame{kVersion, kind, std::move(payload)};
}

}  // namespace

bool is_known_kind(std::uint8_t raw) { return raw >= 0x01 && raw <= 0x08; }

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
    if (frame.version != kVersion) {
        throw Error(ErrorCode::BadVersion, "version " + std::to_string(frame.version));
    }
    const auto raw_kind = static_cast<std::uint8_t>(frame.kind);
    if (!is_known_kind(raw_kind)) throw Error(ErrorCode::UnknownKind, "kind " + std::to_string(raw_kind));
    if (frame.payload.size() > kMaxPayload) {
        throw Error(ErrorCode::PayloadTooLarge, std::to_string(frame.payload.size()) + " payload bytes");
    }
    const auto len = static_cast<std::uint32_t>(frame.payload.size());
    std::vector<std::uint8_t> out(kHeaderSize + len);
    std::copy(kMagic.begin(), kMagic.end(), out.begin());
    out[4] = frame.version;
    out[5] = raw_kind;
    out[6] = static_cast<std::uint8_t>(len >> 24);
    out[7] = static_cast<std::uint8_t>(len >> 16);
    out[8] = static_cast<std::uint8_t>(len >> 8);
    out[9] = static_cast<std::uint8_t>(len);
    std::copy(frame.payload.begin(), frame.payload.end(), out.begin() + kHeaderSize);
    return out;
}

Decoded decode_frame(std::span<const std::uint8_t> bytes) {
    const std::size_t magic_seen = std::min(bytes.size(), kMagic.size());
    if (!std::equal(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(magic_seen), kMagic.begin())) {
        throw Error(ErrorCode::BadMagic, "frame does not start with GKTP");
    }
    if (bytes.size() < kHeaderSize) {
        throw Error(ErrorCode::Truncated, "header needs " + std::to_string(kHeaderSize) + " bytes, have " +
                                              std::to_string(bytes.size()));
    }
    if (bytes[4] != kVersion) throw Error(ErrorCode::BadVersion, "version " + std::to_string(bytes[4]));
    if (!is_known_kind(bytes[5])) throw Error(ErrorCode::UnknownKind, "kind " + std::to_string(bytes[5]));
    const std::uint32_t len = (std::uint32_t{bytes[6]} << 24) | (std::uint32_t{bytes[7]} << 16) |
                              (std::uint32_t{bytes[8]} << 8) | std::uint32_t{bytes[9]};
    if (len > kMaxPayload) throw Error(ErrorCode::PayloadTooLarge, "declared length " + std::to_string(len));
    if (bytes.size() - kHeaderSize < len) {
        throw Error(ErrorCode::Truncated, "declared " + std::to_string(len) + " payload bytes, have " +
                                              std::to_string(bytes.size() - kHeaderSize));
    }
    Decoded out;
    out.frame.version = bytes[4];
    out.frame.kind = static_cast<FrameKind>(bytes[5]);
    out.frame.payload.assign(bytes.begin() + kHeaderSize, bytes.begin() + kHeaderSize + len);
    out.consumed = kHeaderSize + len;
    return out;
}

// ------------------------------------------------------------ payload codec

PayloadWriter& PayloadWriter::u8(std::uint8_t v) {
    bytes_.push_back(v);
    return *this;
}

PayloadWriter& PayloadWriter::u16(std::uint16_t v) {
    bytes_.push_back(static_cast<std::uint8_t>(v >> 8));
    bytes_.push_back(static_cast<std::uint8_t>(v));
    return *this;
}

PayloadWriter& PayloadWriter::u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) bytes_.push_back(static_cast<std::uint8_t>(v >> shift));
    return *this;
}

PayloadWriter& PayloadWriter::nat(const Nat& v) {
    const auto mag = to_bytes(v);
    if (mag.size() > 0xffff) throw Error(ErrorCode::PayloadTooLarge, "integer wider than 65535 bytes");
    u16(static_cast<std::uint16_t>(mag.size()));
    bytes_.insert(bytes_.end(), mag.begin(), mag.end());
    return *this;
}

PayloadWriter& PayloadWriter::str(std::string_view v) {
    if (v.size() > 0xffff) throw Error(ErrorCode::PayloadTooLarge, "string longer than 65535 bytes");
    u16(static_cast<std::uint16_t>(v.size()));
    bytes_.insert(bytes_.end(), v.begin(), v.end());
    return *this;
}

std::span<const std::uint8_t> PayloadReader::need(std::size_t n) {
    if (bytes_.size() - pos_ < n) {
        throw Error(ErrorCode::MalformedPayload, "payload ends " + std::to_string(n - (bytes_.size() - pos_)) +
                                                     " bytes early");
    }
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
}

std::uint8_t PayloadReader::u8() { return need(1)[0]; }

std::uint16_t PayloadReader::u16() {
    auto b = need(2);
    return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
}

std::uint32_t PayloadReader::u32() {
    auto b = need(4);
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

Nat PayloadReader::nat() {
    const std::uint16_t len = u16();
    auto mag = need(len);
    if (!mag.empty() && mag[0] == 0) throw Error(ErrorCode::MalformedPayload, "integer has a leading zero byte");
    return from_bytes(mag);
}

std::string PayloadReader::str() {
    const std::uint16_t len = u16();
    auto b = need(len);
    return std::string(b.begin(), b.end());
}

void PayloadReader::finish() const {
    if (pos_ != bytes_.size()) {
        throw Error(ErrorCode::MalformedPayload, std::to_string(bytes_.size() - pos_) + " trailing payload bytes");
    }
}

// ---------------------------------------------------------- typed payloads

Frame make_register_req(const RegisterRequest& req) {
    return frame_of(FrameKind::register_req, PayloadWriter().str(req.member_id).nat(req.secret).take());
}

Frame make_register_resp(const RegisterResponse& resp) {
    return frame_of(FrameKind::register_resp, PayloadWriter().str(resp.member_id).nat(resp.prime).take());
}

Frame make_start_req(const StartRequest& req) {
    if (req.member_ids.size() > 0xffff) throw Error(ErrorCode::PayloadTooLarge, "too many member ids");
    PayloadWriter w;
    w.u16(static_cast<std::uint16_t>(req.member_ids.size()));
    for (const auto& id : req.member_ids) w.str(id);
    return frame_of(FrameKind::start_req, w.take());
}

Frame make_broadcast(const BroadcastMessage& message) {
    if (message.epoch > 0xffffffffULL) throw Error(ErrorCode::PayloadTooLarge, "epoch exceeds 32 bits");
    return frame_of(FrameKind::broadcast, PayloadWriter()
                                              .u32(static_cast<std::uint32_t>(message.epoch))
                                              .u8(kind_byte(message.kind))
                                              .nat(message.value)
                                              .take());
}

Frame make_join_req(const MemberRequest& req) {
    return frame_of(FrameKind::join_req, PayloadWriter().str(req.member_id).take());
}

Frame make_leave_req(const MemberRequest& req) {
    return frame_of(FrameKind::leave_req, PayloadWriter().str(req.member_id).take());
}

Frame make_error(const ErrorReply& reply) {
    return frame_of(FrameKind::error, PayloadWriter().u16(reply.code).str(reply.message).take());
}

Frame make_ack() { return frame_of(FrameKind::ack, {}); }

RegisterRequest parse_register_req(const Frame& frame) {
    expect_kind(frame, FrameKind::register_req);
    PayloadReader r(frame.payload);
    RegisterRequest out{r.str(), r.nat()};
    r.finish();
    return out;
}

RegisterResponse parse_register_resp(const Frame& frame) {
    expect_kind(frame, FrameKind::register_resp);
    PayloadReader r(frame.payload);
    RegisterResponse out{r.str(), r.nat()};
    r.finish();
    return out;
}

StartRequest parse_start_req(const Frame& frame) {
    expect_kind(frame, FrameKind::start_req);
    PayloadReader r(frame.payload);
    StartRequest out;
    const std::uint16_t count = r.u16();
    for (std::uint16_t i = 0; i < count; ++i) out.member_ids.push_back(r.str());
    r.finish();
    return out;
}

BroadcastMessage parse_broadcast(const Frame& frame) {
    expect_kind(frame, FrameKind::broadcast);
    PayloadReader r(frame.payload);
    BroadcastMessage out;
    out.epoch = r.u32();
    out.kind = kind_from_byte(r.u8());
    out.value = r.nat();
    r.finish();
    return out;
}

MemberRequest parse_member_req(const Frame& frame) {
    if (frame.kind != FrameKind::join_req && frame.kind != FrameKind::leave_req) {
        expect_kind(frame, FrameKind::join_req);
    }
    PayloadReader r(frame.payload);
    MemberRequest out{r.str()};
    r.finish();
    return out;
}

ErrorReply parse_error(const Frame& frame) {
    expect_kind(frame, FrameKind::error);
    PayloadReader r(frame.payload);
    ErrorReply out;
    out.code = r.u16();
    out.message = r.str();
    r.finish();
    return out;
}

}  // namespace gkt::wire
