#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gkt/core_protocol.hpp"
#include "gkt/error.hpp"

namespace gkt::wire {

inline constexpr std::uint8_t kVersion = 0x01;
inline constexpr std::size_t kHeaderSize = 10;  // magic(4) version(1) kind(1) length(4)
inline constexpr std::uint32_t kMaxPayload = (1u << 24) - 1;

enum class FrameKind : std::uint8_t {
    register_req = 0x01,
    register_resp = 0x02,
    start_req = 0x03,
    broadcast = 0x04,
    join_req = 0x05,
    leave_req = 0x06,
    error = 0x07,
    ack = 0x08,
};

bool is_known_kind(std::uint8_t raw);

struct Frame {
    std::uint8_t version = kVersion;
    FrameKind kind = FrameKind::ack;
    std::vector<std::uint8_t> payload;

    friend bool operator==(const Frame&, const Frame&) = default;
};

/// "GKTP" || version || kind || u32be(len) || payload.
/// Throws PayloadTooLarge at 2^24 bytes or more, UnknownKind, BadVersion.
std::vector<std::uint8_t> encode_frame(const Frame& frame);

struct Decoded {
    Frame frame;
    std::size_t consumed = 0;  // bytes belonging to this frame; the rest is untouched
};

/// Throws BadMagic, BadVersion, Truncated, UnknownKind, PayloadTooLarge.
Decoded decode_frame(std::span<const std::uint8_t> bytes);

/// Builds payloads: integers as u16be length + big-endian magnitude,
/// strings as u16be length + bytes.
class PayloadWriter {
public:
    PayloadWriter& u8(std::uint8_t v);
    PayloadWriter& u16(std::uint16_t v);
    PayloadWriter& u32(std::uint32_t v);
    PayloadWriter& nat(const Nat& v);
    PayloadWriter& str(std::string_view v);

    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

/// Throws MalformedPayload on short reads or leftover bytes at finish().
class PayloadReader {
public:
    explicit PayloadReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    Nat nat();
    std::string str();
    void finish() const;

private:
    std::span<const std::uint8_t> need(std::size_t n);

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

// Typed payloads for each frame kind.

struct RegisterRequest {
    std::string member_id;
    Nat secret;
};
struct RegisterResponse {
    std::string member_id;
    Nat prime;
};
struct StartRequest {
    std::vector<std::string> member_ids;
};
struct MemberRequest {  // JOIN_REQ and LEAVE_REQ
    std::string member_id;
};
struct ErrorReply {
    std::uint16_t code = 0;
    std::string message;
};

Frame make_register_req(const RegisterRequest& req);
Frame make_register_resp(const RegisterResponse& resp);
Frame make_start_req(const StartRequest& req);
/// epoch as u32be, kind byte (0x01 initial, 0x02 join, 0x03 leave), then M.
Frame make_broadcast(const BroadcastMessage& message);
Frame make_join_req(const MemberRequest& req);
Frame make_leave_req(const MemberRequest& req);
Frame make_error(const ErrorReply& reply);
Frame make_ack();

RegisterRequest parse_register_req(const Frame& frame);
RegisterResponse parse_register_resp(const Frame& frame);
StartRequest parse_start_req(const Frame& frame);
BroadcastMessage parse_broadcast(const Frame& frame);
MemberRequest parse_member_req(const Frame& frame);
ErrorReply parse_error(const Frame& frame);

/// Socket-level failure (connect, read, write, unexpected close). Distinct
/// from gkt::Error, which carries protocol errors including ERROR frames.
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gkt::wire
