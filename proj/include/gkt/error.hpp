#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gkt {

// Numeric values travel on the wire inside ERROR frames; never renumber.
enum class ErrorCode : std::uint16_t {
    InvalidShare = 1,
    KeyTooLarge = 2,
    EmptyGroup = 3,
    NoValidKey = 4,
    Exhausted = 5,
    DuplicateMember = 6,
    InvalidSecret = 7,
    UnknownMember = 8,
    MemberActive = 9,
    AlreadyActive = 10,
    NotActive = 11,
    LastMember = 12,
    MemberDeparted = 13,
    NoSession = 14,
    SessionActive = 15,
    MalformedRecord = 16,
    StaleEpoch = 17,
    ScenarioInvalid = 18,
    TooLarge = 19,
    BadMagic = 20,
    BadVersion = 21,
    Truncated = 22,
    UnknownKind = 23,
    PayloadTooLarge = 24,
    MalformedPayload = 25,
    InvalidArgument = 26,
};

std::string_view error_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace gkt
