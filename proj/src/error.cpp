#include "gkt/error.hpp"

namespace gkt {

std::string_view error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidShare: return "InvalidShare";
        case ErrorCode::KeyTooLarge: return "KeyTooLarge";
        case ErrorCode::EmptyGroup: return "EmptyGroup";
        case ErrorCode::NoValidKey: return "NoValidKey";
        case ErrorCode::Exhausted: return "Exhausted";
        case ErrorCode::DuplicateMember: return "DuplicateMember";
        case ErrorCode::InvalidSecret: return "InvalidSecret";
        case ErrorCode::UnknownMember: return "UnknownMember";
        case ErrorCode::MemberActive: return "MemberActive";
        case ErrorCode::AlreadyActive: return "AlreadyActive";
        case ErrorCode::NotActive: return "NotActive";
        case ErrorCode::LastMember: return "LastMember";
        case ErrorCode::MemberDeparted: return "MemberDeparted";
        case ErrorCode::NoSession: return "NoSession";
        case ErrorCode::SessionActive: return "SessionActive";
        case ErrorCode::MalformedRecord: return "MalformedRecord";
        case ErrorCode::StaleEpoch: return "StaleEpoch";
        case ErrorCode::ScenarioInvalid: return "ScenarioInvalid";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::BadVersion: return "BadVersion";
        case ErrorCode::Truncated: return "Truncated";
        case ErrorCode::UnknownKind: return "UnknownKind";
        case ErrorCode::PayloadTooLarge: return "PayloadTooLarge";
        case ErrorCode::MalformedPayload: return "MalformedPayload";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

}  // namespace gkt
