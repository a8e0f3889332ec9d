#include "ledgerml/error.hpp"

namespace ledgerml {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::NotLeader: return "NotLeader";
    case Errc::EmptyPayload: return "EmptyPayload";
    case Errc::CorruptChain: return "CorruptChain";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::InvalidRecord: return "InvalidRecord";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::MissingSubset: return "MissingSubset";
    case Errc::TooLarge: return "TooLarge";
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::UnknownEvent: return "UnknownEvent";
    case Errc::NoModel: return "NoModel";
    case Errc::DecodeError: return "DecodeError";
    case Errc::UnknownMetric: return "UnknownMetric";
    case Errc::NotInitialized: return "NotInitialized";
    case Errc::ResourceCheckFailed: return "ResourceCheckFailed";
    case Errc::OutOfMemory: return "OutOfMemory";
    case Errc::WorkerFailure: return "WorkerFailure";
    case Errc::BarrierTimeout: return "BarrierTimeout";
    case Errc::EmptyWindow: return "EmptyWindow";
    case Errc::StreamError: return "StreamError";
    case Errc::WrongPhase: return "WrongPhase";
    case Errc::NonPositiveAmount: return "NonPositiveAmount";
    case Errc::FormatRejected: return "FormatRejected";
    case Errc::SubmissionLimitReached: return "SubmissionLimitReached";
    case Errc::NoEscrow: return "NoEscrow";
    case Errc::NoSubmissions: return "NoSubmissions";
    case Errc::BadWallet: return "BadWallet";
    case Errc::NotWinner: return "NotWinner";
    case Errc::AlreadyCollected: return "AlreadyCollected";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
    case Errc::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace ledgerml
