#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ledgerml {

// Every failure the library reports carries one of these codes. Modules throw
// `Error`; the lifecycle and contract engines convert it to a status.
enum class Errc {
  // ledger
  NotLeader,
  EmptyPayload,
  CorruptChain,
  OutOfRange,
  InvalidRecord,
  // arm
  EmptyInput,
  MissingSubset,
  TooLarge,
  InvalidParams,
  // lifecycle
  UnknownEvent,
  NoModel,
  DecodeError,
  UnknownMetric,
  NotInitialized,
  ResourceCheckFailed,
  // parallel
  OutOfMemory,
  WorkerFailure,
  BarrierTimeout,
  // streaming
  EmptyWindow,
  StreamError,
  // contracts
  WrongPhase,
  NonPositiveAmount,
  FormatRejected,
  SubmissionLimitReached,
  NoEscrow,
  NoSubmissions,
  BadWallet,
  NotWinner,
  AlreadyCollected,
  // experiment / cli
  InvalidConfig,
  ParseError,
  IoError,
  Internal,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ledgerml
