#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ledgerml/arm.hpp"
#include "ledgerml/bytes.hpp"
#include "ledgerml/error.hpp"
#include "ledgerml/lifecycle.hpp"
#include "ledgerml/model.hpp"

namespace ledgerml::contracts {

enum class Phase : std::uint8_t { Open, Evaluating, Settled };

std::string_view to_string(Phase phase) noexcept;

struct Wallet {
  std::string owner;
  std::uint64_t balance = 0;
  bool valid = true;

  friend bool operator==(const Wallet&, const Wallet&) = default;
};

struct Deposit {
  std::string giver;
  std::uint64_t amount = 0;

  friend bool operator==(const Deposit&, const Deposit&) = default;
};

struct Submission {
  std::string participant;
  model::ModelArtifact artifact;
  std::int64_t day = 0;
  std::optional<double> score;

  friend bool operator==(const Submission&, const Submission&) = default;
};

struct Payout {
  std::string recipient;
  std::uint64_t amount = 0;

  friend bool operator==(const Payout&, const Payout&) = default;
};

// ---------------------------------------------------------------------------
// Events

struct DepositEvent {
  std::string giver;
  std::uint64_t amount = 0;
  /// Fixes the evaluation metric; only the first deposit may set it.
  std::optional<std::string> metric;
  friend bool operator==(const DepositEvent&, const DepositEvent&) = default;
};

struct SubmitEvent {
  std::string participant;
  model::ModelArtifact artifact;
  std::int64_t day = 0;
  friend bool operator==(const SubmitEvent&, const SubmitEvent&) = default;
};

struct EvaluateEvent {
  std::vector<arm::ItemTransaction> validation;
  friend bool operator==(const EvaluateEvent&, const EvaluateEvent&) = default;
};

struct CollectEvent {
  std::string participant;
  Wallet wallet;
  std::vector<std::string> share_with;
  friend bool operator==(const CollectEvent&, const CollectEvent&) = default;
};

/// Lifecycle steps that run off-contract (initialization, training, ...);
/// the contract only records them.
struct LifecycleNote {
  lifecycle::EventKind kind = lifecycle::EventKind::ModelInitialization;
  std::string participant;
  friend bool operator==(const LifecycleNote&, const LifecycleNote&) = default;
};

/// An event type the contract does not recognise. Never applied.
struct UnrecognizedEvent {
  std::string type;
  friend bool operator==(const UnrecognizedEvent&, const UnrecognizedEvent&) = default;
};

using ContractEvent =
    std::variant<DepositEvent, SubmitEvent, EvaluateEvent, CollectEvent, LifecycleNote, UnrecognizedEvent>;

// ---------------------------------------------------------------------------
// State

struct ContractConfig {
  std::uint64_t daily_limit = 5;
  model::MetricSpec metric;

  friend bool operator==(const ContractConfig&, const ContractConfig&) = default;
};

struct ContractState {
  ContractConfig config;
  model::MetricSpec metric;  // fixed by the first deposit
  bool metric_fixed = false;
  Phase phase = Phase::Open;
  std::vector<Phase> phase_history{Phase::Open};
  std::uint64_t reward_pool = 0;
  std::vector<Deposit> deposits;
  std::vector<Submission> submissions;
  std::optional<std::size_t> winning_submission;
  std::optional<std::string> winner;
  std::vector<Payout> payouts;
  bool collected = false;
  std::vector<ContractEvent> event_log;

  static ContractState genesis(ContractConfig config = {});

  [[nodiscard]] std::uint64_t total_deposited() const noexcept;
  [[nodiscard]] std::uint64_t total_paid() const noexcept;
  /// Submissions by `participant` on `day`.
  [[nodiscard]] std::uint64_t submissions_on(std::string_view participant, std::int64_t day) const noexcept;

  friend bool operator==(const ContractState&, const ContractState&) = default;
};

// Each operation takes the state by value and returns the successor with the
// event appended to event_log. On error the input is left as it was and Error
// is thrown.

/// Errors: WrongPhase, NonPositiveAmount, UnknownMetric, InvalidParams (metric already fixed).
ContractState deposit_reward(ContractState state, const std::string& giver, std::uint64_t amount,
                             const std::optional<std::string>& metric = std::nullopt);

/// Errors: WrongPhase, NoEscrow, SubmissionLimitReached, NoModel, FormatRejected.
ContractState submit_model(ContractState state, const std::string& participant, const model::ModelArtifact& artifact,
                           std::int64_t day);

/// Scores every submission with the contract's metric; the highest score wins,
/// ties go to the earliest submission. Errors: WrongPhase, NoSubmissions.
ContractState evaluate_and_settle(ContractState state, const std::vector<arm::ItemTransaction>& validation);

struct CollectResult {
  ContractState state;
  std::vector<Payout> payouts;
  Wallet wallet;  // the winner's wallet after payment
};

/// Pays the whole pool to the winner, or splits it equally with the
/// co-recipients, remainder to the winner. Errors: BadWallet, WrongPhase,
/// NotWinner, AlreadyCollected.
CollectResult collect_reward(ContractState state, const std::string& participant, const Wallet& wallet,
                             const std::vector<std::string>& share_with = {});

/// Applies one event. LifecycleNote only extends the log; UnrecognizedEvent
/// throws UnknownEvent.
ContractState apply_event(ContractState state, const ContractEvent& event);

/// Folds `events` over the genesis state for `config`.
ContractState replay(const ContractConfig& config, std::span<const ContractEvent> events);

/// Canonical byte string of the full state (event log included). Two replicas
/// agree iff their encodings are equal.
Bytes encode_state(const ContractState& state);
Bytes encode_event(const ContractEvent& event);

struct EventError {
  std::size_t index = 0;  // position in the input stream
  Errc code = Errc::Internal;
  std::string message;
};

struct ContractRun {
  ContractState state;
  std::optional<EventError> error;
  bool halted_on_unknown = false;
};

/// Main contract loop: the fair-play preamble applies the leading deposits,
/// the event loop applies submissions, evaluations and lifecycle notes (an
/// unrecognized event breaks the loop), and the reward contract runs the
/// collected claims once the stream ends. The first failing event halts
/// everything and is reported.
ContractRun contract_main(ContractState state, std::span<const ContractEvent> events);

// ---------------------------------------------------------------------------
// JSON

nlohmann::json event_to_json(const ContractEvent& event);
/// Throws ParseError on malformed input; unknown types become UnrecognizedEvent.
ContractEvent event_from_json(const nlohmann::json& j);

void write_event_log(std::ostream& out, std::span<const ContractEvent> events);
std::vector<ContractEvent> read_event_log(std::istream& in);

struct Scenario {
  ContractConfig config;
  std::vector<ContractEvent> events;
};

/// Either a JSON array of events, or an object with optional `daily_limit`,
/// `metric`, and an `events` array.
Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);
/// Object form, readable by parse_scenario.
nlohmann::json scenario_to_json(const Scenario& scenario);

/// Human-readable summary; `state_sha256` digests the canonical encoding.
nlohmann::ordered_json state_summary(const ContractState& state);

}  // namespace ledgerml::contracts
