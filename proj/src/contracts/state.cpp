#include <algorithm>
#include <numeric>

#include "ledgerml/contracts.hpp"

namespace ledgerml::contracts {

namespace {

void require_phase(const ContractState& state, Phase expected, std::string_view op) {
  if (state.phase != expected) {
    throw Error(Errc::WrongPhase, std::string(op) + " requires phase " + std::string(to_string(expected)) +
                                      ", contract is " + std::string(to_string(state.phase)));
  }
}

void enter(ContractState& state, Phase next) {
  state.phase = next;
  state.phase_history.push_back(next);
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void put_artifact(ByteWriter& w, const model::ModelArtifact& a) {
  w.u8(static_cast<std::uint8_t>(a.format));
  w.u32(static_cast<std::uint32_t>(a.payload.size()));
  w.raw(a.payload);
  w.str(a.metadata.producer);
  w.i64(a.metadata.created_ms);
  w.u64(a.metadata.rule_count);
}

void put_optional_real(ByteWriter& w, const std::optional<double>& v) {
  w.u8(v ? 1 : 0);
  if (v) w.f64(*v);
}

void put_event(ByteWriter& w, const ContractEvent& event) {
  w.u8(static_cast<std::uint8_t>(event.index()));
  std::visit(Overloaded{
                 [&](const DepositEvent& e) {
                   w.str(e.giver);
                   w.u64(e.amount);
                   w.u8(e.metric ? 1 : 0);
                   if (e.metric) w.str(*e.metric);
                 },
                 [&](const SubmitEvent& e) {
                   w.str(e.participant);
                   put_artifact(w, e.artifact);
                   w.i64(e.day);
                 },
                 [&](const EvaluateEvent& e) {
                   w.u32(static_cast<std::uint32_t>(e.validation.size()));
                   for (const auto& t : e.validation) {
                     w.u64(t.patient_id);
                     w.u32(static_cast<std::uint32_t>(t.items.size()));
                     for (const auto& item : t.items) w.str(item);
                   }
                 },
                 [&](const CollectEvent& e) {
                   w.str(e.participant);
                   w.str(e.wallet.owner);
                   w.u64(e.wallet.balance);
                   w.u8(e.wallet.valid ? 1 : 0);
                   w.u32(static_cast<std::uint32_t>(e.share_with.size()));
                   for (const auto& p : e.share_with) w.str(p);
                 },
                 [&](const LifecycleNote& e) {
                   w.u8(static_cast<std::uint8_t>(e.kind));
                   w.str(e.participant);
                 },
                 [&](const UnrecognizedEvent& e) { w.str(e.type); },
             },
             event);
}

}  // namespace

std::string_view to_string(Phase phase) noexcept {
  switch (phase) {
    case Phase::Open: return "OPEN";
    case Phase::Evaluating: return "EVALUATING";
    case Phase::Settled: return "SETTLED";
  }
  return "UNKNOWN";
}

ContractState ContractState::genesis(ContractConfig config) {
  if (config.daily_limit == 0) throw Error(Errc::InvalidParams, "daily_limit must be at least 1");
  if (!model::is_known_metric(config.metric.name)) {
    throw Error(Errc::UnknownMetric, "unknown metric '" + config.metric.name + "'");
  }
  ContractState s;
  s.metric = config.metric;
  s.config = std::move(config);
  return s;
}

std::uint64_t ContractState::total_deposited() const noexcept {
  return std::accumulate(deposits.begin(), deposits.end(), std::uint64_t{0},
                         [](std::uint64_t acc, const Deposit& d) { return acc + d.amount; });
}

std::uint64_t ContractState::total_paid() const noexcept {
  return std::accumulate(payouts.begin(), payouts.end(), std::uint64_t{0},
                         [](std::uint64_t acc, const Payout& p) { return acc + p.amount; });
}

std::uint64_t ContractState::submissions_on(std::string_view participant, std::int64_t day) const noexcept {
  return static_cast<std::uint64_t>(std::count_if(submissions.begin(), submissions.end(), [&](const Submission& s) {
    return s.participant == participant && s.day == day;
  }));
}

ContractState deposit_reward(ContractState state, const std::string& giver, std::uint64_t amount,
                             const std::optional<std::string>& metric) {
  require_phase(state, Phase::Open, "deposit");
  if (amount == 0) throw Error(Errc::NonPositiveAmount, "deposit amount must be positive");
  if (metric) {
    if (!model::is_known_metric(*metric)) throw Error(Errc::UnknownMetric, "unknown metric '" + *metric + "'");
    if (state.metric_fixed && state.metric.name != *metric) {
      throw Error(Errc::InvalidParams, "evaluation metric is already fixed to '" + state.metric.name + "'");
    }
  }
  if (!state.metric_fixed) {
    if (metric) state.metric.name = *metric;
    state.metric_fixed = true;
  }
  state.reward_pool += amount;
  state.deposits.push_back(Deposit{giver, amount});
  state.event_log.emplace_back(DepositEvent{giver, amount, metric});
  return state;
}

ContractState submit_model(ContractState state, const std::string& participant, const model::ModelArtifact& artifact,
                           std::int64_t day) {
  require_phase(state, Phase::Open, "submission");
  // Fair play comes first: escrow, then the per-day rate limit.
  if (state.reward_pool == 0) throw Error(Errc::NoEscrow, "no reward has been escrowed");
  if (state.submissions_on(participant, day) >= state.config.daily_limit) {
    throw Error(Errc::SubmissionLimitReached, participant + " already submitted " +
                                                  std::to_string(state.config.daily_limit) + " models on day " +
                                                  std::to_string(day));
  }
  if (artifact.payload.empty()) throw Error(Errc::NoModel, "empty model artifact");
  std::size_t rule_count = 0;
  try {
    rule_count = model::decode_artifact(artifact).size();
  } catch (const Error& e) {
    throw Error(Errc::FormatRejected, std::string(model::to_string(artifact.format)) + " payload rejected: " + e.what());
  }
  if (rule_count == 0) throw Error(Errc::NoModel, "artifact holds no rules");

  state.submissions.push_back(Submission{participant, artifact, day, std::nullopt});
  state.event_log.emplace_back(SubmitEvent{participant, artifact, day});
  return state;
}

ContractState evaluate_and_settle(ContractState state, const std::vector<arm::ItemTransaction>& validation) {
  require_phase(state, Phase::Open, "evaluation");
  if (state.submissions.empty()) throw Error(Errc::NoSubmissions, "nothing to evaluate");
  enter(state, Phase::Evaluating);
  std::size_t best = 0;
  for (std::size_t i = 0; i < state.submissions.size(); ++i) {
    auto& sub = state.submissions[i];
    sub.score = model::evaluate_model(sub.artifact, validation, state.metric);
    if (*sub.score > *state.submissions[best].score) best = i;  // strict: earliest wins ties
  }
  state.winning_submission = best;
  state.winner = state.submissions[best].participant;
  enter(state, Phase::Settled);
  state.event_log.emplace_back(EvaluateEvent{validation});
  return state;
}

CollectResult collect_reward(ContractState state, const std::string& participant, const Wallet& wallet,
                             const std::vector<std::string>& share_with) {
  if (!wallet.valid || wallet.owner != participant) throw Error(Errc::BadWallet, "wallet is not usable");
  require_phase(state, Phase::Settled, "collection");
  if (state.winner != participant) throw Error(Errc::NotWinner, participant + " did not win");
  if (state.collected) throw Error(Errc::AlreadyCollected, "reward already collected");

  std::vector<std::string> recipients{participant};
  for (const auto& p : share_with) {
    if (std::find(recipients.begin(), recipients.end(), p) == recipients.end()) recipients.push_back(p);
  }
  const std::uint64_t share = state.reward_pool / recipients.size();
  const std::uint64_t remainder = state.reward_pool % recipients.size();

  CollectResult result;
  for (std::size_t i = 0; i < recipients.size(); ++i) {
    result.payouts.push_back(Payout{recipients[i], share + (i == 0 ? remainder : 0)});
  }
  result.wallet = wallet;
  result.wallet.balance += result.payouts.front().amount;

  state.reward_pool = 0;
  state.collected = true;
  state.payouts.insert(state.payouts.end(), result.payouts.begin(), result.payouts.end());
  state.event_log.emplace_back(CollectEvent{participant, wallet, share_with});
  result.state = std::move(state);
  return result;
}

ContractState apply_event(ContractState state, const ContractEvent& event) {
  return std::visit(
      Overloaded{
          [&](const DepositEvent& e) { return deposit_reward(std::move(state), e.giver, e.amount, e.metric); },
          [&](const SubmitEvent& e) { return submit_model(std::move(state), e.participant, e.artifact, e.day); },
          [&](const EvaluateEvent& e) { return evaluate_and_settle(std::move(state), e.validation); },
          [&](const CollectEvent& e) {
            return collect_reward(std::move(state), e.participant, e.wallet, e.share_with).state;
          },
          [&](const LifecycleNote& e) {
            state.event_log.emplace_back(e);
            return std::move(state);
          },
          [&](const UnrecognizedEvent& e) -> ContractState {
            throw Error(Errc::UnknownEvent, "unrecognized event '" + e.type + "'");
          },
      },
      event);
}

ContractState replay(const ContractConfig& config, std::span<const ContractEvent> events) {
  ContractState state = ContractState::genesis(config);
  for (const auto& e : events) state = apply_event(std::move(state), e);
  return state;
}

Bytes encode_event(const ContractEvent& event) {
  ByteWriter w;
  put_event(w, event);
  return std::move(w).take();
}

Bytes encode_state(const ContractState& s) {
  ByteWriter w;
  w.u64(s.config.daily_limit);
  w.str(s.config.metric.name);
  w.str(s.metric.name);
  w.u8(s.metric_fixed ? 1 : 0);
  w.u8(static_cast<std::uint8_t>(s.phase));
  w.u32(static_cast<std::uint32_t>(s.phase_history.size()));
  for (auto p : s.phase_history) w.u8(static_cast<std::uint8_t>(p));
  w.u64(s.reward_pool);
  w.u32(static_cast<std::uint32_t>(s.deposits.size()));
  for (const auto& d : s.deposits) {
    w.str(d.giver);
    w.u64(d.amount);
  }
  w.u32(static_cast<std::uint32_t>(s.submissions.size()));
  for (const auto& sub : s.submissions) {
    w.str(sub.participant);
    put_artifact(w, sub.artifact);
    w.i64(sub.day);
    put_optional_real(w, sub.score);
  }
  w.u8(s.winning_submission ? 1 : 0);
  if (s.winning_submission) w.u64(*s.winning_submission);
  w.u8(s.winner ? 1 : 0);
  if (s.winner) w.str(*s.winner);
  w.u32(static_cast<std::uint32_t>(s.payouts.size()));
  for (const auto& p : s.payouts) {
    w.str(p.recipient);
    w.u64(p.amount);
  }
  w.u8(s.collected ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(s.event_log.size()));
  for (const auto& e : s.event_log) put_event(w, e);
  return std::move(w).take();
}

ContractRun contract_main(ContractState state, std::span<const ContractEvent> events) {
  ContractRun run{std::move(state), std::nullopt, false};
  std::size_t i = 0;

  auto apply = [&](std::size_t index, const ContractEvent& e) {
    try {
      run.state = apply_event(run.state, e);  // copy: a failed event leaves the state untouched
      return true;
    } catch (const Error& err) {
      run.error = EventError{index, err.code(), err.what()};
    } catch (const std::exception& err) {
      run.error = EventError{index, Errc::Internal, err.what()};
    }
    return false;
  };

  // Fair-play preamble: escrow the reward before anything else is accepted.
  for (; i < events.size() && std::holds_alternative<DepositEvent>(events[i]); ++i) {
    if (!apply(i, events[i])) return run;
  }

  std::vector<std::size_t> claims;
  for (; i < events.size(); ++i) {
    const auto& e = events[i];
    if (std::holds_alternative<UnrecognizedEvent>(e)) {
      run.halted_on_unknown = true;
      break;
    }
    if (std::holds_alternative<CollectEvent>(e)) {
      claims.push_back(i);
      continue;
    }
    if (!apply(i, e)) return run;
  }

  // Reward contract.
  for (auto index : claims) {
    if (!apply(index, events[index])) return run;
  }
  return run;
}

}  // namespace ledgerml::contracts
