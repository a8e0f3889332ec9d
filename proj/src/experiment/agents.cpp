#include "ledgerml/error.hpp"
#include "ledgerml/experiment.hpp"
#include "ledgerml/lifecycle.hpp"
#include "ledgerml/parallel.hpp"

namespace ledgerml::experiment {

contracts::Scenario simulate_agents(const ExperimentConfig& config, const AgentConfig& agents) {
  config.validate();
  if (agents.n_participants == 0 || agents.attempts == 0 || agents.reward == 0) {
    throw Error(Errc::InvalidConfig, "agents need participants, attempts and a reward");
  }
  const auto txns = arm::group_transactions(generate_synthetic(config));
  std::vector<arm::ItemTransaction> training, validation;
  for (const auto& t : txns) {
    (lifecycle::in_validation_split(t.patient_id, agents.validation_fraction, agents.split_seed) ? validation
                                                                                                 : training)
        .push_back(t);
  }
  if (training.empty() || validation.empty()) throw Error(Errc::InvalidConfig, "split left no training or validation data");

  contracts::Scenario scenario;
  scenario.config.metric.name = "mean_confidence";
  scenario.events.push_back(contracts::DepositEvent{"data-owner", agents.reward, scenario.config.metric.name});

  const auto shards = parallel::partition_contiguous(training, agents.n_participants);
  for (std::size_t a = 0; a < agents.n_participants; ++a) {
    const std::string name = "agent-" + std::to_string(a + 1);
    const auto shard = shards[a];
    if (shard.empty()) continue;
    std::optional<double> best;
    for (std::size_t k = 0; k < agents.attempts; ++k) {
      arm::MiningParams p = config.params;
      p.min_confidence = std::min(1.0, p.min_confidence + static_cast<double>(k) * agents.confidence_step);
      scenario.events.push_back(contracts::LifecycleNote{lifecycle::EventKind::ModelTraining, name});
      const auto rules = arm::mine_rules(shard, p);
      if (rules.empty()) continue;
      const double local = model::evaluate_rules(rules, shard);
      if (best && local <= *best) continue;
      best = local;
      scenario.events.push_back(contracts::SubmitEvent{
          name, model::serialize_model(rules, config.format, name, config.clock_start_ms),
          static_cast<std::int64_t>(k / scenario.config.daily_limit)});
    }
  }
  scenario.events.push_back(contracts::EvaluateEvent{validation});

  // The winner is only known once the contract has scored everything.
  const auto run = contracts::contract_main(contracts::ContractState::genesis(scenario.config), scenario.events);
  if (run.error) throw Error(run.error->code, "simulation failed: " + run.error->message);
  if (run.state.winner) {
    const auto& w = *run.state.winner;
    scenario.events.push_back(contracts::CollectEvent{w, contracts::Wallet{w, 0, true}, agents.share_with});
  }
  return scenario;
}

}  // namespace ledgerml::experiment
