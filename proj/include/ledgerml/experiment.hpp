#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ledgerml/arm.hpp"
#include "ledgerml/contracts.hpp"
#include "ledgerml/ledger.hpp"
#include "ledgerml/model.hpp"

namespace ledgerml::experiment {

enum class ExecutionMode { Single, Smp, Mpp, Streaming };

std::string_view to_string(ExecutionMode mode) noexcept;
std::optional<ExecutionMode> parse_mode(std::string_view name) noexcept;

/// Co-prescription weighting for the synthetic generator. Each bundle is
/// offered to every patient with its probability and is taken whole if the
/// patient still has room for all of its new drugs; the remaining slots are
/// filled by weighted sampling without replacement over the catalog.
struct CorrelationProfile {
  struct Bundle {
    std::vector<std::string> drugs;
    double probability = 0.0;
  };
  std::vector<Bundle> bundles;
  /// Per catalog entry; empty means uniform.
  std::vector<double> base_weights;

  /// Bundles tuned so a default run clears the support and confidence thresholds.
  static CorrelationProfile shipped();
  static CorrelationProfile uniform() { return {}; }
};

/// 13 opioid names padded with the labelled
/// placeholders `placeholdera` .. `placeholderg` to 20 entries.
std::vector<std::string> default_catalog();

struct ExperimentConfig {
  std::size_t n_patients = 1001;
  std::size_t drugs_per_patient = 7;
  std::vector<std::string> catalog = default_catalog();
  std::uint64_t seed = 20190101;
  arm::MiningParams params;  // 0.20 / 0.70 / 3
  ExecutionMode mode = ExecutionMode::Single;
  std::size_t n_threads = 4;
  std::size_t n_workers = 3;
  std::size_t window_capacity = 1001;
  /// Streaming mode: run a continuous query every this many transactions (0 = only at the end).
  std::size_t query_every = 0;
  std::chrono::milliseconds barrier_timeout{30'000};
  CorrelationProfile profile = CorrelationProfile::shipped();
  /// 0 = one block per patient transaction; otherwise a fixed record count per block.
  std::size_t records_per_block = 0;
  std::vector<std::string> members{"Pharmacy-A", "Pharmacy-B", "Pharmacy-C"};
  bool wall_clock = false;
  std::int64_t clock_start_ms = 1546300800000;  // 2019-01-01T00:00:00Z
  std::int64_t clock_step_ms = 1000;
  model::ArtifactFormat format = model::ArtifactFormat::RulesetText;

  /// Throws InvalidConfig.
  void validate() const;
};

/// Applies one `key = value` setting. Throws InvalidConfig for unknown keys or bad values.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Key-value text: one `key = value` per line, `#` starts a comment.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// n_patients * drugs_per_patient records, fully determined by the seed.
std::vector<ledger::Record> generate_synthetic(const ExperimentConfig& config);

/// Loads records into a fresh member network (first member leads) and returns
/// the leader's chain. Throws if the followers diverge.
ledger::Chain load_ledger(std::span<const ledger::Record> records, const ExperimentConfig& config);

struct MiningOutcome {
  std::vector<arm::AssociationRule> rules;
  std::uint64_t n_transactions = 0;
  std::optional<model::ModelArtifact> artifact;
  std::optional<std::filesystem::path> artifact_path;
};

/// Validates the chain, then mines it in the configured mode: at-rest reads
/// for single/smp/mpp, a subscription into a sliding window for streaming.
/// When `artifact_stem` is set the model is serialized there.
MiningOutcome mine_chain(const ledger::Chain& chain, const ExperimentConfig& config,
                         const std::optional<std::filesystem::path>& artifact_stem = std::nullopt,
                         std::ostream* query_ticks = nullptr);

struct ExperimentResult {
  std::vector<ledger::Record> records;
  ledger::Chain chain;
  MiningOutcome mining;
  std::string rule_csv;
  nlohmann::ordered_json summary;
};

/// generate -> load into the ledger -> validate -> read -> mine -> write.
/// Writes records.csv, chain.jsonl, rules.csv, model artifacts and summary.json
/// into `out_dir` when given.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::optional<std::filesystem::path>& out_dir = std::nullopt);

struct ScenarioReport {
  contracts::ContractRun run;
  int exit_code = 0;
  nlohmann::ordered_json report;
};

/// Replays the scenario through the contract main loop. Exit code 0 iff no
/// event errored.
ScenarioReport run_contract_scenario(const contracts::Scenario& scenario);

/// Participant-side behaviour for contract runs: each agent mines its own
/// shard, retries with stricter confidence, and submits only when its local
/// score improves.
struct AgentConfig {
  std::size_t n_participants = 3;
  std::size_t attempts = 3;
  std::uint64_t reward = 100;
  double validation_fraction = 0.3;
  std::uint64_t split_seed = 7;
  double confidence_step = 0.05;
  std::vector<std::string> share_with;
};

/// Builds a full scenario (deposit, training notes, submissions, evaluation on
/// the held-out patients, and the winner's claim) from synthetic data.
contracts::Scenario simulate_agents(const ExperimentConfig& config, const AgentConfig& agents);

/// Exit code for a library error (1 is reserved for generic failures).
int exit_code_for(Errc code) noexcept;

}  // namespace ledgerml::experiment
