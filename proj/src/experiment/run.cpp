#include <fstream>
#include <sstream>

#include "ledgerml/error.hpp"
#include "ledgerml/experiment.hpp"
#include "ledgerml/lifecycle.hpp"
#include "ledgerml/parallel.hpp"
#include "ledgerml/streaming.hpp"

namespace ledgerml::experiment {

namespace {

void check(const lifecycle::Status& status) {
  if (!status.is_ok()) throw Error(*status.error, status.message);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << text;
}

std::vector<std::vector<ledger::Record>> batch_records(std::span<const ledger::Record> records,
                                                       std::size_t records_per_block) {
  std::vector<std::vector<ledger::Record>> batches;
  for (const auto& r : records) {
    const bool start_new =
        batches.empty() || (records_per_block == 0 ? batches.back().back().patient_id != r.patient_id
                                                   : batches.back().size() >= records_per_block);
    if (start_new) batches.emplace_back();
    batches.back().push_back(r);
  }
  return batches;
}

}  // namespace

ledger::Chain load_ledger(std::span<const ledger::Record> records, const ExperimentConfig& config) {
  std::shared_ptr<ledger::Clock> clock;
  if (config.wall_clock) {
    clock = std::make_shared<ledger::SystemClock>();
  } else {
    clock = std::make_shared<ledger::ManualClock>(config.clock_start_ms, config.clock_step_ms);
  }
  ledger::Network network(config.members, clock);
  for (auto& batch : batch_records(records, config.records_per_block)) {
    network.append_block(network.leader().node_id, std::move(batch));
  }
  if (!network.converged()) throw Error(Errc::CorruptChain, "member chains diverged after loading");
  return network.leader().chain->snapshot();
}

MiningOutcome mine_chain(const ledger::Chain& chain, const ExperimentConfig& config,
                         const std::optional<std::filesystem::path>& artifact_stem, std::ostream* query_ticks) {
  config.validate();
  MiningOutcome out;
  const auto created_ms = config.wall_clock ? ledger::SystemClock().now_ms() : config.clock_start_ms;

  if (config.mode == ExecutionMode::Streaming) {
    if (!ledger::validate_chain(chain)) throw Error(Errc::CorruptChain, "chain failed validation");
    auto store = std::make_shared<ledger::ChainStore>(chain);
    store->seal();
    streaming::LedgerSource source(store->subscribe(0), std::chrono::milliseconds(0));
    streaming::SlidingWindow window(config.window_capacity);
    if (query_ticks) streaming::write_query_header(*query_ticks);
    arm::ItemTransaction txn;
    std::uint64_t tick = 0;
    while (source.pull(txn) == streaming::Pull::Item) {
      window.ingest(std::move(txn));
      if (query_ticks && config.query_every > 0 && window.generation() % config.query_every == 0) {
        const auto snap = window.snapshot();
        streaming::write_query_tick(*query_ticks, tick++, snap, streaming::query_window(snap, config.params));
      }
    }
    const auto snap = window.snapshot();
    out.rules = streaming::query_window(snap, config.params);
    out.n_transactions = snap.buffer.size();
    if (query_ticks) streaming::write_query_tick(*query_ticks, tick, snap, out.rules);
    if (!out.rules.empty()) {
      out.artifact = model::serialize_model(out.rules, config.format, "ledgerml-streaming", created_ms);
      if (artifact_stem) out.artifact_path = model::write_artifact(*artifact_stem, *out.artifact);
    }
    return out;
  }

  const auto records = ledger::read_at_rest(chain);
  const auto txns = arm::group_transactions(records);
  out.n_transactions = txns.size();

  if (config.mode == ExecutionMode::Mpp) {
    parallel::ClusterConfig cluster{config.n_workers, config.barrier_timeout, {}};
    const auto run = parallel::mpp_mine_detailed(txns, config.params, cluster);
    out.rules = run.rules;
    if (!out.rules.empty()) {
      if (artifact_stem) {
        parallel::SerializeTarget target{*artifact_stem, config.format, config.params, txns.size(), "ledgerml-mpp",
                                         created_ms};
        auto persisted = parallel::mpp_persist(run, config.params, txns.size(), cluster, target);
        out.artifact = std::move(persisted.artifact);
        out.artifact_path = std::move(persisted.path);
      } else {
        out.artifact = model::serialize_model(out.rules, config.format, "ledgerml-mpp", created_ms);
      }
    }
    return out;
  }

  lifecycle::ArmModel::Trainer trainer;
  if (config.mode == ExecutionMode::Smp) {
    trainer = [threads = config.n_threads](std::span<const arm::ItemTransaction> t, const arm::MiningParams& p) {
      return parallel::smp_mine(t, p, parallel::ThreadPoolConfig{threads, std::nullopt});
    };
  } else {
    trainer = [](std::span<const arm::ItemTransaction> t, const arm::MiningParams& p) { return arm::mine_rules(t, p); };
  }
  lifecycle::ArmModel model(trainer);
  lifecycle::Context ctx;
  ctx.config.params = config.params;
  ctx.config.format = config.format;
  ctx.config.producer = std::string("ledgerml-") + std::string(to_string(config.mode));
  ctx.config.created_ms = created_ms;
  ctx.config.output_stem = artifact_stem;
  ctx.data = txns;

  using lifecycle::EventKind;
  check(lifecycle::dispatch({EventKind::ModelInitialization, nullptr}, model, ctx));
  check(lifecycle::dispatch({EventKind::ModelTraining, nullptr}, model, ctx));
  check(lifecycle::dispatch({EventKind::ModelValidation, nullptr}, model, ctx));
  out.rules = *ctx.rules;
  if (!out.rules.empty()) {
    check(lifecycle::dispatch({EventKind::ModelSerialization, nullptr}, model, ctx));
    out.artifact = ctx.artifact;
    out.artifact_path = ctx.artifact_path;
  }
  check(lifecycle::dispatch({EventKind::ModelCleanUp, nullptr}, model, ctx));
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const std::optional<std::filesystem::path>& out_dir) {
  config.validate();
  ExperimentResult result;
  result.records = generate_synthetic(config);
  result.chain = load_ledger(result.records, config);

  std::optional<std::filesystem::path> stem;
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    std::ofstream rec(*out_dir / "records.csv");
    ledger::write_records_csv(rec, result.records);
    ledger::save_chain(*out_dir / "chain.jsonl", result.chain);
    stem = *out_dir / "model";
  }

  // Mining reads the persisted chain back when there is one, so a corrupted
  // file can never feed the rule table.
  const ledger::Chain source = out_dir ? ledger::load_chain(*out_dir / "chain.jsonl") : result.chain;
  result.mining = mine_chain(source, config, stem);
  result.rule_csv = arm::rule_table_csv(result.mining.rules);

  auto& s = result.summary;
  s["mode"] = to_string(config.mode);
  s["seed"] = config.seed;
  s["patients"] = config.n_patients;
  s["records"] = result.records.size();
  s["blocks"] = result.chain.blocks.size();
  s["tip_hash"] = to_hex(result.chain.blocks.back().hash);
  s["transactions"] = result.mining.n_transactions;
  s["min_support"] = config.params.min_support;
  s["min_confidence"] = config.params.min_confidence;
  s["max_rule_items"] = config.params.max_rule_items;
  s["rules"] = result.mining.rules.size();
  s["artifact"] = result.mining.artifact_path ? result.mining.artifact_path->string() : "";

  if (out_dir) {
    write_text(*out_dir / "rules.csv", result.rule_csv);
    write_text(*out_dir / "summary.json", s.dump(2) + "\n");
  }
  return result;
}

ScenarioReport run_contract_scenario(const contracts::Scenario& scenario) {
  ScenarioReport report;
  report.run = contracts::contract_main(contracts::ContractState::genesis(scenario.config), scenario.events);
  auto& r = report.report;
  r["state"] = contracts::state_summary(report.run.state);
  r["halted_on_unknown_event"] = report.run.halted_on_unknown;
  if (report.run.error) {
    nlohmann::ordered_json err;
    err["event_index"] = report.run.error->index;
    err["code"] = to_string(report.run.error->code);
    err["message"] = report.run.error->message;
    r["error"] = err;
    report.exit_code = exit_code_for(report.run.error->code);
  } else {
    r["error"] = nullptr;
  }
  return report;
}

int exit_code_for(Errc code) noexcept {
  switch (code) {
    case Errc::ParseError:
    case Errc::InvalidConfig: return 2;
    case Errc::IoError: return 3;
    case Errc::CorruptChain: return 4;
    case Errc::SubmissionLimitReached: return 10;
    case Errc::NoModel: return 11;
    case Errc::FormatRejected: return 12;
    case Errc::NoEscrow: return 13;
    case Errc::WrongPhase: return 14;
    case Errc::BadWallet: return 15;
    case Errc::NotWinner: return 16;
    case Errc::AlreadyCollected: return 17;
    case Errc::NoSubmissions: return 18;
    case Errc::NonPositiveAmount: return 19;
    default: return 1;
  }
}

}  // namespace ledgerml::experiment
