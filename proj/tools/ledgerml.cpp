#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "ledgerml/error.hpp"
#include "ledgerml/experiment.hpp"
#include "ledgerml/streaming.hpp"

namespace ex = ledgerml::experiment;
namespace ledger = ledgerml::ledger;

namespace {

struct Flag {
  const char* name;
  const char* key;
  const char* help;
};

// Flags mirror the config file keys.
constexpr Flag kConfigFlags[] = {
    {"--patients", "patients", "number of patients"},
    {"--drugs-per-patient", "drugs_per_patient", "distinct drugs per patient"},
    {"--catalog", "catalog", "comma-separated drug catalog"},
    {"--seed", "seed", "generator seed"},
    {"--min-support", "min_support", "minimum support fraction"},
    {"--min-confidence", "min_confidence", "minimum confidence fraction"},
    {"--max-rule-items", "max_rule_items", "maximum items per rule"},
    {"--mode", "mode", "single | smp | mpp | streaming"},
    {"--threads", "threads", "SMP thread count"},
    {"--workers", "workers", "MPP worker count"},
    {"--window", "window", "streaming window capacity"},
    {"--query-every", "query_every", "streaming query period in transactions"},
    {"--barrier-timeout-ms", "barrier_timeout_ms", "MPP barrier timeout"},
    {"--profile", "profile", "shipped | uniform"},
    {"--records-per-block", "records_per_block", "records per block (0 = one patient per block)"},
    {"--members", "members", "comma-separated member ids, leader first"},
    {"--wall-clock", "wall_clock", "use the system clock for block timestamps"},
    {"--clock-start-ms", "clock_start_ms", "fixed clock start"},
    {"--clock-step-ms", "clock_step_ms", "fixed clock step"},
    {"--format", "format", "RULESET_TEXT | RULESET_BINARY"},
};

struct ConfigArgs {
  std::string config_file;
  std::map<std::string, std::string> values;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "key = value config file")->check(CLI::ExistingFile);
    for (const auto& f : kConfigFlags) app->add_option(f.name, values[f.key], f.help);
  }

  [[nodiscard]] ex::ExperimentConfig build() const {
    ex::ExperimentConfig config = config_file.empty() ? ex::ExperimentConfig{} : ex::load_config(config_file);
    for (const auto& [key, value] : values) {
      if (!value.empty()) ex::apply_setting(config, key, value);
    }
    config.validate();
    return config;
  }
};

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ledgerml::Error(ledgerml::Errc::IoError, "cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ledgerml::Error(ledgerml::Errc::IoError, "cannot read " + path.string());
  return in;
}

void write_outputs(const std::filesystem::path& dir, const ex::ExperimentConfig& config, const ledger::Chain& chain,
                   const ex::MiningOutcome& mining) {
  const auto csv = ledgerml::arm::rule_table_csv(mining.rules);
  open_out(dir / "rules.csv") << csv;
  nlohmann::ordered_json s;
  s["mode"] = ex::to_string(config.mode);
  s["blocks"] = chain.blocks.size();
  s["tip_hash"] = ledgerml::to_hex(chain.blocks.back().hash);
  s["transactions"] = mining.n_transactions;
  s["rules"] = mining.rules.size();
  s["artifact"] = mining.artifact_path ? mining.artifact_path->string() : "";
  open_out(dir / "summary.json") << s.dump(2) << "\n";
  std::cout << csv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ledger-backed association rule mining"};
  app.require_subcommand(1);

  ConfigArgs gen_args, load_args, mine_args, stream_args, exp_args;
  std::string gen_out = "records.csv";
  auto* gen = app.add_subcommand("gen", "generate synthetic prescription records");
  gen_args.attach(gen);
  gen->add_option("-o,--out", gen_out, "records CSV");

  std::string load_in, load_out = "chain.jsonl";
  auto* load = app.add_subcommand("load", "load records into a member network and write the leader chain");
  load_args.attach(load);
  load->add_option("-i,--records", load_in, "records CSV")->required()->check(CLI::ExistingFile);
  load->add_option("-o,--out", load_out, "chain JSON-lines");

  std::string mine_chain_path, mine_dir = "out";
  auto* mine = app.add_subcommand("mine", "validate a chain and mine association rules");
  mine_args.attach(mine);
  mine->add_option("-c,--chain", mine_chain_path, "chain JSON-lines")->required()->check(CLI::ExistingFile);
  mine->add_option("-o,--out-dir", mine_dir, "output directory");

  std::string stream_chain_path, stream_dir = "out";
  auto* stream = app.add_subcommand("stream", "replay a chain through the sliding window");
  stream_args.attach(stream);
  stream->add_option("-c,--chain", stream_chain_path, "chain JSON-lines")->required()->check(CLI::ExistingFile);
  stream->add_option("-o,--out-dir", stream_dir, "output directory");

  std::string scenario_path, event_log_path, scenario_out;
  bool simulate = false;
  ConfigArgs contract_args;
  ex::AgentConfig agents;
  auto* contract = app.add_subcommand("contract", "replay a contract scenario or simulate agents");
  contract->add_option("scenario", scenario_path, "scenario JSON")->check(CLI::ExistingFile);
  contract->add_option("--event-log", event_log_path, "write the applied events as JSON-lines");
  contract->add_flag("--simulate", simulate, "build the scenario from agents mining synthetic data");
  contract->add_option("--participants", agents.n_participants, "simulated participants");
  contract->add_option("--attempts", agents.attempts, "training attempts per participant");
  contract->add_option("--reward", agents.reward, "reward deposited by the data owner");
  contract->add_option("--share-with", agents.share_with, "co-recipients named in the winner's claim");
  contract->add_option("--write-scenario", scenario_out, "save the simulated scenario JSON");
  contract_args.attach(contract);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate-chain", "check hash links of a chain file");
  validate->add_option("chain", validate_path, "chain JSON-lines")->required()->check(CLI::ExistingFile);

  std::string exp_dir = "out";
  auto* experiment = app.add_subcommand("experiment", "gen, load, mine and write in one run");
  exp_args.attach(experiment);
  experiment->add_option("-o,--out-dir", exp_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto config = gen_args.build();
      auto out = open_out(gen_out);
      ledger::write_records_csv(out, ex::generate_synthetic(config));
    } else if (*load) {
      const auto config = load_args.build();
      auto in = open_in(load_in);
      const auto records = ledger::read_records_csv(in);
      const auto chain = ex::load_ledger(records, config);
      ledger::save_chain(load_out, chain);
      std::cout << "blocks " << chain.blocks.size() << " tip " << ledgerml::to_hex(chain.blocks.back().hash) << "\n";
    } else if (*mine) {
      const auto config = mine_args.build();
      const auto chain = ledger::load_chain(mine_chain_path);
      std::filesystem::create_directories(mine_dir);
      const auto mining = ex::mine_chain(chain, config, std::filesystem::path(mine_dir) / "model");
      write_outputs(mine_dir, config, chain, mining);
    } else if (*stream) {
      auto config = stream_args.build();
      config.mode = ex::ExecutionMode::Streaming;
      const auto chain = ledger::load_chain(stream_chain_path);
      std::filesystem::create_directories(stream_dir);
      auto ticks = open_out(std::filesystem::path(stream_dir) / "ticks.csv");
      const auto mining = ex::mine_chain(chain, config, std::filesystem::path(stream_dir) / "model", &ticks);
      write_outputs(stream_dir, config, chain, mining);
    } else if (*contract) {
      if (simulate == !scenario_path.empty()) {
        throw ledgerml::Error(ledgerml::Errc::InvalidConfig, "give either a scenario file or --simulate");
      }
      const auto scenario = simulate ? ex::simulate_agents(contract_args.build(), agents)
                                     : ledgerml::contracts::load_scenario(scenario_path);
      if (!scenario_out.empty()) open_out(scenario_out) << ledgerml::contracts::scenario_to_json(scenario).dump(2) << "\n";
      const auto report = ex::run_contract_scenario(scenario);
      if (!event_log_path.empty()) {
        auto out = open_out(event_log_path);
        ledgerml::contracts::write_event_log(out, report.run.state.event_log);
      }
      std::cout << report.report.dump(2) << "\n";
      return report.exit_code;
    } else if (*validate) {
      const auto chain = ledger::load_chain(validate_path);
      const bool ok = ledger::validate_chain(chain);
      std::cout << (ok ? "valid" : "invalid") << " blocks " << chain.blocks.size() << "\n";
      return ok ? 0 : ex::exit_code_for(ledgerml::Errc::CorruptChain);
    } else if (*experiment) {
      const auto config = exp_args.build();
      const auto result = ex::run_experiment(config, std::filesystem::path(exp_dir));
      std::cout << result.rule_csv;
    }
  } catch (const ledgerml::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ex::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
