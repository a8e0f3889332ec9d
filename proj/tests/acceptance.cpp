// Acceptance suite: one pass/fail line per criterion, each under its time limit.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ledgerml/contracts.hpp"
#include "ledgerml/error.hpp"
#include "ledgerml/experiment.hpp"
#include "ledgerml/ledger.hpp"
#include "ledgerml/model.hpp"
#include "ledgerml/streaming.hpp"
#include "support/gen.hpp"
#include "support/oracle.hpp"
#include "support/scenarios.hpp"

using namespace ledgerml;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

// ---------------------------------------------------------------------------

Outcome reference_row_arithmetic() {
  Outcome o;
  const auto r = arm::make_rule({{"actiq", "fentora"}, 256}, {{"meperidine"}, 300}, 202, 1001);
  const double support_pct = 100.0 * r.support;
  if (std::abs(support_pct - 100.0 * 202.0 / 1001.0) > 1e-6) o.fail("support differs from 100*202/1001");
  if (std::abs(support_pct - 20.17982018) > 1e-6) o.fail("support is not 20.1798...%");
  if (100.0 * r.confidence != 78.90625) o.fail("confidence is not 78.90625%");
  const double lhs = static_cast<double>(r.count) / r.confidence;
  if (lhs != 256.0) o.fail("implied antecedent count is not 256");
  if (202.0 / 0.7890625 != 256.0) o.fail("202/0.7890625 != 256");
  o.detail = "support " + arm::format_fixed8(support_pct) + "%, implied lhs count " + std::to_string(lhs);
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  std::size_t total_rules = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    gen::Rng rng(0xA11CE + seed);
    const auto txns = gen::transactions(rng, 1 + gen::below(rng, 12), 1 + gen::below(rng, 200));
    const auto p = gen::params(rng);
    const auto got = arm::mine_rules(txns, p);
    total_rules += got.size();
    if (!oracle::rules_match(got, oracle::brute_force_rules(txns, p))) o.fail("instance " + std::to_string(seed));
  }
  if (o.ok) o.detail = "100 instances, " + std::to_string(total_rules) + " rules matched";
  return o;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Outcome default_pipeline() {
  Outcome o;
  const experiment::ExperimentConfig config;
  const auto res = experiment::run_experiment(config);
  const auto txns = arm::group_transactions(res.records);
  const double n = static_cast<double>(txns.size());

  std::stringstream csv(res.rule_csv);
  std::string line;
  std::getline(csv, line);
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    const auto cells = split_csv(line);
    const std::size_t n_lhs = std::stoul(cells[0]);
    const std::size_t n_rhs = std::stoul(cells[1]);
    if (n_lhs + n_rhs > 3) o.fail("row " + std::to_string(rows) + " has more than 3 items");
    std::vector<std::string> lhs(cells.begin() + 6, cells.begin() + 6 + static_cast<std::ptrdiff_t>(n_lhs));
    std::vector<std::string> all(cells.begin() + 6, cells.begin() + 6 + static_cast<std::ptrdiff_t>(n_lhs + n_rhs));
    // recount from the raw generated records
    const auto both = oracle::recount(txns, all);
    const auto lhs_count = oracle::recount(txns, lhs);
    const double support_pct = 100.0 * static_cast<double>(both) / n;
    const double confidence_pct = 100.0 * static_cast<double>(both) / static_cast<double>(lhs_count);
    if (std::stoull(cells[2]) != both) o.fail("row " + std::to_string(rows) + " count mismatch");
    if (cells[3] != arm::format_fixed8(support_pct)) o.fail("row " + std::to_string(rows) + " support mismatch");
    if (cells[4] != arm::format_fixed8(confidence_pct)) o.fail("row " + std::to_string(rows) + " confidence mismatch");
    if (support_pct < 20.0 || confidence_pct < 70.0) o.fail("row " + std::to_string(rows) + " below threshold");
  }
  if (rows < 10) o.fail("only " + std::to_string(rows) + " rules");
  if (res.records.size() != 7007) o.fail("expected 7007 records");
  if (o.ok) o.detail = std::to_string(rows) + " rules, all rows recounted";
  return o;
}

Outcome mode_agreement() {
  Outcome o;
  gen::Rng seeds(4242);
  struct Mode {
    experiment::ExecutionMode mode;
    std::size_t threads = 1, workers = 1;
    const char* label;
  };
  const std::vector<Mode> modes{{experiment::ExecutionMode::Smp, 1, 1, "smp/1"},
                                {experiment::ExecutionMode::Smp, 3, 1, "smp/3"},
                                {experiment::ExecutionMode::Smp, 8, 1, "smp/8"},
                                {experiment::ExecutionMode::Mpp, 1, 1, "mpp/1"},
                                {experiment::ExecutionMode::Mpp, 1, 3, "mpp/3"},
                                {experiment::ExecutionMode::Mpp, 1, 4, "mpp/4"},
                                {experiment::ExecutionMode::Streaming, 1, 1, "streaming"}};
  std::size_t total_rules = 0;
  for (int s = 0; s < 10; ++s) {
    experiment::ExperimentConfig c;
    c.seed = seeds();
    const auto single = experiment::run_experiment(c).rule_csv;
    total_rules += static_cast<std::size_t>(std::count(single.begin(), single.end(), '\n')) - 1;
    for (const auto& m : modes) {
      auto mc = c;
      mc.mode = m.mode;
      mc.n_threads = m.threads;
      mc.n_workers = m.workers;
      mc.window_capacity = c.n_patients;
      if (experiment::run_experiment(mc).rule_csv != single) {
        o.fail(std::string(m.label) + " differs for seed " + std::to_string(c.seed));
      }
    }
  }
  if (o.ok) o.detail = "10 seeds x 8 modes identical (" + std::to_string(total_rules) + " rules total)";
  return o;
}

Outcome tamper_evidence() {
  Outcome o;
  gen::Rng rng(77);
  ledger::Network net({"Pharmacy-A", "Pharmacy-B", "Pharmacy-C"}, std::make_shared<ledger::ManualClock>(0, 1000));
  for (std::uint64_t i = 1; i < 100; ++i) net.append_block("Pharmacy-A", gen::records(rng, 1, 7, 20));
  const auto chain = net.leader().chain->snapshot();
  if (chain.blocks.size() != 100) o.fail("chain does not have 100 blocks");
  if (!ledger::validate_chain(chain)) o.fail("unmutated chain fails validation");

  std::size_t caught = 0;
  for (int m = 0; m < 1000; ++m) {
    auto c = chain;
    auto& b = c.blocks[gen::below(rng, c.blocks.size())];
    const auto x = static_cast<std::uint8_t>(1 + gen::below(rng, 255));
    auto flip_int = [&](auto& v) {
      const auto shift = 8 * gen::below(rng, sizeof(v));
      v ^= static_cast<std::remove_reference_t<decltype(v)>>(static_cast<std::uint64_t>(x) << shift);
    };
    switch (gen::below(rng, b.records.empty() ? 4 : 6)) {
      case 0: flip_int(b.index); break;
      case 1: flip_int(b.timestamp); break;
      case 2: b.prev_hash[gen::below(rng, 32)] ^= x; break;
      case 3: b.hash[gen::below(rng, 32)] ^= x; break;
      case 4: flip_int(b.records[gen::below(rng, b.records.size())].patient_id); break;
      default: {
        auto& item = b.records[gen::below(rng, b.records.size())].item;
        item[gen::below(rng, item.size())] ^= static_cast<char>(x);
      }
    }
    caught += !ledger::validate_chain(c);
  }
  if (caught != 1000) o.fail(std::to_string(1000 - caught) + " mutations went undetected");
  o.detail = std::to_string(caught) + "/1000 mutations detected";
  return o;
}

Outcome replication_convergence() {
  Outcome o;
  gen::Rng rng(5);
  ledger::Network net({"Pharmacy-A", "Pharmacy-B", "Pharmacy-C"}, std::make_shared<ledger::ManualClock>(0, 1));
  for (int i = 0; i < 200; ++i) net.append_block("Pharmacy-A", gen::records(rng, 1, 7, 20));
  std::vector<std::string> dumps;
  for (const auto& m : net.members()) {
    std::ostringstream out;
    ledger::write_chain(out, m.chain->snapshot());
    dumps.push_back(out.str());
  }
  for (std::size_t i = 1; i < dumps.size(); ++i) {
    if (dumps[i] != dumps[0]) o.fail("member " + std::to_string(i) + " differs from the leader");
  }
  if (net.leader().chain->size() != 201) o.fail("leader does not hold 201 blocks");
  if (o.ok) o.detail = "3 members, 201 blocks, " + std::to_string(dumps[0].size()) + " identical bytes each";
  return o;
}

Outcome contract_properties() {
  using namespace contracts;
  Outcome o;
  std::size_t settled = 0, rejected = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    gen::Rng rng(9000 + seed);
    ContractConfig cfg;
    cfg.daily_limit = 1 + gen::below(rng, 5);
    const std::string tag = "scenario " + std::to_string(seed);

    // (a) replay determinism of the main loop's log
    const auto events = seed % 2 ? gen::settling_scenario(rng) : gen::scenario(rng, 10 + gen::below(rng, 30));
    const auto run = contract_main(ContractState::genesis(cfg), events);
    if (encode_state(replay(cfg, run.state.event_log)) != encode_state(run.state)) o.fail(tag + ": replay differs");
    std::stringstream log;
    write_event_log(log, run.state.event_log);
    const auto reread = read_event_log(log);
    if (encode_state(replay(cfg, reread)) != encode_state(run.state)) o.fail(tag + ": JSON replay differs");

    // (b) conservation at every state of a tolerant fold; rejected events leave the state alone
    auto state = ContractState::genesis(cfg);
    const auto all = gen::settling_scenario(rng);
    for (const auto& e : all) {
      try {
        state = apply_event(state, e);
      } catch (const Error&) {
        ++rejected;
      }
      if (state.total_deposited() != state.total_paid() + state.reward_pool) o.fail(tag + ": value not conserved");
    }

    // (d) exhaustive re-scoring of the settlement
    if (state.phase == Phase::Settled) {
      ++settled;
      const EvaluateEvent* eval = nullptr;
      for (const auto& e : state.event_log) {
        if (auto p = std::get_if<EvaluateEvent>(&e)) eval = p;
      }
      std::vector<double> scores;
      for (const auto& s : state.submissions) scores.push_back(model::evaluate_model(s.artifact, eval->validation, state.metric));
      std::size_t best = 0;
      for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) best = i;
      }
      if (state.winning_submission != best || state.winner != state.submissions[best].participant) {
        o.fail(tag + ": wrong winner");
      }
    }

    // (c) the (limit+1)-th same-day submission is rejected
    auto limited = deposit_reward(ContractState::genesis(cfg), "g", 10);
    const auto art = gen::artifact(rng);
    const auto day = static_cast<std::int64_t>(gen::below(rng, 10));
    for (std::uint64_t k = 0; k < cfg.daily_limit; ++k) limited = submit_model(limited, "p", art, day);
    try {
      submit_model(limited, "p", art, day);
      o.fail(tag + ": submission over the daily limit accepted");
    } catch (const Error& e) {
      if (e.code() != Errc::SubmissionLimitReached) o.fail(tag + ": wrong error for the rate limit");
    }
  }
  if (settled < 25) o.fail("only " + std::to_string(settled) + " scenarios settled");
  if (o.ok) {
    o.detail = "50 scenarios, " + std::to_string(settled) + " settled, " + std::to_string(rejected) + " rejected events";
  }
  return o;
}

Outcome streaming_suffix() {
  Outcome o;
  std::size_t checks = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    gen::Rng rng(31337 + seed);
    const auto stream = gen::transactions(rng, 2 + gen::below(rng, 10), 1 + gen::below(rng, 300));
    const std::size_t cap = 1 + gen::below(rng, 2 * stream.size());
    const auto p = gen::params(rng);
    streaming::SlidingWindow w(cap);
    for (std::size_t i = 0; i < stream.size(); ++i) {
      w.ingest(stream[i]);
      if (i + 1 != stream.size() && gen::below(rng, 10) != 0) continue;
      const std::size_t keep = std::min(cap, i + 1);
      const std::vector<arm::ItemTransaction> tail(stream.begin() + static_cast<std::ptrdiff_t>(i + 1 - keep),
                                                   stream.begin() + static_cast<std::ptrdiff_t>(i + 1));
      ++checks;
      if (streaming::query_window(w, p) != arm::mine_rules(tail, p)) o.fail("stream " + std::to_string(seed));
    }
  }
  if (o.ok) o.detail = "50 streams, " + std::to_string(checks) + " window queries matched";
  return o;
}

Outcome serialization_round_trip() {
  Outcome o;
  std::size_t n_rules = 0;
  gen::Rng rng(99);
  for (int i = 0; i < 100; ++i) {
    auto rules = gen::rules(rng, 40);
    if (rules.empty()) rules = gen::rules(rng, 40);
    n_rules += rules.size();
    const auto text = model::decode_rules_text(model::encode_rules_text(rules));
    const auto bin = model::decode_rules_binary(model::encode_rules_binary(rules));
    if (text != rules) o.fail("text codec, set " + std::to_string(i));
    if (bin != rules) o.fail("binary codec, set " + std::to_string(i));
    if (text != bin) o.fail("codecs disagree, set " + std::to_string(i));
  }
  if (o.ok) o.detail = "100 sets, " + std::to_string(n_rules) + " rules";
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "reference rule row arithmetic", 1.0, reference_row_arithmetic},
      {2, "Apriori equals brute-force oracle", 60.0, oracle_equivalence},
      {3, "default-scale pipeline", 30.0, default_pipeline},
      {4, "execution mode agreement", 300.0, mode_agreement},
      {5, "tamper evidence", 10.0, tamper_evidence},
      {6, "replication convergence", 5.0, replication_convergence},
      {7, "contract properties", 30.0, contract_properties},
      {8, "streaming suffix semantics", 60.0, streaming_suffix},
      {9, "serialization round trip", 10.0, serialization_round_trip},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= c.limit_s) out.fail("took " + std::to_string(secs) + " s");
    failures += !out.ok;
    std::printf("[%s] criterion %d: %s (%.3f s, limit %.0f s) %s\n", out.ok ? "PASS" : "FAIL", c.id, c.name, secs,
                c.limit_s, out.detail.c_str());
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
