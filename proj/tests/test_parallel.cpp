#include <doctest.h>

#include <filesystem>
#include <thread>

#include "ledgerml/error.hpp"
#include "ledgerml/experiment.hpp"
#include "ledgerml/parallel.hpp"
#include "support/gen.hpp"
#include "support/oracle.hpp"

using namespace ledgerml;
using namespace ledgerml::parallel;

namespace {

std::vector<arm::ItemTransaction> d5() {
  using arm::make_transaction;
  return {make_transaction(1, {"a", "b", "c"}), make_transaction(2, {"a", "b"}), make_transaction(3, {"a", "c"}),
          make_transaction(4, {"b", "c"}), make_transaction(5, {"a", "b", "c"})};
}

arm::MiningParams d5_params() {
  arm::MiningParams p;
  p.min_support = 0.4;
  p.min_confidence = 0.6;
  return p;
}

ClusterConfig cluster(std::size_t n, std::chrono::milliseconds timeout = std::chrono::seconds(30)) {
  ClusterConfig c;
  c.n_workers = n;
  c.barrier_timeout = timeout;
  return c;
}

std::vector<arm::ItemTransaction> synthetic_1001() {
  experiment::ExperimentConfig cfg;
  return arm::group_transactions(experiment::generate_synthetic(cfg));
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Internal;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "ledgerml_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("contiguous partitions") {
  const auto txns = d5();
  const auto parts = partition_contiguous(txns, 3);
  REQUIRE(parts.size() == 3);
  CHECK(parts[0].size() == 2);
  CHECK(parts[1].size() == 2);
  CHECK(parts[2].size() == 1);
  CHECK(parts[0].data() == txns.data());
  CHECK(parts[2].front() == txns[4]);
  const auto many = partition_contiguous(txns, 8);
  CHECK(many.size() == 8);
  CHECK(many[7].empty());
}

TEST_CASE("property: partitions cover the input exactly once") {
  gen::Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto txns = gen::transactions(rng, 4, gen::below(rng, 40));
    const std::size_t k = 1 + gen::below(rng, 9);
    std::vector<arm::ItemTransaction> joined;
    std::size_t lo = txns.size(), hi = 0;
    for (auto p : partition_contiguous(txns, k)) {
      joined.insert(joined.end(), p.begin(), p.end());
      lo = std::min(lo, p.size());
      hi = std::max(hi, p.size());
    }
    CHECK(joined == txns);
    CHECK(hi - std::min(lo, hi) <= 1);
  }
}

TEST_CASE("SMP matches sequential mining") {
  const auto txns = d5();
  const auto want = arm::mine_rules(txns, d5_params());
  for (std::size_t t : {1, 3, 8}) CHECK(smp_mine(txns, d5_params(), {t, std::nullopt}) == want);

  const auto big = synthetic_1001();
  const arm::MiningParams defaults;
  CHECK(smp_mine(big, defaults, {8, std::nullopt}) == arm::mine_rules(big, defaults));
}

TEST_CASE("SMP memory budget raises OutOfMemory") {
  const auto big = synthetic_1001();
  CHECK(code_of([&] { smp_mine(big, {}, {4, std::size_t{16}}); }) == Errc::OutOfMemory);
  CHECK(code_of([&] { smp_mine(big, {}, {0, std::nullopt}); }) == Errc::InvalidParams);
  // the team is gone after failure; a second run on the same thread works
  CHECK(smp_mine(big, {}, {4, std::nullopt}) == arm::mine_rules(big, {}));
}

TEST_CASE("MPP matches sequential mining") {
  const auto txns = d5();
  const auto want = arm::mine_rules(txns, d5_params());
  for (std::size_t w : {1, 2, 3, 4}) CHECK(mpp_mine(txns, d5_params(), cluster(w)) == want);
  const auto big = synthetic_1001();
  CHECK(mpp_mine(big, {}, cluster(3)) == arm::mine_rules(big, {}));
}

TEST_CASE("MPP worker counts sum to global counts on D5") {
  const auto txns = d5();
  const auto run = mpp_mine_detailed(txns, d5_params(), cluster(2));
  REQUIRE(run.parts.size() == 2);
  const std::vector<arm::Item> a{"a"};
  CHECK(run.parts[0].n_transactions == 3);
  CHECK(run.parts[0].counts.at(a) == 3);
  CHECK(run.parts[1].counts.at(a) == 1);
  CHECK(aggregate_counts(run.parts).at(a) == 4);
}

TEST_CASE("MPP worker failure aborts without results") {
  auto c = cluster(3);
  c.faults.failing_worker = 1;
  CHECK(code_of([&] { mpp_mine(d5(), d5_params(), c); }) == Errc::WorkerFailure);
}

TEST_CASE("property: parallel-sequential equivalence") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    gen::Rng rng(seed);
    const auto txns = gen::transactions(rng, 3 + gen::below(rng, 8), 1 + gen::below(rng, 150));
    const auto p = gen::params(rng);
    const auto want = arm::mine_rules(txns, p);
    CAPTURE(seed);
    CHECK(oracle::rules_match(want, oracle::brute_force_rules(txns, p)));
    CHECK(smp_mine(txns, p, {1 + gen::below(rng, 8), std::nullopt}) == want);
    CHECK(mpp_mine(txns, p, cluster(1 + gen::below(rng, 4))) == want);
  }
}

TEST_CASE("aggregation serialization roles") {
  const auto dir = scratch("mpp");
  const auto txns = d5();
  const auto run = mpp_mine_detailed(txns, d5_params(), cluster(3));
  SerializeTarget target;
  target.stem = dir / "model";
  target.params = d5_params();
  target.n_transactions = txns.size();

  SUBCASE("master writes once all parts arrive") {
    const auto res = mpp_persist(run, d5_params(), txns.size(), cluster(3), target);
    REQUIRE(res.path);
    CHECK(model::decode_artifact(model::read_artifact(*res.path)) == run.rules);
    std::size_t files = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) files += e.path().extension() == ".txt";
    CHECK(files == 1);
  }
  SUBCASE("worker sends and writes nothing") {
    ModelAggregation agg(1, std::chrono::seconds(5));
    std::optional<SerializeResult> worker;
    std::thread t([&] { worker = mpp_serialize(NodeRole::Worker, agg, &run.parts[0], nullptr); });
    // master over a single part: counts are partial, so only check the handshake
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    auto parts = agg.receive_all();
    CHECK(parts.size() == 1);
    agg.finish(true);
    t.join();
    REQUIRE(worker);
    CHECK_FALSE(worker->artifact);
    CHECK_FALSE(worker->path);
    CHECK(std::filesystem::is_empty(dir));
  }
  SUBCASE("withheld worker times out and nothing is written") {
    auto c = cluster(3, std::chrono::milliseconds(200));
    c.faults.withheld_worker = 2;
    CHECK(code_of([&] { mpp_persist(run, d5_params(), txns.size(), c, target); }) == Errc::BarrierTimeout);
    CHECK(std::filesystem::is_empty(dir));
  }
}
