#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ledgerml/arm.hpp"
#include "ledgerml/model.hpp"

namespace ledgerml::parallel {

// Count distribution: data is partitioned, every partition counts the same
// candidates, and partial counts are summed before the support test. The
// result is exactly the sequential Apriori output.

struct ThreadPoolConfig {
  std::size_t n_threads = 1;
  /// Upper bound on per-level counting buffers; exceeding it fails the level with OutOfMemory.
  std::optional<std::size_t> memory_budget_bytes;
};

/// Test hooks for the simulated cluster.
struct FaultInjection {
  std::optional<std::size_t> failing_worker;    // replies with a failure to its first count request
  std::optional<std::size_t> withheld_worker;   // never sends its model part for aggregation
};

struct ClusterConfig {
  std::size_t n_workers = 1;
  std::chrono::milliseconds barrier_timeout{30'000};
  FaultInjection faults;
};

/// Contiguous partitions whose sizes differ by at most one (larger ones first).
/// Empty partitions are produced when parts > txns.size().
std::vector<std::span<const arm::ItemTransaction>> partition_contiguous(std::span<const arm::ItemTransaction> txns,
                                                                        std::size_t parts);

/// Shared-memory mining on a thread team. Throws OutOfMemory after cleaning up
/// the team when buffers cannot be allocated.
std::vector<arm::AssociationRule> smp_mine(std::span<const arm::ItemTransaction> txns, const arm::MiningParams& params,
                                           const ThreadPoolConfig& pool);

/// A worker's contribution to the global model: its local counts for every
/// candidate it was asked to count.
struct PartialModel {
  std::size_t worker_id = 0;
  std::uint64_t n_transactions = 0;
  std::map<std::vector<arm::Item>, std::uint64_t> counts;
};

/// Sums partial counts per itemset.
std::map<std::vector<arm::Item>, std::uint64_t> aggregate_counts(std::span<const PartialModel> parts);

/// Rendezvous between workers sending model parts and the master collecting
/// them. Every wait is bounded by the timeout.
class ModelAggregation {
 public:
  ModelAggregation(std::size_t n_workers, std::chrono::milliseconds timeout)
      : n_workers_(n_workers), timeout_(timeout) {}

  void send(PartialModel part);
  /// Master: every worker's part, or BarrierTimeout.
  std::vector<PartialModel> receive_all();
  /// Master: aggregation finished (successfully or not); releases waiting workers.
  void finish(bool success);
  /// Worker: blocks until the master finishes. Throws BarrierTimeout on timeout
  /// or when the master aborted.
  void wait_until_done();

  [[nodiscard]] std::chrono::milliseconds timeout() const noexcept { return timeout_; }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::vector<PartialModel> parts_;
  std::size_t n_workers_;
  std::chrono::milliseconds timeout_;
  std::optional<bool> done_;
};

enum class NodeRole { Master, Worker };

struct SerializeTarget {
  std::filesystem::path stem;
  model::ArtifactFormat format = model::ArtifactFormat::RulesetText;
  arm::MiningParams params;
  std::uint64_t n_transactions = 0;
  std::string producer = "ledgerml-mpp";
  std::int64_t created_ms = 0;
};

struct SerializeResult {
  std::optional<model::ModelArtifact> artifact;  // master only
  std::optional<std::filesystem::path> path;     // master only
};

/// Cloud-level serialization. A worker sends its part and waits; the master
/// receives every part, aggregates, writes the artifact, and releases the
/// workers. Only the master writes. A missing part raises BarrierTimeout and
/// nothing is written.
SerializeResult mpp_serialize(NodeRole role, ModelAggregation& aggregation, const PartialModel* part,
                              const SerializeTarget* target);

struct MppRun {
  std::vector<arm::AssociationRule> rules;
  std::vector<PartialModel> parts;  // per worker, in worker order
};

/// Master/worker mining over message queues. Throws WorkerFailure (or
/// BarrierTimeout) without emitting partial results.
MppRun mpp_mine_detailed(std::span<const arm::ItemTransaction> txns, const arm::MiningParams& params,
                         const ClusterConfig& cluster);

std::vector<arm::AssociationRule> mpp_mine(std::span<const arm::ItemTransaction> txns, const arm::MiningParams& params,
                                           const ClusterConfig& cluster);

/// Cloud-level serialization of a finished run: each worker sends its part,
/// the master aggregates and writes.
SerializeResult mpp_persist(const MppRun& run, const arm::MiningParams& params, std::uint64_t n_transactions,
                            const ClusterConfig& cluster, const SerializeTarget& target);

/// mpp_mine followed by mpp_persist.
SerializeResult mpp_mine_and_persist(std::span<const arm::ItemTransaction> txns, const arm::MiningParams& params,
                                     const ClusterConfig& cluster, const SerializeTarget& target);

}  // namespace ledgerml::parallel
