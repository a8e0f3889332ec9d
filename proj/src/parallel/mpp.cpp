#include <algorithm>
#include <memory>
#include <thread>
#include <variant>

#include "ledgerml/error.hpp"
#include "ledgerml/parallel.hpp"

namespace ledgerml::parallel {

namespace {

/// Unbounded FIFO with a timed pop; the only channel between nodes.
template <typename T>
class Mailbox {
 public:
  void push(T msg) {
    {
      std::lock_guard lock(mu_);
      queue_.push_back(std::move(msg));
    }
    cv_.notify_one();
  }

  std::optional<T> pop_for(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    if (!cv_.wait_for(lock, timeout, [&] { return !queue_.empty(); })) return std::nullopt;
    T msg = std::move(queue_.front());
    queue_.pop_front();
    return msg;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> queue_;
};

struct VocabularyRequest {};
struct CountRequest {
  std::shared_ptr<const arm::ItemDictionary> dict;
  std::shared_ptr<const std::vector<arm::ItemIds>> candidates;
};
struct Shutdown {};
using Command = std::variant<VocabularyRequest, CountRequest, Shutdown>;

struct Reply {
  std::size_t worker_id = 0;
  bool ok = true;
  std::string error;
  std::vector<arm::Item> vocabulary;
  std::vector<std::uint64_t> counts;
};

class Worker {
 public:
  Worker(std::size_t id, std::span<const arm::ItemTransaction> shard, bool fail, Mailbox<Reply>& to_master)
      : id_(id), shard_(shard), fail_(fail), to_master_(to_master) {}

  Mailbox<Command>& inbox() { return inbox_; }
  const PartialModel& part() const { return part_; }

  void run(std::chrono::milliseconds timeout) {
    part_.worker_id = id_;
    part_.n_transactions = shard_.size();
    while (true) {
      auto cmd = inbox_.pop_for(timeout);
      if (!cmd) continue;
      if (std::holds_alternative<Shutdown>(*cmd)) return;
      Reply reply;
      reply.worker_id = id_;
      try {
        if (std::holds_alternative<VocabularyRequest>(*cmd)) {
          for (const auto& t : shard_) reply.vocabulary.insert(reply.vocabulary.end(), t.items.begin(), t.items.end());
          std::sort(reply.vocabulary.begin(), reply.vocabulary.end());
          reply.vocabulary.erase(std::unique(reply.vocabulary.begin(), reply.vocabulary.end()),
                                 reply.vocabulary.end());
        } else {
          if (fail_) throw Error(Errc::WorkerFailure, "worker " + std::to_string(id_) + " failed");
          const auto& req = std::get<CountRequest>(*cmd);
          if (rows_.empty() && !shard_.empty()) rows_ = arm::encode_transactions(*req.dict, shard_);
          reply.counts.assign(req.candidates->size(), 0);
          arm::count_candidates(rows_, *req.candidates, reply.counts);
          for (std::size_t c = 0; c < reply.counts.size(); ++c) {
            part_.counts[req.dict->decode((*req.candidates)[c])] = reply.counts[c];
          }
        }
      } catch (const std::exception& e) {
        reply.ok = false;
        reply.error = e.what();
        reply.counts.clear();
      }
      to_master_.push(std::move(reply));
    }
  }

 private:
  std::size_t id_;
  std::span<const arm::ItemTransaction> shard_;
  bool fail_;
  Mailbox<Reply>& to_master_;
  Mailbox<Command> inbox_;
  std::vector<arm::ItemIds> rows_;
  PartialModel part_;
};

/// The master's view of one cluster run. Owns the worker threads.
class Cluster {
 public:
  Cluster(std::span<const arm::ItemTransaction> txns, const ClusterConfig& config) : config_(config) {
    if (config.n_workers == 0) throw Error(Errc::InvalidParams, "n_workers must be at least 1");
    const auto shards = partition_contiguous(txns, config.n_workers);
    for (std::size_t w = 0; w < shards.size(); ++w) {
      workers_.push_back(std::make_unique<Worker>(w, shards[w], config.faults.failing_worker == w, replies_));
    }
    for (auto& w : workers_) {
      threads_.emplace_back([worker = w.get(), timeout = config.barrier_timeout] { worker->run(timeout); });
    }
  }

  ~Cluster() { shutdown(); }

  void shutdown() {
    if (threads_.empty()) return;
    for (auto& w : workers_) w->inbox().push(Shutdown{});
    threads_.clear();  // joins
  }

  /// Broadcasts one command and gathers a reply from every worker, in worker order.
  std::vector<Reply> round(const Command& cmd) {
    for (auto& w : workers_) w->inbox().push(cmd);
    std::vector<Reply> replies(workers_.size());
    std::vector<std::string> failures;
    for (std::size_t received = 0; received < workers_.size(); ++received) {
      auto reply = replies_.pop_for(config_.barrier_timeout);
      if (!reply) throw Error(Errc::BarrierTimeout, "a worker did not answer within the barrier timeout");
      if (!reply->ok) failures.push_back(reply->error);
      replies[reply->worker_id] = std::move(*reply);
    }
    if (!failures.empty()) throw Error(Errc::WorkerFailure, "aggregation failed: " + failures.front());
    return replies;
  }

  std::vector<PartialModel> parts() const {
    std::vector<PartialModel> out;
    for (const auto& w : workers_) out.push_back(w->part());
    return out;
  }

  [[nodiscard]] std::size_t size() const noexcept { return workers_.size(); }

 private:
  ClusterConfig config_;
  Mailbox<Reply> replies_;
  std::vector<std::unique_ptr<Worker>> workers_;
  std::vector<std::jthread> threads_;
};

std::vector<arm::AssociationRule> run_rounds(Cluster& cluster, std::uint64_t n_transactions,
                                             const arm::MiningParams& params) {
  std::vector<arm::Item> vocabulary;
  for (auto& reply : cluster.round(VocabularyRequest{})) {
    vocabulary.insert(vocabulary.end(), reply.vocabulary.begin(), reply.vocabulary.end());
  }
  auto dict = std::make_shared<const arm::ItemDictionary>(std::move(vocabulary));

  const auto table = arm::apriori(dict->size(), n_transactions, params, [&](std::span<const arm::ItemIds> cands) {
    auto shared = std::make_shared<const std::vector<arm::ItemIds>>(cands.begin(), cands.end());
    std::vector<std::uint64_t> total(cands.size(), 0);
    for (const auto& reply : cluster.round(CountRequest{dict, shared})) {
      for (std::size_t c = 0; c < total.size(); ++c) total[c] += reply.counts[c];
    }
    return total;
  });
  return arm::generate_rules(arm::decode_itemsets(*dict, table), n_transactions, params);
}

}  // namespace

std::map<std::vector<arm::Item>, std::uint64_t> aggregate_counts(std::span<const PartialModel> parts) {
  std::map<std::vector<arm::Item>, std::uint64_t> total;
  for (const auto& p : parts) {
    for (const auto& [items, count] : p.counts) total[items] += count;
  }
  return total;
}

void ModelAggregation::send(PartialModel part) {
  {
    std::lock_guard lock(mu_);
    parts_.push_back(std::move(part));
  }
  cv_.notify_all();
}

std::vector<PartialModel> ModelAggregation::receive_all() {
  std::unique_lock lock(mu_);
  if (!cv_.wait_for(lock, timeout_, [&] { return parts_.size() >= n_workers_; })) {
    throw Error(Errc::BarrierTimeout, "received " + std::to_string(parts_.size()) + " of " +
                                          std::to_string(n_workers_) + " model parts");
  }
  auto parts = parts_;
  std::sort(parts.begin(), parts.end(), [](const auto& a, const auto& b) { return a.worker_id < b.worker_id; });
  return parts;
}

void ModelAggregation::finish(bool success) {
  {
    std::lock_guard lock(mu_);
    done_ = success;
  }
  cv_.notify_all();
}

void ModelAggregation::wait_until_done() {
  std::unique_lock lock(mu_);
  if (!cv_.wait_for(lock, timeout_, [&] { return done_.has_value(); })) {
    throw Error(Errc::BarrierTimeout, "model aggregation did not finish in time");
  }
  if (!*done_) throw Error(Errc::BarrierTimeout, "model aggregation was aborted");
}

SerializeResult mpp_serialize(NodeRole role, ModelAggregation& aggregation, const PartialModel* part,
                              const SerializeTarget* target) {
  if (role == NodeRole::Worker) {
    if (!part) throw Error(Errc::InvalidParams, "a worker needs a model part to send");
    aggregation.send(*part);
    aggregation.wait_until_done();
    return {};
  }

  if (!target) throw Error(Errc::InvalidParams, "the master needs a serialization target");
  std::vector<PartialModel> parts;
  try {
    parts = aggregation.receive_all();
  } catch (...) {
    aggregation.finish(false);
    throw;
  }

  // Every worker counted the same candidates, so the sums are global counts.
  std::vector<arm::Itemset> frequent;
  for (auto& [items, count] : aggregate_counts(parts)) {
    if (arm::meets_support(count, target->n_transactions, target->params.min_support)) {
      frequent.push_back(arm::Itemset{items, count});
    }
  }
  SerializeResult result;
  try {
    const auto rules = arm::generate_rules(frequent, target->n_transactions, target->params);
    result.artifact = model::serialize_model(rules, target->format, target->producer, target->created_ms);
  } catch (...) {
    aggregation.finish(false);
    throw;
  }
  aggregation.finish(true);
  result.path = model::write_artifact(target->stem, *result.artifact);
  return result;
}

MppRun mpp_mine_detailed(std::span<const arm::ItemTransaction> txns, const arm::MiningParams& params,
                         const ClusterConfig& cluster_config) {
  params.validate();
  if (txns.empty()) throw Error(Errc::EmptyInput, "no transactions to mine");
  Cluster cluster(txns, cluster_config);
  MppRun run;
  run.rules = run_rounds(cluster, txns.size(), params);
  cluster.shutdown();
  run.parts = cluster.parts();
  return run;
}

std::vector<arm::AssociationRule> mpp_mine(std::span<const arm::ItemTransaction> txns, const arm::MiningParams& params,
                                           const ClusterConfig& cluster) {
  return mpp_mine_detailed(txns, params, cluster).rules;
}

SerializeResult mpp_persist(const MppRun& run, const arm::MiningParams& params, std::uint64_t n_transactions,
                            const ClusterConfig& cluster, const SerializeTarget& target) {
  ModelAggregation aggregation(run.parts.size(), cluster.barrier_timeout);
  std::vector<std::exception_ptr> worker_errors(run.parts.size());
  SerializeTarget master_target = target;
  master_target.params = params;
  master_target.n_transactions = n_transactions;

  std::vector<std::jthread> workers;
  for (std::size_t w = 0; w < run.parts.size(); ++w) {
    if (cluster.faults.withheld_worker == w) continue;
    workers.emplace_back([&, w] {
      try {
        mpp_serialize(NodeRole::Worker, aggregation, &run.parts[w], nullptr);
      } catch (...) {
        worker_errors[w] = std::current_exception();
      }
    });
  }
  return mpp_serialize(NodeRole::Master, aggregation, nullptr, &master_target);
}

SerializeResult mpp_mine_and_persist(std::span<const arm::ItemTransaction> txns, const arm::MiningParams& params,
                                     const ClusterConfig& cluster, const SerializeTarget& target) {
  const MppRun run = mpp_mine_detailed(txns, params, cluster);
  return mpp_persist(run, params, txns.size(), cluster, target);
}

}  // namespace ledgerml::parallel
