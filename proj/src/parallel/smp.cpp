#include <exception>
#include <new>
#include <thread>

#include "ledgerml/error.hpp"
#include "ledgerml/parallel.hpp"

namespace ledgerml::parallel {

std::vector<std::span<const arm::ItemTransaction>> partition_contiguous(std::span<const arm::ItemTransaction> txns,
                                                                        std::size_t parts) {
  if (parts == 0) throw Error(Errc::InvalidParams, "need at least one partition");
  std::vector<std::span<const arm::ItemTransaction>> out;
  out.reserve(parts);
  const std::size_t base = txns.size() / parts;
  const std::size_t extra = txns.size() % parts;
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts; ++p) {
    const std::size_t len = base + (p < extra ? 1 : 0);
    out.push_back(txns.subspan(offset, len));
    offset += len;
  }
  return out;
}

namespace {

/// Threads and their per-thread data. Each thread reads only its own
/// partition; partial counts are merged by the caller after the join.
class ThreadTeam {
 public:
  ThreadTeam(const arm::ItemDictionary& dict, std::span<const arm::ItemTransaction> txns,
             const ThreadPoolConfig& config)
      : config_(config) {
    try {
      for (auto part : partition_contiguous(txns, config.n_threads)) {
        rows_.push_back(arm::encode_transactions(dict, part));
      }
    } catch (const std::bad_alloc&) {
      clean_up();
      throw Error(Errc::OutOfMemory, "cannot allocate thread partitions");
    }
  }

  std::vector<std::uint64_t> count(std::span<const arm::ItemIds> candidates) {
    std::size_t bytes = config_.n_threads * candidates.size() * sizeof(std::uint64_t);
    for (const auto& c : candidates) bytes += c.size() * sizeof(std::uint32_t);
    if (config_.memory_budget_bytes && bytes > *config_.memory_budget_bytes) {
      clean_up();
      throw Error(Errc::OutOfMemory, "level needs " + std::to_string(bytes) + " bytes, budget is " +
                                         std::to_string(*config_.memory_budget_bytes));
    }

    std::vector<std::vector<std::uint64_t>> partial(rows_.size());
    std::vector<std::exception_ptr> failures(rows_.size());
    {
      std::vector<std::jthread> threads;
      threads.reserve(rows_.size());
      for (std::size_t t = 0; t < rows_.size(); ++t) {
        threads.emplace_back([&, t] {
          try {
            partial[t].assign(candidates.size(), 0);
            arm::count_candidates(rows_[t], candidates, partial[t]);
          } catch (...) {
            failures[t] = std::current_exception();
          }
        });
      }
    }  // level barrier: all threads joined

    for (const auto& f : failures) {
      if (!f) continue;
      clean_up();
      try {
        std::rethrow_exception(f);
      } catch (const std::bad_alloc&) {
        throw Error(Errc::OutOfMemory, "thread ran out of memory while counting");
      }
    }

    std::vector<std::uint64_t> merged(candidates.size(), 0);
    for (const auto& p : partial) {
      for (std::size_t c = 0; c < merged.size(); ++c) merged[c] += p[c];
    }
    return merged;
  }

 private:
  void clean_up() noexcept {
    rows_.clear();
    rows_.shrink_to_fit();
  }

  ThreadPoolConfig config_;
  std::vector<std::vector<arm::ItemIds>> rows_;
};

}  // namespace

std::vector<arm::AssociationRule> smp_mine(std::span<const arm::ItemTransaction> txns, const arm::MiningParams& params,
                                           const ThreadPoolConfig& pool) {
  if (pool.n_threads == 0) throw Error(Errc::InvalidParams, "n_threads must be at least 1");
  params.validate();
  if (txns.empty()) throw Error(Errc::EmptyInput, "no transactions to mine");
  const arm::ItemDictionary dict(txns);
  ThreadTeam team(dict, txns, pool);
  const auto table = arm::apriori(dict.size(), txns.size(), params,
                                  [&](std::span<const arm::ItemIds> candidates) { return team.count(candidates); });
  return arm::generate_rules(arm::decode_itemsets(dict, table), txns.size(), params);
}

}  // namespace ledgerml::parallel
