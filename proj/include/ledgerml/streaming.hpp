#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "ledgerml/arm.hpp"
#include "ledgerml/ledger.hpp"
#include "ledgerml/lifecycle.hpp"
#include "ledgerml/model.hpp"

namespace ledgerml::streaming {

struct EvictionReport {
  std::optional<arm::ItemTransaction> evicted;
  std::uint64_t generation = 0;  // total ingested, including this one
};

/// Consistent copy of the window at one point between ingests.
struct WindowSnapshot {
  std::size_t capacity = 0;
  std::uint64_t generation = 0;
  std::uint64_t evicted = 0;
  std::vector<arm::ItemTransaction> buffer;  // oldest first
  std::map<arm::Item, std::uint64_t> item_counts;
};

/// FIFO window over the most recent `capacity` transactions. One writer
/// ingests; any number of readers take snapshots.
class SlidingWindow {
 public:
  /// Throws InvalidParams when capacity is 0.
  explicit SlidingWindow(std::size_t capacity);

  EvictionReport ingest(arm::ItemTransaction txn);

  [[nodiscard]] WindowSnapshot snapshot() const;
  [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] std::uint64_t generation() const;
  [[nodiscard]] std::uint64_t evicted() const;

 private:
  mutable std::mutex mu_;
  std::size_t capacity_;
  std::deque<arm::ItemTransaction> buffer_;
  std::map<arm::Item, std::uint64_t> item_counts_;  // level-1 counts of the buffer
  std::uint64_t generation_ = 0;
  std::uint64_t evicted_ = 0;
};

/// Batch mining of exactly the buffered transactions, reusing the maintained
/// level-1 counts. Throws EmptyWindow.
std::vector<arm::AssociationRule> query_window(const WindowSnapshot& snapshot, const arm::MiningParams& params);
std::vector<arm::AssociationRule> query_window(const SlidingWindow& window, const arm::MiningParams& params);

/// Model score on the current buffer; empty when the window holds nothing.
std::optional<double> validate_in_window(const SlidingWindow& window, const model::ModelArtifact& artifact,
                                         const model::MetricSpec& metric = {});

// ---------------------------------------------------------------------------
// Transaction streams

enum class StreamState { Ok, Empty, Error };
enum class Pull { Item, End, Error };

class TransactionSource {
 public:
  virtual ~TransactionSource() = default;
  /// State before consumption starts.
  virtual StreamState state() const = 0;
  virtual Pull pull(arm::ItemTransaction& out) = 0;
};

/// In-memory source; optionally reports an error after `fail_after` items.
class VectorSource final : public TransactionSource {
 public:
  explicit VectorSource(std::vector<arm::ItemTransaction> txns, std::optional<std::size_t> fail_after = std::nullopt,
                        bool broken = false)
      : txns_(std::move(txns)), fail_after_(fail_after), broken_(broken) {}

  StreamState state() const override;
  Pull pull(arm::ItemTransaction& out) override;

 private:
  std::vector<arm::ItemTransaction> txns_;
  std::optional<std::size_t> fail_after_;
  bool broken_;
  std::size_t pos_ = 0;
};

/// Groups a ledger subscription's records into transactions: consecutive
/// records of one patient form one transaction. Ends when the store is sealed
/// and drained, or after `idle_timeout` without new records.
class LedgerSource final : public TransactionSource {
 public:
  LedgerSource(ledger::Subscription subscription, std::chrono::milliseconds idle_timeout)
      : sub_(std::move(subscription)), idle_timeout_(idle_timeout) {}

  StreamState state() const override { return StreamState::Ok; }
  Pull pull(arm::ItemTransaction& out) override;

 private:
  ledger::Subscription sub_;
  std::chrono::milliseconds idle_timeout_;
  std::optional<ledger::Record> lookahead_;
};

struct StreamValidation {
  lifecycle::Status status;
  std::vector<double> scores;  // one per ingested transaction
};

/// Ingests the stream into the window and re-scores the model after each
/// transaction. An errored or empty stream returns immediately without
/// scores; an error mid-stream keeps the scores so far and reports StreamError.
StreamValidation validate_stream(SlidingWindow& window, TransactionSource& source,
                                 const model::ModelArtifact& artifact, const model::MetricSpec& metric = {});

/// Continuous-query output: one CSV row per rule per tick.
void write_query_header(std::ostream& out);
void write_query_tick(std::ostream& out, std::uint64_t tick, const WindowSnapshot& snapshot,
                      std::span<const arm::AssociationRule> rules);

}  // namespace ledgerml::streaming
