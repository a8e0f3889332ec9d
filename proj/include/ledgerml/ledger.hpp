#pragma once

#include <array>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ledgerml/bytes.hpp"

namespace ledgerml::ledger {

using Digest = std::array<std::uint8_t, 32>;

/// One prescription row: a patient and a single drug.
struct Record {
  std::uint64_t patient_id = 0;
  std::string item;

  friend bool operator==(const Record&, const Record&) = default;
};

/// Items are non-empty runs of lowercase ASCII letters.
bool is_valid_item(std::string_view item) noexcept;

Digest sha256(std::span<const std::uint8_t> data);

/// Canonical byte encoding hashed into a block. Layout (all integers
/// big-endian), documented in docs/block-encoding.md:
///   u64 index | i64 timestamp | 32 bytes prev_hash | u32 record count |
///   per record: u64 patient_id | u32 item length | item bytes
Bytes canonical_block_bytes(std::uint64_t index, std::int64_t timestamp, const Digest& prev_hash,
                            std::span<const Record> records);

Digest hash_block(std::uint64_t index, std::int64_t timestamp, const Digest& prev_hash,
                  std::span<const Record> records);

struct Block {
  std::uint64_t index = 0;
  std::int64_t timestamp = 0;  // ms since epoch
  Digest prev_hash{};
  std::vector<Record> records;
  Digest hash{};

  friend bool operator==(const Block&, const Block&) = default;
};

Block make_genesis(std::int64_t timestamp);

/// Builds and hashes the successor of `tip`.
Block make_block(const Block& tip, std::int64_t timestamp, std::vector<Record> records);

struct Chain {
  std::vector<Block> blocks;

  [[nodiscard]] std::uint64_t tip_index() const { return blocks.empty() ? 0 : blocks.back().index; }
  friend bool operator==(const Chain&, const Chain&) = default;
};

/// True iff the chain is non-empty, starts at a genesis block, every link and
/// index step is intact, timestamps never decrease, only genesis is empty, and
/// every stored hash recomputes.
bool validate_chain(const Chain& chain);

using RecordFilter = std::function<bool(const Record&)>;

RecordFilter patient_filter(std::uint64_t patient_id);
RecordFilter item_filter(std::string item);

/// All records in block order then intra-block order. Throws CorruptChain if
/// the chain does not validate.
std::vector<Record> read_at_rest(const Chain& chain, const RecordFilter& filter = {});

// ---------------------------------------------------------------------------
// Clocks

class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ms() = 0;
};

class SystemClock final : public Clock {
 public:
  std::int64_t now_ms() override;
};

/// Deterministic clock: returns `start`, then advances by `step` per call.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(std::int64_t start = 0, std::int64_t step = 1) : next_(start), step_(step) {}
  std::int64_t now_ms() override;

 private:
  std::mutex mu_;
  std::int64_t next_;
  std::int64_t step_;
};

// ---------------------------------------------------------------------------
// Concurrent chain storage and subscriptions

class Subscription;

/// Thread-safe append-only chain. Appends publish whole blocks under a lock so
/// readers and subscribers never observe a partial block.
class ChainStore : public std::enable_shared_from_this<ChainStore> {
 public:
  explicit ChainStore(Chain chain);

  [[nodiscard]] Chain snapshot() const;
  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] Block tip() const;

  /// Appends a block that must link to the current tip (throws CorruptChain otherwise).
  void append(const Block& block);

  /// Marks the store as finished; subscribers drain and then end.
  void seal();
  [[nodiscard]] bool sealed() const;

  /// Records from block `from_block` onward, then those of future appends.
  /// Throws OutOfRange when from_block > tip index.
  Subscription subscribe(std::uint64_t from_block);

 private:
  friend class Subscription;

  mutable std::mutex mu_;
  std::condition_variable appended_;
  Chain chain_;
  bool sealed_ = false;
};

class Subscription {
 public:
  /// Next record if one is already available.
  std::optional<Record> try_next();
  /// Blocks until a record arrives, the store is sealed and drained, or the timeout elapses.
  std::optional<Record> next(std::chrono::milliseconds timeout);
  /// Drains everything currently available without waiting.
  std::vector<Record> drain();

  [[nodiscard]] std::uint64_t next_block() const noexcept { return next_block_; }

 private:
  friend class ChainStore;
  Subscription(std::shared_ptr<ChainStore> store, std::uint64_t from_block)
      : store_(std::move(store)), next_block_(from_block) {}

  // Caller holds store_->mu_.
  bool pull_locked();

  std::shared_ptr<ChainStore> store_;
  std::uint64_t next_block_;
  std::deque<Record> pending_;
};

// ---------------------------------------------------------------------------
// Members and replication

enum class Role { Leader, Follower };

struct MemberNode {
  std::string node_id;
  Role role = Role::Follower;
  std::shared_ptr<ChainStore> chain;
};

/// Pluggable ordering/replication step run by the leader after it appends.
class ConsensusStrategy {
 public:
  virtual ~ConsensusStrategy() = default;
  virtual void replicate(const Block& block, std::span<MemberNode> followers) = 0;
};

/// Synchronous single-leader replication: every follower appends the block
/// before the leader's append returns.
class LeaderReplication final : public ConsensusStrategy {
 public:
  void replicate(const Block& block, std::span<MemberNode> followers) override;
};

/// In-process permissioned network. The first member is the leader.
class Network {
 public:
  Network(const std::vector<std::string>& member_ids, std::shared_ptr<Clock> clock,
          std::unique_ptr<ConsensusStrategy> consensus = std::make_unique<LeaderReplication>());

  [[nodiscard]] const MemberNode& leader() const { return members_.front(); }
  [[nodiscard]] const MemberNode& member(std::string_view node_id) const;
  [[nodiscard]] std::span<const MemberNode> members() const { return members_; }

  /// Throws NotLeader when node_id is a follower and EmptyPayload on no records.
  Block append_block(std::string_view node_id, std::vector<Record> records);

  /// True iff every member holds exactly the leader's chain.
  [[nodiscard]] bool converged() const;

 private:
  std::vector<MemberNode> members_;
  std::shared_ptr<Clock> clock_;
  std::unique_ptr<ConsensusStrategy> consensus_;
  std::mutex append_mu_;
};

// ---------------------------------------------------------------------------
// Persistence: one JSON object per line, one block per line.

std::string block_to_json_line(const Block& block);
Block block_from_json_line(std::string_view line);

void write_chain(std::ostream& out, const Chain& chain);
Chain read_chain(std::istream& in);
void save_chain(const std::filesystem::path& path, const Chain& chain);
Chain load_chain(const std::filesystem::path& path);

/// CSV with header `patient,drug`.
std::vector<Record> read_records_csv(std::istream& in);
void write_records_csv(std::ostream& out, std::span<const Record> records);

}  // namespace ledgerml::ledger
