#include <chrono>

#include "ledgerml/error.hpp"
#include "ledgerml/ledger.hpp"

namespace ledgerml::ledger {

std::int64_t SystemClock::now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::int64_t ManualClock::now_ms() {
  std::lock_guard lock(mu_);
  const auto t = next_;
  next_ += step_;
  return t;
}

ChainStore::ChainStore(Chain chain) : chain_(std::move(chain)) {
  if (chain_.blocks.empty()) throw Error(Errc::CorruptChain, "a chain store needs at least the genesis block");
}

Chain ChainStore::snapshot() const {
  std::lock_guard lock(mu_);
  return chain_;
}

std::size_t ChainStore::size() const {
  std::lock_guard lock(mu_);
  return chain_.blocks.size();
}

Block ChainStore::tip() const {
  std::lock_guard lock(mu_);
  return chain_.blocks.back();
}

void ChainStore::append(const Block& block) {
  {
    std::lock_guard lock(mu_);
    const Block& tip = chain_.blocks.back();
    if (block.index != tip.index + 1 || block.prev_hash != tip.hash ||
        hash_block(block.index, block.timestamp, block.prev_hash, block.records) != block.hash) {
      throw Error(Errc::CorruptChain, "block does not extend the current tip");
    }
    chain_.blocks.push_back(block);
  }
  appended_.notify_all();
}

void ChainStore::seal() {
  {
    std::lock_guard lock(mu_);
    sealed_ = true;
  }
  appended_.notify_all();
}

bool ChainStore::sealed() const {
  std::lock_guard lock(mu_);
  return sealed_;
}

Subscription ChainStore::subscribe(std::uint64_t from_block) {
  std::lock_guard lock(mu_);
  if (from_block > chain_.tip_index()) {
    throw Error(Errc::OutOfRange, "subscription start " + std::to_string(from_block) + " is past the tip " +
                                      std::to_string(chain_.tip_index()));
  }
  return Subscription(shared_from_this(), from_block);
}

bool Subscription::pull_locked() {
  const auto& blocks = store_->chain_.blocks;
  bool pulled = false;
  while (next_block_ < blocks.size()) {
    const auto& recs = blocks[next_block_].records;
    pending_.insert(pending_.end(), recs.begin(), recs.end());
    ++next_block_;
    pulled = true;
  }
  return pulled;
}

std::optional<Record> Subscription::try_next() {
  if (pending_.empty()) {
    std::lock_guard lock(store_->mu_);
    pull_locked();
  }
  if (pending_.empty()) return std::nullopt;
  Record r = std::move(pending_.front());
  pending_.pop_front();
  return r;
}

std::optional<Record> Subscription::next(std::chrono::milliseconds timeout) {
  if (pending_.empty()) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    std::unique_lock lock(store_->mu_);
    while (pending_.empty()) {
      pull_locked();
      if (!pending_.empty() || store_->sealed_) break;
      if (store_->appended_.wait_until(lock, deadline) == std::cv_status::timeout) {
        pull_locked();
        break;
      }
    }
  }
  if (pending_.empty()) return std::nullopt;
  Record r = std::move(pending_.front());
  pending_.pop_front();
  return r;
}

std::vector<Record> Subscription::drain() {
  {
    std::lock_guard lock(store_->mu_);
    pull_locked();
  }
  std::vector<Record> out(std::make_move_iterator(pending_.begin()), std::make_move_iterator(pending_.end()));
  pending_.clear();
  return out;
}

}  // namespace ledgerml::ledger
