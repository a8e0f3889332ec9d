#include <openssl/sha.h>

#include <algorithm>

#include "ledgerml/error.hpp"
#include "ledgerml/ledger.hpp"

namespace ledgerml::ledger {

bool is_valid_item(std::string_view item) noexcept {
  return !item.empty() && std::all_of(item.begin(), item.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

Digest sha256(std::span<const std::uint8_t> data) {
  Digest out{};
  SHA256(data.data(), data.size(), out.data());
  return out;
}

Bytes canonical_block_bytes(std::uint64_t index, std::int64_t timestamp, const Digest& prev_hash,
                            std::span<const Record> records) {
  ByteWriter w;
  w.u64(index);
  w.i64(timestamp);
  w.raw(prev_hash);
  w.u32(static_cast<std::uint32_t>(records.size()));
  for (const auto& r : records) {
    w.u64(r.patient_id);
    w.str(r.item);
  }
  return std::move(w).take();
}

Digest hash_block(std::uint64_t index, std::int64_t timestamp, const Digest& prev_hash,
                  std::span<const Record> records) {
  return sha256(canonical_block_bytes(index, timestamp, prev_hash, records));
}

Block make_genesis(std::int64_t timestamp) {
  Block b;
  b.index = 0;
  b.timestamp = timestamp;
  b.hash = hash_block(b.index, b.timestamp, b.prev_hash, b.records);
  return b;
}

Block make_block(const Block& tip, std::int64_t timestamp, std::vector<Record> records) {
  if (records.empty()) throw Error(Errc::EmptyPayload, "a non-genesis block needs at least one record");
  for (const auto& r : records) {
    if (!is_valid_item(r.item)) throw Error(Errc::InvalidRecord, "invalid item '" + r.item + "'");
  }
  Block b;
  b.index = tip.index + 1;
  b.timestamp = std::max(timestamp, tip.timestamp);
  b.prev_hash = tip.hash;
  b.records = std::move(records);
  b.hash = hash_block(b.index, b.timestamp, b.prev_hash, b.records);
  return b;
}

bool validate_chain(const Chain& chain) {
  if (chain.blocks.empty()) return false;
  const Block& genesis = chain.blocks.front();
  if (genesis.index != 0 || genesis.prev_hash != Digest{}) return false;
  for (std::size_t i = 0; i < chain.blocks.size(); ++i) {
    const Block& b = chain.blocks[i];
    if (i > 0) {
      const Block& prev = chain.blocks[i - 1];
      if (b.index != prev.index + 1 || b.prev_hash != prev.hash || b.timestamp < prev.timestamp) return false;
      if (b.records.empty()) return false;
    }
    if (hash_block(b.index, b.timestamp, b.prev_hash, b.records) != b.hash) return false;
  }
  return true;
}

RecordFilter patient_filter(std::uint64_t patient_id) {
  return [patient_id](const Record& r) { return r.patient_id == patient_id; };
}

RecordFilter item_filter(std::string item) {
  return [item = std::move(item)](const Record& r) { return r.item == item; };
}

std::vector<Record> read_at_rest(const Chain& chain, const RecordFilter& filter) {
  if (!validate_chain(chain)) throw Error(Errc::CorruptChain, "chain failed validation");
  std::vector<Record> out;
  for (const auto& b : chain.blocks) {
    for (const auto& r : b.records) {
      if (!filter || filter(r)) out.push_back(r);
    }
  }
  return out;
}

}  // namespace ledgerml::ledger
