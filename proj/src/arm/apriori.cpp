#include <algorithm>
#include <map>

#include "ledgerml/arm.hpp"
#include "ledgerml/error.hpp"

namespace ledgerml::arm {

ItemTransaction make_transaction(std::uint64_t patient_id, std::vector<Item> items) {
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  return {patient_id, std::move(items)};
}

void MiningParams::validate() const {
  if (!(min_support > 0.0 && min_support <= 1.0)) throw Error(Errc::InvalidParams, "min_support must be in (0, 1]");
  if (!(min_confidence > 0.0 && min_confidence <= 1.0)) {
    throw Error(Errc::InvalidParams, "min_confidence must be in (0, 1]");
  }
  if (max_rule_items < 2) throw Error(Errc::InvalidParams, "max_rule_items must be at least 2");
}

bool meets_support(std::uint64_t count, std::uint64_t n_transactions, double min_support) noexcept {
  return n_transactions > 0 && static_cast<double>(count) / static_cast<double>(n_transactions) >= min_support;
}

bool meets_confidence(std::uint64_t count, std::uint64_t lhs_count, double min_confidence) noexcept {
  return lhs_count > 0 && static_cast<double>(count) / static_cast<double>(lhs_count) >= min_confidence;
}

std::vector<ItemTransaction> group_transactions(std::span<const ledger::Record> records) {
  std::map<std::uint64_t, std::vector<Item>> by_patient;
  for (const auto& r : records) by_patient[r.patient_id].push_back(r.item);
  std::vector<ItemTransaction> out;
  out.reserve(by_patient.size());
  for (auto& [id, items] : by_patient) out.push_back(make_transaction(id, std::move(items)));
  return out;
}

ItemDictionary::ItemDictionary(std::span<const ItemTransaction> txns) {
  for (const auto& t : txns) items_.insert(items_.end(), t.items.begin(), t.items.end());
  std::sort(items_.begin(), items_.end());
  items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
}

ItemDictionary::ItemDictionary(std::vector<Item> items) : items_(std::move(items)) {
  std::sort(items_.begin(), items_.end());
  items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
}

std::optional<std::uint32_t> ItemDictionary::find(std::string_view item) const {
  auto it = std::lower_bound(items_.begin(), items_.end(), item);
  if (it == items_.end() || *it != item) return std::nullopt;
  return static_cast<std::uint32_t>(it - items_.begin());
}

ItemIds ItemDictionary::encode(std::span<const Item> items) const {
  ItemIds ids;
  ids.reserve(items.size());
  for (const auto& item : items) {
    auto id = find(item);
    if (!id) throw Error(Errc::InvalidParams, "item '" + item + "' is not in the dictionary");
    ids.push_back(*id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<Item> ItemDictionary::decode(const ItemIds& ids) const {
  std::vector<Item> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(items_.at(id));
  return out;
}

std::vector<ItemIds> encode_transactions(const ItemDictionary& dict, std::span<const ItemTransaction> txns) {
  std::vector<ItemIds> rows;
  rows.reserve(txns.size());
  for (const auto& t : txns) rows.push_back(dict.encode(t.items));
  return rows;
}

std::vector<ItemIds> singleton_candidates(std::size_t n_items) {
  std::vector<ItemIds> out;
  out.reserve(n_items);
  for (std::uint32_t i = 0; i < n_items; ++i) out.push_back({i});
  return out;
}

std::vector<ItemIds> generate_candidates(std::span<const ItemIds> frequent_prev) {
  std::vector<ItemIds> out;
  if (frequent_prev.empty()) return out;
  const std::size_t k_minus_1 = frequent_prev.front().size();
  auto is_frequent = [&](const ItemIds& s) {
    return std::binary_search(frequent_prev.begin(), frequent_prev.end(), s);
  };
  for (std::size_t i = 0; i < frequent_prev.size(); ++i) {
    const ItemIds& a = frequent_prev[i];
    for (std::size_t j = i + 1; j < frequent_prev.size(); ++j) {
      const ItemIds& b = frequent_prev[j];
      if (!std::equal(a.begin(), a.end() - 1, b.begin(), b.end() - 1)) break;
      ItemIds cand = a;
      cand.push_back(b.back());
      // Downward closure: drop candidates with an infrequent (k-1)-subset.
      bool keep = true;
      ItemIds sub(k_minus_1);
      for (std::size_t skip = 0; skip + 2 < cand.size() && keep; ++skip) {
        std::size_t w = 0;
        for (std::size_t r = 0; r < cand.size(); ++r) {
          if (r != skip) sub[w++] = cand[r];
        }
        keep = is_frequent(sub);
      }
      if (keep) out.push_back(std::move(cand));
    }
  }
  return out;
}

void count_candidates(std::span<const ItemIds> rows, std::span<const ItemIds> candidates,
                      std::span<std::uint64_t> counts) {
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (std::includes(row.begin(), row.end(), candidates[c].begin(), candidates[c].end())) ++counts[c];
    }
  }
}

CountTable apriori(std::size_t n_items, std::uint64_t n_transactions, const MiningParams& params,
                   const LevelCounter& counter) {
  params.validate();
  if (n_transactions == 0) throw Error(Errc::EmptyInput, "no transactions to mine");
  CountTable frequent;
  std::vector<ItemIds> candidates = singleton_candidates(n_items);
  for (std::size_t k = 1; k <= params.max_rule_items && !candidates.empty(); ++k) {
    const std::vector<std::uint64_t> counts = counter(candidates);
    std::vector<ItemIds> level;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (meets_support(counts[c], n_transactions, params.min_support)) {
        frequent.emplace(candidates[c], counts[c]);
        level.push_back(candidates[c]);
      }
    }
    if (k == params.max_rule_items) break;
    candidates = generate_candidates(level);
  }
  return frequent;
}

std::vector<Itemset> decode_itemsets(const ItemDictionary& dict, const CountTable& table) {
  std::vector<Itemset> out;
  out.reserve(table.size());
  for (const auto& [ids, count] : table) out.push_back(Itemset{dict.decode(ids), count});
  return out;
}

std::vector<Itemset> mine_frequent_itemsets(std::span<const ItemTransaction> txns, const MiningParams& params) {
  if (txns.empty()) throw Error(Errc::EmptyInput, "no transactions to mine");
  const ItemDictionary dict(txns);
  const std::vector<ItemIds> rows = encode_transactions(dict, txns);
  const CountTable table = apriori(dict.size(), rows.size(), params, [&](std::span<const ItemIds> candidates) {
    std::vector<std::uint64_t> counts(candidates.size(), 0);
    count_candidates(rows, candidates, counts);
    return counts;
  });
  return decode_itemsets(dict, table);
}

std::vector<AssociationRule> mine_rules(std::span<const ItemTransaction> txns, const MiningParams& params) {
  const auto frequent = mine_frequent_itemsets(txns, params);
  return generate_rules(frequent, txns.size(), params);
}

}  // namespace ledgerml::arm
