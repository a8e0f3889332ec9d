#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ledgerml/ledger.hpp"

namespace ledgerml::arm {

using Item = std::string;

/// One patient's deduplicated, sorted item set.
struct ItemTransaction {
  std::uint64_t patient_id = 0;
  std::vector<Item> items;

  friend bool operator==(const ItemTransaction&, const ItemTransaction&) = default;
};

/// Sorts and deduplicates `items`.
ItemTransaction make_transaction(std::uint64_t patient_id, std::vector<Item> items);

struct Itemset {
  std::vector<Item> items;  // strictly sorted
  std::uint64_t count = 0;

  friend bool operator==(const Itemset&, const Itemset&) = default;
};

struct AssociationRule {
  Itemset lhs;
  Itemset rhs;
  std::uint64_t count = 0;  // transactions containing lhs ∪ rhs
  double support = 0.0;     // count / N
  double confidence = 0.0;  // count / lhs.count
  double lift = 0.0;        // confidence / (rhs.count / N)

  [[nodiscard]] std::size_t size() const noexcept { return lhs.items.size() + rhs.items.size(); }
  friend bool operator==(const AssociationRule&, const AssociationRule&) = default;
};

/// "a & b ==> c"
std::string rule_text(const AssociationRule& rule);

struct MiningParams {
  double min_support = 0.20;
  double min_confidence = 0.70;
  std::size_t max_rule_items = 3;  // bounds |lhs| + |rhs|

  /// Throws InvalidParams when a field is out of range.
  void validate() const;
};

/// Fills support, confidence and lift from the integer counts.
AssociationRule make_rule(Itemset lhs, Itemset rhs, std::uint64_t count, std::uint64_t n_transactions);

bool meets_support(std::uint64_t count, std::uint64_t n_transactions, double min_support) noexcept;
bool meets_confidence(std::uint64_t count, std::uint64_t lhs_count, double min_confidence) noexcept;

/// One transaction per distinct patient, in ascending patient order.
std::vector<ItemTransaction> group_transactions(std::span<const ledger::Record> records);

// ---------------------------------------------------------------------------
// Level-wise Apriori machinery. Items are mapped to dense ids in lexicographic
// order, so sorted id vectors and sorted item vectors agree.

using ItemIds = std::vector<std::uint32_t>;
using CountTable = std::map<ItemIds, std::uint64_t>;

class ItemDictionary {
 public:
  ItemDictionary() = default;
  explicit ItemDictionary(std::span<const ItemTransaction> txns);
  /// Sorts and deduplicates.
  explicit ItemDictionary(std::vector<Item> items);

  [[nodiscard]] std::size_t size() const noexcept { return items_.size(); }
  [[nodiscard]] const Item& item(std::uint32_t id) const { return items_.at(id); }
  [[nodiscard]] std::optional<std::uint32_t> find(std::string_view item) const;
  [[nodiscard]] ItemIds encode(std::span<const Item> items) const;
  [[nodiscard]] std::vector<Item> decode(const ItemIds& ids) const;

 private:
  std::vector<Item> items_;
};

/// Transactions as sorted id rows against a shared dictionary.
std::vector<ItemIds> encode_transactions(const ItemDictionary& dict, std::span<const ItemTransaction> txns);

/// Size-1 candidates: every item in the dictionary.
std::vector<ItemIds> singleton_candidates(std::size_t n_items);

/// Joins frequent (k-1)-itemsets sharing a (k-2)-prefix and drops any candidate
/// with an infrequent (k-1)-subset. Input must be sorted; output is sorted.
std::vector<ItemIds> generate_candidates(std::span<const ItemIds> frequent_prev);

/// Adds, for each candidate, the number of rows containing it.
void count_candidates(std::span<const ItemIds> rows, std::span<const ItemIds> candidates,
                      std::span<std::uint64_t> counts);

/// Returns per-candidate counts over the whole dataset for one level.
using LevelCounter = std::function<std::vector<std::uint64_t>(std::span<const ItemIds> candidates)>;

/// Drives Apriori levels 1..max_rule_items, delegating counting. Returns the
/// frequent itemsets with their exact counts.
CountTable apriori(std::size_t n_items, std::uint64_t n_transactions, const MiningParams& params,
                   const LevelCounter& counter);

std::vector<Itemset> decode_itemsets(const ItemDictionary& dict, const CountTable& table);

// ---------------------------------------------------------------------------
// Pipeline

/// Throws EmptyInput when txns is empty.
std::vector<Itemset> mine_frequent_itemsets(std::span<const ItemTransaction> txns, const MiningParams& params);

/// All rules over the frequent itemsets, sorted by (support, rule text).
/// Throws MissingSubset if a needed subset count is absent.
std::vector<AssociationRule> generate_rules(std::span<const Itemset> frequent, std::uint64_t n_transactions,
                                            const MiningParams& params);

/// mine_frequent_itemsets followed by generate_rules.
std::vector<AssociationRule> mine_rules(std::span<const ItemTransaction> txns, const MiningParams& params);

/// Output order: support ascending, then rule text ascending.
void sort_rules(std::vector<AssociationRule>& rules);

struct RuleScore {
  std::uint64_t lhs_hits = 0;
  std::uint64_t both_hits = 0;
  std::optional<double> confidence;  // empty when lhs never fires

  friend bool operator==(const RuleScore&, const RuleScore&) = default;
};

/// Empirical confidence of each rule on `txns`.
std::vector<RuleScore> score_rules(std::span<const AssociationRule> rules, std::span<const ItemTransaction> txns);

// ---------------------------------------------------------------------------
// Rule table CSV

/// Percentages carry 8 decimals; Item columns are lhs items then rhs items.
void write_rule_table_csv(std::ostream& out, std::span<const AssociationRule> rules);
std::string rule_table_csv(std::span<const AssociationRule> rules);
std::string format_fixed8(double value);

}  // namespace ledgerml::arm
