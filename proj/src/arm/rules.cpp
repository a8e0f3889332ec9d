#include <algorithm>
#include <map>

#include "ledgerml/arm.hpp"
#include "ledgerml/error.hpp"

namespace ledgerml::arm {

namespace {

std::string join(const std::vector<Item>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

std::string rule_text(const AssociationRule& rule) {
  return join(rule.lhs.items, " & ") + " ==> " + join(rule.rhs.items, " & ");
}

AssociationRule make_rule(Itemset lhs, Itemset rhs, std::uint64_t count, std::uint64_t n_transactions) {
  AssociationRule r;
  const double n = static_cast<double>(n_transactions);
  r.support = static_cast<double>(count) / n;
  r.confidence = static_cast<double>(count) / static_cast<double>(lhs.count);
  r.lift = r.confidence / (static_cast<double>(rhs.count) / n);
  r.count = count;
  r.lhs = std::move(lhs);
  r.rhs = std::move(rhs);
  return r;
}

void sort_rules(std::vector<AssociationRule>& rules) {
  std::vector<std::pair<std::string, std::size_t>> keys;
  keys.reserve(rules.size());
  for (std::size_t i = 0; i < rules.size(); ++i) keys.emplace_back(rule_text(rules[i]), i);
  std::sort(keys.begin(), keys.end(), [&](const auto& a, const auto& b) {
    const auto ca = rules[a.second].count;
    const auto cb = rules[b.second].count;
    if (ca != cb) return ca < cb;
    return a.first < b.first;
  });
  std::vector<AssociationRule> sorted;
  sorted.reserve(rules.size());
  for (const auto& [text, i] : keys) sorted.push_back(std::move(rules[i]));
  rules = std::move(sorted);
}

std::vector<AssociationRule> generate_rules(std::span<const Itemset> frequent, std::uint64_t n_transactions,
                                            const MiningParams& params) {
  params.validate();
  std::map<std::vector<Item>, std::uint64_t> counts;
  for (const auto& s : frequent) counts.emplace(s.items, s.count);

  auto lookup = [&](const std::vector<Item>& items) {
    auto it = counts.find(items);
    if (it == counts.end()) {
      throw Error(Errc::MissingSubset, "no count for subset {" + join(items, ",") + "}");
    }
    return it->second;
  };

  std::vector<AssociationRule> rules;
  for (const auto& s : frequent) {
    const std::size_t k = s.items.size();
    if (k < 2 || k > params.max_rule_items) continue;
    // Every non-empty proper subset is a candidate antecedent.
    for (std::uint32_t mask = 1; mask + 1 < (1u << k); ++mask) {
      Itemset lhs;
      Itemset rhs;
      for (std::size_t b = 0; b < k; ++b) ((mask >> b) & 1u ? lhs : rhs).items.push_back(s.items[b]);
      lhs.count = lookup(lhs.items);
      if (!meets_confidence(s.count, lhs.count, params.min_confidence)) continue;
      rhs.count = lookup(rhs.items);
      rules.push_back(make_rule(std::move(lhs), std::move(rhs), s.count, n_transactions));
    }
  }
  sort_rules(rules);
  return rules;
}

std::vector<RuleScore> score_rules(std::span<const AssociationRule> rules, std::span<const ItemTransaction> txns) {
  std::vector<RuleScore> out(rules.size());
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto& lhs = rules[i].lhs.items;
    const auto& rhs = rules[i].rhs.items;
    RuleScore& s = out[i];
    for (const auto& t : txns) {
      if (!std::includes(t.items.begin(), t.items.end(), lhs.begin(), lhs.end())) continue;
      ++s.lhs_hits;
      if (std::includes(t.items.begin(), t.items.end(), rhs.begin(), rhs.end())) ++s.both_hits;
    }
    if (s.lhs_hits > 0) s.confidence = static_cast<double>(s.both_hits) / static_cast<double>(s.lhs_hits);
  }
  return out;
}

}  // namespace ledgerml::arm
