#pragma once

// Test-only reference implementations. Nothing here calls the mining code
// under test.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ledgerml/arm.hpp"
#include "ledgerml/error.hpp"

namespace oracle {

using ledgerml::arm::AssociationRule;
using ledgerml::arm::ItemTransaction;
using ledgerml::arm::MiningParams;

inline std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
  return s;
}

inline std::string text_of(const AssociationRule& r) {
  return join(r.lhs.items, " & ") + " ==> " + join(r.rhs.items, " & ");
}

/// Exhaustive rule enumeration over item bitmasks. Throws TooLarge beyond
/// 20 distinct items or 2000 transactions.
inline std::vector<AssociationRule> brute_force_rules(std::span<const ItemTransaction> txns, const MiningParams& p) {
  std::set<std::string> universe;
  for (const auto& t : txns) universe.insert(t.items.begin(), t.items.end());
  if (universe.size() > 20 || txns.size() > 2000) {
    throw ledgerml::Error(ledgerml::Errc::TooLarge, "brute force guard");
  }
  const std::vector<std::string> items(universe.begin(), universe.end());
  const std::size_t n_items = items.size();
  const double n = static_cast<double>(txns.size());

  std::map<std::uint32_t, std::uint64_t> count;
  for (const auto& t : txns) {
    std::uint32_t m = 0;
    for (const auto& it : t.items) m |= 1u << (std::lower_bound(items.begin(), items.end(), it) - items.begin());
    // every non-empty submask
    for (std::uint32_t s = m; s; s = (s - 1) & m) {
      if (static_cast<std::size_t>(std::popcount(s)) <= p.max_rule_items) ++count[s];
    }
  }

  auto decode = [&](std::uint32_t m) {
    std::vector<std::string> v;
    for (std::size_t i = 0; i < n_items; ++i) {
      if (m >> i & 1u) v.push_back(items[i]);
    }
    return v;
  };

  std::vector<AssociationRule> rules;
  for (const auto& [x, cx] : count) {
    if (std::popcount(x) < 2) continue;
    if (static_cast<double>(cx) / n < p.min_support) continue;
    for (std::uint32_t l = (x - 1) & x; l; l = (l - 1) & x) {
      const std::uint32_t r = x & ~l;
      const double conf = static_cast<double>(cx) / static_cast<double>(count.at(l));
      if (conf < p.min_confidence) continue;
      AssociationRule rule;
      rule.lhs = {decode(l), count.at(l)};
      rule.rhs = {decode(r), count.at(r)};
      rule.count = cx;
      rule.support = static_cast<double>(cx) / n;
      rule.confidence = conf;
      rule.lift = conf * n / static_cast<double>(count.at(r));
      rules.push_back(std::move(rule));
    }
  }
  std::sort(rules.begin(), rules.end(), [](const AssociationRule& a, const AssociationRule& b) {
    if (a.count != b.count) return a.count < b.count;
    return text_of(a) < text_of(b);
  });
  return rules;
}

/// Transactions containing every item of `items`.
inline std::uint64_t recount(std::span<const ItemTransaction> txns, const std::vector<std::string>& items) {
  std::uint64_t c = 0;
  for (const auto& t : txns) {
    bool all = true;
    for (const auto& it : items) all = all && std::find(t.items.begin(), t.items.end(), it) != t.items.end();
    c += all;
  }
  return c;
}

inline bool rel_close(double a, double b, double tol = 1e-9) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= tol * scale;
}

/// Same rules with the same integer counts and statistics within `tol`.
inline bool rules_match(std::span<const AssociationRule> got, std::span<const AssociationRule> want,
                        double tol = 1e-9) {
  if (got.size() != want.size()) return false;
  for (std::size_t i = 0; i < got.size(); ++i) {
    const auto& a = got[i];
    const auto& b = want[i];
    if (a.lhs != b.lhs || a.rhs != b.rhs || a.count != b.count) return false;
    if (!rel_close(a.support, b.support, tol) || !rel_close(a.confidence, b.confidence, tol) ||
        !rel_close(a.lift, b.lift, tol)) {
      return false;
    }
  }
  return true;
}

}  // namespace oracle
