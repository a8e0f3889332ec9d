#pragma once

// Hand-rolled generators for property tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ledgerml/arm.hpp"
#include "ledgerml/ledger.hpp"

namespace gen {

using Rng = std::mt19937_64;

inline std::uint64_t below(Rng& rng, std::uint64_t n) { return rng() % n; }
inline double unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
inline double between(Rng& rng, double lo, double hi) { return lo + (hi - lo) * unit(rng); }

/// Item names "ia", "ib", ... in lexicographic order of their index.
inline std::string item_name(std::size_t i) {
  std::string s = "i";
  s += static_cast<char>('a' + i / 26);
  s += static_cast<char>('a' + i % 26);
  return s;
}

/// Each item is present independently with a per-item probability, so some
/// items are popular and itemsets of size 3 show up.
inline std::vector<ledgerml::arm::ItemTransaction> transactions(Rng& rng, std::size_t n_items, std::size_t n_txns) {
  std::vector<double> p(n_items);
  for (auto& x : p) x = between(rng, 0.1, 0.9);
  std::vector<ledgerml::arm::ItemTransaction> out;
  for (std::size_t t = 0; t < n_txns; ++t) {
    std::vector<std::string> items;
    for (std::size_t i = 0; i < n_items; ++i) {
      if (unit(rng) < p[i]) items.push_back(item_name(i));
    }
    if (items.empty()) items.push_back(item_name(below(rng, n_items)));
    out.push_back(ledgerml::arm::make_transaction(t, std::move(items)));
  }
  return out;
}

inline ledgerml::arm::MiningParams params(Rng& rng) {
  ledgerml::arm::MiningParams p;
  p.min_support = between(rng, 0.05, 0.6);
  p.min_confidence = between(rng, 0.3, 0.95);
  p.max_rule_items = 2 + below(rng, 3);
  return p;
}

inline std::vector<ledgerml::ledger::Record> records(Rng& rng, std::size_t n_patients, std::size_t per_patient,
                                                     std::size_t n_items) {
  std::vector<ledgerml::ledger::Record> out;
  for (std::size_t p = 0; p < n_patients; ++p) {
    for (std::size_t k = 0; k < per_patient; ++k) out.push_back({p, item_name(below(rng, n_items))});
  }
  return out;
}

/// Arbitrary well-formed rules (statistics need not be consistent with any data).
inline std::vector<ledgerml::arm::AssociationRule> rules(Rng& rng, std::size_t max_rules) {
  std::vector<ledgerml::arm::AssociationRule> out(below(rng, max_rules + 1));
  for (auto& r : out) {
    const std::size_t total = 2 + below(rng, 4);
    std::vector<std::string> pool;
    for (std::size_t i = 0; i < 30; ++i) pool.push_back(item_name(i));
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t split = 1 + below(rng, total - 1);
    r.lhs.items.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(split));
    r.rhs.items.assign(pool.begin() + static_cast<std::ptrdiff_t>(split),
                       pool.begin() + static_cast<std::ptrdiff_t>(total));
    std::sort(r.lhs.items.begin(), r.lhs.items.end());
    std::sort(r.rhs.items.begin(), r.rhs.items.end());
    r.count = below(rng, 1'000'000);
    r.lhs.count = r.count + below(rng, 1000);
    r.rhs.count = r.count + below(rng, 1000);
    // raw bit patterns exercise exact double round-tripping
    r.support = unit(rng);
    r.confidence = std::ldexp(unit(rng), -static_cast<int>(below(rng, 40)));
    r.lift = between(rng, 0.0, 50.0) + 1e-300 * static_cast<double>(below(rng, 3));
  }
  return out;
}

}  // namespace gen
