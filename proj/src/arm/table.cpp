#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "ledgerml/arm.hpp"

namespace ledgerml::arm {

std::string format_fixed8(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.8f", value);
  return buf;
}

void write_rule_table_csv(std::ostream& out, std::span<const AssociationRule> rules) {
  std::size_t item_cols = 3;
  for (const auto& r : rules) item_cols = std::max(item_cols, r.size());

  out << "Size of Rule LHS,Size of Rule RHS,Transaction Count,Support(%),Confidence(%),Lift";
  for (std::size_t i = 1; i <= item_cols; ++i) out << ",Item" << i;
  out << ",Rule\n";

  for (const auto& r : rules) {
    out << r.lhs.items.size() << ',' << r.rhs.items.size() << ',' << r.count << ',' << format_fixed8(100.0 * r.support)
        << ',' << format_fixed8(100.0 * r.confidence) << ',' << format_fixed8(r.lift);
    for (const auto& item : r.lhs.items) out << ',' << item;
    for (const auto& item : r.rhs.items) out << ',' << item;
    for (std::size_t pad = r.size(); pad < item_cols; ++pad) out << ',';
    out << ',' << rule_text(r) << '\n';
  }
}

std::string rule_table_csv(std::span<const AssociationRule> rules) {
  std::ostringstream out;
  write_rule_table_csv(out, rules);
  return out.str();
}

}  // namespace ledgerml::arm
