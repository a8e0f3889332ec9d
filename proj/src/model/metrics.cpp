#include <algorithm>

#include "ledgerml/error.hpp"
#include "ledgerml/model.hpp"

namespace ledgerml::model {

bool is_known_metric(std::string_view name) noexcept { return name == "mean_confidence" || name == "coverage"; }

double evaluate_rules(std::span<const arm::AssociationRule> rules, std::span<const arm::ItemTransaction> txns,
                      const MetricSpec& metric) {
  if (metric.name == "mean_confidence") {
    if (rules.empty()) return 0.0;
    const auto scores = arm::score_rules(rules, txns);
    double total = 0.0;
    for (const auto& s : scores) total += s.confidence.value_or(0.0);
    return total / static_cast<double>(scores.size());
  }
  if (metric.name == "coverage") {
    if (txns.empty()) return 0.0;
    std::size_t covered = 0;
    for (const auto& t : txns) {
      const bool fires = std::any_of(rules.begin(), rules.end(), [&](const arm::AssociationRule& r) {
        return std::includes(t.items.begin(), t.items.end(), r.lhs.items.begin(), r.lhs.items.end());
      });
      if (fires) ++covered;
    }
    return static_cast<double>(covered) / static_cast<double>(txns.size());
  }
  throw Error(Errc::UnknownMetric, "unknown metric '" + metric.name + "'");
}

double evaluate_model(const ModelArtifact& artifact, std::span<const arm::ItemTransaction> txns,
                      const MetricSpec& metric) {
  return evaluate_rules(decode_artifact(artifact), txns, metric);
}

}  // namespace ledgerml::model
