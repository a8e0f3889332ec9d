#include <algorithm>
#include <random>

#include "ledgerml/experiment.hpp"

namespace ledgerml::experiment {

namespace {

// Draws are built from raw mt19937_64 output rather than <random>
// distributions, whose algorithms differ between standard libraries.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

std::vector<ledger::Record> generate_synthetic(const ExperimentConfig& config) {
  config.validate();
  const auto& catalog = config.catalog;
  std::vector<double> weights = config.profile.base_weights;
  if (weights.empty()) weights.assign(catalog.size(), 1.0);

  std::mt19937_64 rng(config.seed);
  std::vector<ledger::Record> records;
  records.reserve(config.n_patients * config.drugs_per_patient);

  std::vector<std::string> chosen;
  std::vector<bool> taken(catalog.size());
  for (std::uint64_t patient = 0; patient < config.n_patients; ++patient) {
    chosen.clear();
    std::fill(taken.begin(), taken.end(), false);
    auto take = [&](const std::string& drug) {
      const auto idx = static_cast<std::size_t>(std::find(catalog.begin(), catalog.end(), drug) - catalog.begin());
      if (taken[idx]) return;
      taken[idx] = true;
      chosen.push_back(drug);
    };

    for (const auto& bundle : config.profile.bundles) {
      // Draw for every bundle so the random sequence does not depend on fit.
      const bool offered = unit(rng) < bundle.probability;
      if (!offered) continue;
      std::size_t fresh = 0;
      for (const auto& d : bundle.drugs) {
        const auto idx = static_cast<std::size_t>(std::find(catalog.begin(), catalog.end(), d) - catalog.begin());
        if (!taken[idx]) ++fresh;
      }
      if (chosen.size() + fresh > config.drugs_per_patient) continue;
      for (const auto& d : bundle.drugs) take(d);
    }

    while (chosen.size() < config.drugs_per_patient) {
      double total = 0.0;
      for (std::size_t i = 0; i < catalog.size(); ++i) {
        if (!taken[i]) total += weights[i];
      }
      double target = unit(rng) * total;
      std::size_t pick = catalog.size();
      for (std::size_t i = 0; i < catalog.size(); ++i) {
        if (taken[i]) continue;
        pick = i;
        if (target < weights[i]) break;
        target -= weights[i];
      }
      take(catalog[pick]);
    }

    for (auto& drug : chosen) records.push_back(ledger::Record{patient, std::move(drug)});
  }
  return records;
}

}  // namespace ledgerml::experiment
