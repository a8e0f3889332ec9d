#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <set>

#include "ledgerml/error.hpp"
#include "ledgerml/experiment.hpp"

namespace ledgerml::experiment {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_value(std::string_view key, std::string_view value) {
  T v{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw Error(Errc::InvalidConfig, "bad value '" + std::string(value) + "' for " + std::string(key));
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw Error(Errc::InvalidConfig, "bad boolean '" + std::string(value) + "' for " + std::string(key));
}

}  // namespace

std::string_view to_string(ExecutionMode mode) noexcept {
  switch (mode) {
    case ExecutionMode::Single: return "single";
    case ExecutionMode::Smp: return "smp";
    case ExecutionMode::Mpp: return "mpp";
    case ExecutionMode::Streaming: return "streaming";
  }
  return "unknown";
}

std::optional<ExecutionMode> parse_mode(std::string_view name) noexcept {
  if (name == "single") return ExecutionMode::Single;
  if (name == "smp") return ExecutionMode::Smp;
  if (name == "mpp") return ExecutionMode::Mpp;
  if (name == "streaming" || name == "stream") return ExecutionMode::Streaming;
  return std::nullopt;
}

std::vector<std::string> default_catalog() {
  return {
      // opioid names from the sample prescriptions and rule table
      "actiq", "meperidine", "fentora", "methadone", "lorcet", "acetaminophen", "duragesic", "morphine", "hysingla",
      "percocet", "oxycodone", "dilaudid", "hydrouscodeine",
      // placeholders for the unnamed rest of the catalog
      "placeholdera", "placeholderb", "placeholderc", "placeholderd", "placeholdere", "placeholderf", "placeholderg"};
}

CorrelationProfile CorrelationProfile::shipped() {
  CorrelationProfile p;
  p.bundles = {
      {{"hysingla", "oxycodone", "percocet"}, 0.34},
      {{"actiq", "fentora", "meperidine"}, 0.28},
      {{"actiq", "morphine", "oxycodone"}, 0.24},
      {{"dilaudid", "duragesic"}, 0.26},
      {{"hydrouscodeine", "oxycodone"}, 0.24},
      {{"fentora", "lorcet"}, 0.24},
  };
  return p;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(Errc::InvalidConfig, msg); };
  if (n_patients == 0) fail("patients must be at least 1");
  if (drugs_per_patient == 0) fail("drugs_per_patient must be at least 1");
  if (drugs_per_patient > catalog.size()) fail("drugs_per_patient exceeds the catalog size");
  std::set<std::string> unique;
  for (const auto& d : catalog) {
    if (!ledger::is_valid_item(d)) fail("catalog entry '" + d + "' is not a lowercase drug name");
    if (!unique.insert(d).second) fail("duplicate catalog entry '" + d + "'");
  }
  if (!profile.base_weights.empty()) {
    if (profile.base_weights.size() != catalog.size()) fail("base_weights must have one entry per catalog drug");
    for (double w : profile.base_weights) {
      if (!(w > 0.0)) fail("base weights must be positive");
    }
  }
  for (const auto& b : profile.bundles) {
    if (!(b.probability >= 0.0 && b.probability <= 1.0)) fail("bundle probability must be in [0, 1]");
    if (b.drugs.empty()) fail("empty bundle");
    for (const auto& d : b.drugs) {
      if (!unique.contains(d)) fail("bundle drug '" + d + "' is not in the catalog");
    }
  }
  try {
    params.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  if (n_threads == 0) fail("threads must be at least 1");
  if (n_workers == 0) fail("workers must be at least 1");
  if (window_capacity == 0) fail("window must be at least 1");
  if (members.empty()) fail("the ledger needs at least one member");
}

void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "patients") {
    c.n_patients = parse_value<std::size_t>(key, value);
  } else if (key == "drugs_per_patient") {
    c.drugs_per_patient = parse_value<std::size_t>(key, value);
  } else if (key == "catalog") {
    c.catalog = split(value, ',');
  } else if (key == "seed") {
    c.seed = parse_value<std::uint64_t>(key, value);
  } else if (key == "min_support") {
    c.params.min_support = parse_value<double>(key, value);
  } else if (key == "min_confidence") {
    c.params.min_confidence = parse_value<double>(key, value);
  } else if (key == "max_rule_items") {
    c.params.max_rule_items = parse_value<std::size_t>(key, value);
  } else if (key == "mode") {
    auto mode = parse_mode(value);
    if (!mode) throw Error(Errc::InvalidConfig, "unknown mode '" + std::string(value) + "'");
    c.mode = *mode;
  } else if (key == "threads") {
    c.n_threads = parse_value<std::size_t>(key, value);
  } else if (key == "workers") {
    c.n_workers = parse_value<std::size_t>(key, value);
  } else if (key == "window") {
    c.window_capacity = parse_value<std::size_t>(key, value);
  } else if (key == "query_every") {
    c.query_every = parse_value<std::size_t>(key, value);
  } else if (key == "barrier_timeout_ms") {
    c.barrier_timeout = std::chrono::milliseconds(parse_value<std::int64_t>(key, value));
  } else if (key == "profile") {
    if (value == "shipped") {
      c.profile = CorrelationProfile::shipped();
    } else if (value == "uniform") {
      c.profile = CorrelationProfile::uniform();
    } else {
      throw Error(Errc::InvalidConfig, "unknown profile '" + std::string(value) + "'");
    }
  } else if (key == "bundle") {
    // drug+drug+drug:probability, appended to the current profile
    const auto colon = value.rfind(':');
    if (colon == std::string_view::npos) throw Error(Errc::InvalidConfig, "bundle needs 'drugs:probability'");
    CorrelationProfile::Bundle b{split(value.substr(0, colon), '+'),
                                 parse_value<double>(key, trim(value.substr(colon + 1)))};
    c.profile.bundles.push_back(std::move(b));
  } else if (key == "base_weights") {
    c.profile.base_weights.clear();
    for (const auto& w : split(value, ',')) c.profile.base_weights.push_back(parse_value<double>(key, w));
  } else if (key == "records_per_block") {
    c.records_per_block = parse_value<std::size_t>(key, value);
  } else if (key == "members") {
    c.members = split(value, ',');
  } else if (key == "wall_clock") {
    c.wall_clock = parse_bool(key, value);
  } else if (key == "clock_start_ms") {
    c.clock_start_ms = parse_value<std::int64_t>(key, value);
  } else if (key == "clock_step_ms") {
    c.clock_step_ms = parse_value<std::int64_t>(key, value);
  } else if (key == "format") {
    auto fmt = model::parse_format(value);
    if (!fmt) throw Error(Errc::InvalidConfig, "unknown format '" + std::string(value) + "'");
    c.format = *fmt;
  } else {
    throw Error(Errc::InvalidConfig, "unknown config key '" + std::string(key) + "'");
  }
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  std::string line;
  std::size_t lineno = 0;
  bool bundles_reset = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::InvalidConfig, "line " + std::to_string(lineno) + ": expected key = value");
    }
    const auto key = trim(view.substr(0, eq));
    // The first bundle line replaces the base profile's bundles.
    if (key == "bundle" && !bundles_reset) {
      base.profile.bundles.clear();
      bundles_reset = true;
    }
    apply_setting(base, key, view.substr(eq + 1));
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read " + path.string());
  return parse_config(in, std::move(base));
}

}  // namespace ledgerml::experiment
