#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ledgerml/arm.hpp"
#include "ledgerml/bytes.hpp"

namespace ledgerml::model {

enum class ArtifactFormat : std::uint8_t { RulesetText, RulesetBinary };

std::string_view to_string(ArtifactFormat format) noexcept;
/// "RULESET_TEXT" / "RULESET_BINARY"
std::optional<ArtifactFormat> parse_format(std::string_view name) noexcept;

struct ArtifactMetadata {
  std::string producer;
  std::int64_t created_ms = 0;
  std::uint64_t rule_count = 0;

  friend bool operator==(const ArtifactMetadata&, const ArtifactMetadata&) = default;
};

struct ModelArtifact {
  ArtifactFormat format = ArtifactFormat::RulesetText;
  Bytes payload;
  ArtifactMetadata metadata;

  friend bool operator==(const ModelArtifact&, const ModelArtifact&) = default;
};

// Text codec, one rule per line after a version header:
//   lhs_items | rhs_items | count | support | confidence | lift | lhs_count | rhs_count
// Items are comma-separated. Reals use the shortest round-trip representation.
Bytes encode_rules_text(std::span<const arm::AssociationRule> rules);
std::vector<arm::AssociationRule> decode_rules_text(std::span<const std::uint8_t> payload);

// Binary codec: "LMRB", u8 version, u32 rule count, then per rule
//   lhs (u32 n, n strings, u64 count) | rhs (same) | u64 count | f64 support | f64 confidence | f64 lift
// All integers big-endian, strings u32-length-prefixed.
Bytes encode_rules_binary(std::span<const arm::AssociationRule> rules);
std::vector<arm::AssociationRule> decode_rules_binary(std::span<const std::uint8_t> payload);

/// Throws NoModel on an empty rule list.
ModelArtifact serialize_model(std::span<const arm::AssociationRule> rules, ArtifactFormat format,
                              std::string producer = "ledgerml", std::int64_t created_ms = 0);

/// Throws DecodeError when the payload does not parse in its declared format.
std::vector<arm::AssociationRule> decode_artifact(const ModelArtifact& artifact);

/// `<stem>.rules.txt` or `<stem>.rules.bin`
std::filesystem::path artifact_path(const std::filesystem::path& stem, ArtifactFormat format);

/// Writes the payload and a `<payload>.json` metadata sidecar; returns the payload path.
std::filesystem::path write_artifact(const std::filesystem::path& stem, const ModelArtifact& artifact);
ModelArtifact read_artifact(const std::filesystem::path& payload_path);

// ---------------------------------------------------------------------------
// Metrics

/// Named evaluation metric. Known names:
///   mean_confidence  mean empirical confidence per rule; rules whose lhs never fires count as 0
///   coverage         fraction of transactions on which at least one rule's lhs fires
struct MetricSpec {
  std::string name = "mean_confidence";

  friend bool operator==(const MetricSpec&, const MetricSpec&) = default;
};

bool is_known_metric(std::string_view name) noexcept;

double evaluate_rules(std::span<const arm::AssociationRule> rules, std::span<const arm::ItemTransaction> txns,
                      const MetricSpec& metric = {});

double evaluate_model(const ModelArtifact& artifact, std::span<const arm::ItemTransaction> txns,
                      const MetricSpec& metric = {});

}  // namespace ledgerml::model
