#include <charconv>
#include <string>
#include <system_error>

#include "ledgerml/error.hpp"
#include "ledgerml/model.hpp"

namespace ledgerml::model {

namespace {

constexpr std::string_view kTextHeader = "RULESET_TEXT v1";
constexpr std::string_view kBinaryMagic = "LMRB";
constexpr std::uint8_t kBinaryVersion = 1;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(' ');
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(' ') - b + 1);
}

bool is_text_safe(std::string_view item) {
  if (item.empty()) return false;
  for (char c : item) {
    if (c == ',' || c == '|' || c == ' ' || c == '\t' || c == '\n' || c == '\r') return false;
  }
  return true;
}

void append_real(std::string& out, double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

void append_items(std::string& out, const std::vector<arm::Item>& items) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!is_text_safe(items[i])) throw Error(Errc::InvalidParams, "item '" + items[i] + "' cannot be text-encoded");
    if (i) out += ',';
    out += items[i];
  }
}

template <typename T>
T parse_number(std::string_view field, std::size_t lineno) {
  field = trim(field);
  T v{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw Error(Errc::DecodeError, "line " + std::to_string(lineno) + ": bad number '" + std::string(field) + "'");
  }
  return v;
}

std::vector<arm::Item> parse_items(std::string_view field, std::size_t lineno) {
  field = trim(field);
  std::vector<arm::Item> items;
  std::size_t start = 0;
  while (true) {
    const auto comma = field.find(',', start);
    const auto item = field.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (!is_text_safe(item)) throw Error(Errc::DecodeError, "line " + std::to_string(lineno) + ": bad item list");
    items.emplace_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

}  // namespace

std::string_view to_string(ArtifactFormat format) noexcept {
  return format == ArtifactFormat::RulesetText ? "RULESET_TEXT" : "RULESET_BINARY";
}

std::optional<ArtifactFormat> parse_format(std::string_view name) noexcept {
  if (name == "RULESET_TEXT") return ArtifactFormat::RulesetText;
  if (name == "RULESET_BINARY") return ArtifactFormat::RulesetBinary;
  return std::nullopt;
}

Bytes encode_rules_text(std::span<const arm::AssociationRule> rules) {
  std::string out(kTextHeader);
  out += '\n';
  for (const auto& r : rules) {
    append_items(out, r.lhs.items);
    out += " | ";
    append_items(out, r.rhs.items);
    out += " | " + std::to_string(r.count) + " | ";
    append_real(out, r.support);
    out += " | ";
    append_real(out, r.confidence);
    out += " | ";
    append_real(out, r.lift);
    out += " | " + std::to_string(r.lhs.count) + " | " + std::to_string(r.rhs.count) + '\n';
  }
  return {out.begin(), out.end()};
}

std::vector<arm::AssociationRule> decode_rules_text(std::span<const std::uint8_t> payload) {
  const std::string_view text(reinterpret_cast<const char*>(payload.data()), payload.size());
  std::vector<arm::AssociationRule> rules;
  std::size_t pos = 0;
  std::size_t lineno = 0;
  bool saw_header = false;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) throw Error(Errc::DecodeError, "missing trailing newline");
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (!saw_header) {
      if (line != kTextHeader) throw Error(Errc::DecodeError, "missing RULESET_TEXT header");
      saw_header = true;
      continue;
    }
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto bar = line.find('|', start);
      fields.push_back(line.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start));
      if (bar == std::string_view::npos) break;
      start = bar + 1;
    }
    if (fields.size() != 8) throw Error(Errc::DecodeError, "line " + std::to_string(lineno) + ": expected 8 fields");
    arm::AssociationRule r;
    r.lhs.items = parse_items(fields[0], lineno);
    r.rhs.items = parse_items(fields[1], lineno);
    r.count = parse_number<std::uint64_t>(fields[2], lineno);
    r.support = parse_number<double>(fields[3], lineno);
    r.confidence = parse_number<double>(fields[4], lineno);
    r.lift = parse_number<double>(fields[5], lineno);
    r.lhs.count = parse_number<std::uint64_t>(fields[6], lineno);
    r.rhs.count = parse_number<std::uint64_t>(fields[7], lineno);
    rules.push_back(std::move(r));
  }
  if (!saw_header) throw Error(Errc::DecodeError, "empty text artifact");
  return rules;
}

Bytes encode_rules_binary(std::span<const arm::AssociationRule> rules) {
  ByteWriter w;
  w.raw(std::span(reinterpret_cast<const std::uint8_t*>(kBinaryMagic.data()), kBinaryMagic.size()));
  w.u8(kBinaryVersion);
  w.u32(static_cast<std::uint32_t>(rules.size()));
  auto put_itemset = [&](const arm::Itemset& s) {
    w.u32(static_cast<std::uint32_t>(s.items.size()));
    for (const auto& item : s.items) w.str(item);
    w.u64(s.count);
  };
  for (const auto& r : rules) {
    put_itemset(r.lhs);
    put_itemset(r.rhs);
    w.u64(r.count);
    w.f64(r.support);
    w.f64(r.confidence);
    w.f64(r.lift);
  }
  return std::move(w).take();
}

std::vector<arm::AssociationRule> decode_rules_binary(std::span<const std::uint8_t> payload) {
  ByteReader rd(payload);
  const auto magic = rd.raw(kBinaryMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kBinaryMagic.begin())) throw Error(Errc::DecodeError, "bad magic");
  if (rd.u8() != kBinaryVersion) throw Error(Errc::DecodeError, "unsupported binary version");
  const auto n = rd.u32();
  auto get_itemset = [&] {
    arm::Itemset s;
    const auto k = rd.u32();
    // Each item costs at least its 4-byte length prefix.
    if (k > rd.remaining() / 4) throw Error(Errc::DecodeError, "item count exceeds payload");
    for (std::uint32_t i = 0; i < k; ++i) s.items.push_back(rd.str());
    s.count = rd.u64();
    return s;
  };
  std::vector<arm::AssociationRule> rules;
  for (std::uint32_t i = 0; i < n; ++i) {
    arm::AssociationRule r;
    r.lhs = get_itemset();
    r.rhs = get_itemset();
    r.count = rd.u64();
    r.support = rd.f64();
    r.confidence = rd.f64();
    r.lift = rd.f64();
    rules.push_back(std::move(r));
  }
  if (!rd.done()) throw Error(Errc::DecodeError, "trailing bytes after rule set");
  return rules;
}

ModelArtifact serialize_model(std::span<const arm::AssociationRule> rules, ArtifactFormat format,
                              std::string producer, std::int64_t created_ms) {
  if (rules.empty()) throw Error(Errc::NoModel, "no rules to serialize");
  ModelArtifact a;
  a.format = format;
  a.payload = format == ArtifactFormat::RulesetText ? encode_rules_text(rules) : encode_rules_binary(rules);
  a.metadata = ArtifactMetadata{std::move(producer), created_ms, rules.size()};
  return a;
}

std::vector<arm::AssociationRule> decode_artifact(const ModelArtifact& artifact) {
  return artifact.format == ArtifactFormat::RulesetText ? decode_rules_text(artifact.payload)
                                                         : decode_rules_binary(artifact.payload);
}

}  // namespace ledgerml::model
