#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>

#include "ledgerml/error.hpp"
#include "ledgerml/model.hpp"

namespace ledgerml::model {

std::filesystem::path artifact_path(const std::filesystem::path& stem, ArtifactFormat format) {
  auto p = stem;
  p += format == ArtifactFormat::RulesetText ? ".rules.txt" : ".rules.bin";
  return p;
}

std::filesystem::path write_artifact(const std::filesystem::path& stem, const ModelArtifact& artifact) {
  const auto path = artifact_path(stem, artifact.format);
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(artifact.payload.data()),
              static_cast<std::streamsize>(artifact.payload.size()));
  }
  nlohmann::ordered_json meta;
  meta["format"] = to_string(artifact.format);
  meta["producer"] = artifact.metadata.producer;
  meta["created_ms"] = artifact.metadata.created_ms;
  meta["rule_count"] = artifact.metadata.rule_count;
  meta["payload"] = path.filename().string();
  auto sidecar = path;
  sidecar += ".json";
  std::ofstream out(sidecar);
  if (!out) throw Error(Errc::IoError, "cannot write " + sidecar.string());
  out << meta.dump(2) << '\n';
  return path;
}

ModelArtifact read_artifact(const std::filesystem::path& payload_path) {
  std::ifstream in(payload_path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read " + payload_path.string());
  ModelArtifact a;
  a.payload.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());

  auto sidecar = payload_path;
  sidecar += ".json";
  std::ifstream meta_in(sidecar);
  if (meta_in) {
    try {
      const auto meta = nlohmann::json::parse(meta_in);
      const auto fmt = parse_format(meta.at("format").get<std::string>());
      if (!fmt) throw Error(Errc::DecodeError, "unknown artifact format in " + sidecar.string());
      a.format = *fmt;
      a.metadata.producer = meta.value("producer", "");
      a.metadata.created_ms = meta.value("created_ms", std::int64_t{0});
      a.metadata.rule_count = meta.value("rule_count", std::uint64_t{0});
      return a;
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::DecodeError, std::string("bad metadata sidecar: ") + e.what());
    }
  }
  // No sidecar: infer the format from the extension.
  const auto name = payload_path.filename().string();
  a.format = name.ends_with(".rules.bin") ? ArtifactFormat::RulesetBinary : ArtifactFormat::RulesetText;
  a.metadata.rule_count = decode_artifact(a).size();
  return a;
}

}  // namespace ledgerml::model
