#include <fstream>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "ledgerml/error.hpp"
#include "ledgerml/ledger.hpp"

namespace ledgerml::ledger {

namespace {

using nlohmann::json;

Digest digest_from_hex(const std::string& hex) {
  const Bytes bytes = from_hex(hex);
  if (bytes.size() != 32) throw Error(Errc::ParseError, "digest must be 32 bytes");
  Digest d{};
  std::copy(bytes.begin(), bytes.end(), d.begin());
  return d;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string block_to_json_line(const Block& block) {
  json records = json::array();
  for (const auto& r : block.records) records.push_back({{"patient", r.patient_id}, {"drug", r.item}});
  // ordered_json keeps the declared field order stable on disk.
  nlohmann::ordered_json j;
  j["index"] = block.index;
  j["timestamp"] = block.timestamp;
  j["prev_hash"] = to_hex(block.prev_hash);
  j["records"] = records;
  j["hash"] = to_hex(block.hash);
  return j.dump();
}

Block block_from_json_line(std::string_view line) {
  try {
    const json j = json::parse(line);
    Block b;
    b.index = j.at("index").get<std::uint64_t>();
    b.timestamp = j.at("timestamp").get<std::int64_t>();
    b.prev_hash = digest_from_hex(j.at("prev_hash").get<std::string>());
    for (const auto& r : j.at("records")) {
      b.records.push_back(Record{r.at("patient").get<std::uint64_t>(), r.at("drug").get<std::string>()});
    }
    b.hash = digest_from_hex(j.at("hash").get<std::string>());
    return b;
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("bad block line: ") + e.what());
  } catch (const Error& e) {
    throw Error(Errc::ParseError, std::string("bad block line: ") + e.what());
  }
}

void write_chain(std::ostream& out, const Chain& chain) {
  for (const auto& b : chain.blocks) out << block_to_json_line(b) << '\n';
}

Chain read_chain(std::istream& in) {
  Chain chain;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    chain.blocks.push_back(block_from_json_line(line));
  }
  return chain;
}

void save_chain(const std::filesystem::path& path, const Chain& chain) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  write_chain(out, chain);
}

Chain load_chain(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read " + path.string());
  return read_chain(in);
}

std::vector<Record> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "patient,drug") {
    throw Error(Errc::ParseError, "expected CSV header 'patient,drug'");
  }
  std::vector<Record> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string row = trim(line);
    if (row.empty()) continue;
    const auto comma = row.find(',');
    if (comma == std::string::npos || row.find(',', comma + 1) != std::string::npos) {
      throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": expected two fields");
    }
    Record r;
    try {
      std::size_t used = 0;
      const std::string id = row.substr(0, comma);
      if (id.empty() || id.front() == '-') throw std::invalid_argument("negative");
      r.patient_id = std::stoull(id, &used);
      if (used != id.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": bad patient id");
    }
    r.item = row.substr(comma + 1);
    if (!is_valid_item(r.item)) throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": bad drug name");
    out.push_back(std::move(r));
  }
  return out;
}

void write_records_csv(std::ostream& out, std::span<const Record> records) {
  out << "patient,drug\n";
  for (const auto& r : records) out << r.patient_id << ',' << r.item << '\n';
}

}  // namespace ledgerml::ledger
