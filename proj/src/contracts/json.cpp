#include <fstream>
#include <istream>
#include <ostream>

#include "ledgerml/contracts.hpp"
#include "ledgerml/ledger.hpp"

namespace ledgerml::contracts {

namespace {

using nlohmann::json;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

json artifact_to_json(const model::ModelArtifact& a) {
  return {{"format", model::to_string(a.format)},
          {"payload_hex", to_hex(a.payload)},
          {"producer", a.metadata.producer},
          {"created_ms", a.metadata.created_ms},
          {"rule_count", a.metadata.rule_count}};
}

model::ModelArtifact artifact_from_json(const json& j) {
  model::ModelArtifact a;
  const auto fmt = model::parse_format(j.at("format").get<std::string>());
  if (!fmt) throw Error(Errc::ParseError, "unknown artifact format " + j.at("format").dump());
  a.format = *fmt;
  if (j.contains("payload_hex")) {
    a.payload = from_hex(j.at("payload_hex").get<std::string>());
  } else if (j.contains("payload_text")) {
    const auto text = j.at("payload_text").get<std::string>();
    a.payload.assign(text.begin(), text.end());
  }
  a.metadata.producer = j.value("producer", "");
  a.metadata.created_ms = j.value("created_ms", std::int64_t{0});
  a.metadata.rule_count = j.value("rule_count", std::uint64_t{0});
  return a;
}

}  // namespace

json event_to_json(const ContractEvent& event) {
  return std::visit(
      Overloaded{
          [](const DepositEvent& e) {
            json j{{"type", "deposit"}, {"giver", e.giver}, {"amount", e.amount}};
            if (e.metric) j["metric"] = *e.metric;
            return j;
          },
          [](const SubmitEvent& e) {
            return json{{"type", "MODEL_SUBMISSION"},
                        {"participant", e.participant},
                        {"day", e.day},
                        {"artifact", artifact_to_json(e.artifact)}};
          },
          [](const EvaluateEvent& e) {
            json txns = json::array();
            for (const auto& t : e.validation) txns.push_back({{"patient", t.patient_id}, {"items", t.items}});
            return json{{"type", "MODEL_EVALUATION"}, {"validation", txns}};
          },
          [](const CollectEvent& e) {
            return json{{"type", "collect"},
                        {"participant", e.participant},
                        {"wallet", {{"owner", e.wallet.owner}, {"balance", e.wallet.balance}, {"valid", e.wallet.valid}}},
                        {"share_with", e.share_with}};
          },
          [](const LifecycleNote& e) {
            return json{{"type", std::string(lifecycle::to_string(e.kind))}, {"participant", e.participant}};
          },
          [](const UnrecognizedEvent& e) { return json{{"type", e.type}}; },
      },
      event);
}

ContractEvent event_from_json(const json& j) {
  try {
    const auto type = j.at("type").get<std::string>();
    if (type == "deposit") {
      DepositEvent e{j.at("giver").get<std::string>(), j.at("amount").get<std::uint64_t>(), std::nullopt};
      if (j.contains("metric")) e.metric = j.at("metric").get<std::string>();
      return e;
    }
    if (type == "submit" || type == "MODEL_SUBMISSION") {
      return SubmitEvent{j.at("participant").get<std::string>(), artifact_from_json(j.at("artifact")),
                         j.value("day", std::int64_t{0})};
    }
    if (type == "evaluate" || type == "MODEL_EVALUATION") {
      EvaluateEvent e;
      for (const auto& t : j.at("validation")) {
        e.validation.push_back(
            arm::make_transaction(t.at("patient").get<std::uint64_t>(), t.at("items").get<std::vector<std::string>>()));
      }
      return e;
    }
    if (type == "collect") {
      CollectEvent e;
      e.participant = j.at("participant").get<std::string>();
      const auto& w = j.at("wallet");
      e.wallet = Wallet{w.value("owner", e.participant), w.value("balance", std::uint64_t{0}), w.value("valid", true)};
      if (j.contains("share_with")) e.share_with = j.at("share_with").get<std::vector<std::string>>();
      return e;
    }
    if (auto kind = lifecycle::parse_event_kind(type)) {
      return LifecycleNote{*kind, j.value("participant", "")};
    }
    return UnrecognizedEvent{type};
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("bad contract event: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::ParseError) throw;
    throw Error(Errc::ParseError, std::string("bad contract event: ") + e.what());
  }
}

void write_event_log(std::ostream& out, std::span<const ContractEvent> events) {
  for (const auto& e : events) out << event_to_json(e).dump() << '\n';
}

std::vector<ContractEvent> read_event_log(std::istream& in) {
  std::vector<ContractEvent> events;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      events.push_back(event_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(Errc::ParseError, std::string("bad event log line: ") + e.what());
    }
  }
  return events;
}

Scenario parse_scenario(const json& j) {
  Scenario s;
  const json* events = &j;
  if (j.is_object()) {
    s.config.daily_limit = j.value("daily_limit", std::uint64_t{5});
    s.config.metric.name = j.value("metric", std::string("mean_confidence"));
    if (!j.contains("events")) throw Error(Errc::ParseError, "scenario object needs an 'events' array");
    events = &j.at("events");
  }
  if (!events->is_array()) throw Error(Errc::ParseError, "scenario events must be a JSON array");
  for (const auto& e : *events) s.events.push_back(event_from_json(e));
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read " + path.string());
  try {
    return parse_scenario(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("scenario is not valid JSON: ") + e.what());
  }
}

json scenario_to_json(const Scenario& scenario) {
  json events = json::array();
  for (const auto& e : scenario.events) events.push_back(event_to_json(e));
  return json{{"daily_limit", scenario.config.daily_limit}, {"metric", scenario.config.metric.name}, {"events", events}};
}

nlohmann::ordered_json state_summary(const ContractState& s) {
  json submissions = json::array();
  for (const auto& sub : s.submissions) {
    json entry{{"participant", sub.participant}, {"day", sub.day}, {"format", model::to_string(sub.artifact.format)}};
    entry["score"] = sub.score ? json(*sub.score) : json(nullptr);
    submissions.push_back(entry);
  }
  json payouts = json::array();
  for (const auto& p : s.payouts) payouts.push_back({{"recipient", p.recipient}, {"amount", p.amount}});
  nlohmann::ordered_json out;
  out["phase"] = to_string(s.phase);
  out["reward_pool"] = s.reward_pool;
  out["total_deposited"] = s.total_deposited();
  out["total_paid"] = s.total_paid();
  out["metric"] = s.metric.name;
  out["daily_limit"] = s.config.daily_limit;
  out["winner"] = s.winner ? json(*s.winner) : json(nullptr);
  out["submissions"] = submissions;
  out["payouts"] = payouts;
  out["events_applied"] = s.event_log.size();
  out["state_sha256"] = to_hex(ledger::sha256(encode_state(s)));
  return out;
}

}  // namespace ledgerml::contracts
