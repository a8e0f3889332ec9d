#include <ostream>

#include "ledgerml/error.hpp"
#include "ledgerml/streaming.hpp"

namespace ledgerml::streaming {

SlidingWindow::SlidingWindow(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw Error(Errc::InvalidParams, "window capacity must be at least 1");
}

EvictionReport SlidingWindow::ingest(arm::ItemTransaction txn) {
  std::lock_guard lock(mu_);
  EvictionReport report;
  for (const auto& item : txn.items) ++item_counts_[item];
  buffer_.push_back(std::move(txn));
  ++generation_;
  if (buffer_.size() > capacity_) {
    arm::ItemTransaction old = std::move(buffer_.front());
    buffer_.pop_front();
    for (const auto& item : old.items) {
      auto it = item_counts_.find(item);
      if (--it->second == 0) item_counts_.erase(it);
    }
    ++evicted_;
    report.evicted = std::move(old);
  }
  report.generation = generation_;
  return report;
}

WindowSnapshot SlidingWindow::snapshot() const {
  std::lock_guard lock(mu_);
  return WindowSnapshot{capacity_, generation_, evicted_, {buffer_.begin(), buffer_.end()}, item_counts_};
}

std::size_t SlidingWindow::size() const {
  std::lock_guard lock(mu_);
  return buffer_.size();
}

std::uint64_t SlidingWindow::generation() const {
  std::lock_guard lock(mu_);
  return generation_;
}

std::uint64_t SlidingWindow::evicted() const {
  std::lock_guard lock(mu_);
  return evicted_;
}

std::vector<arm::AssociationRule> query_window(const WindowSnapshot& snapshot, const arm::MiningParams& params) {
  if (snapshot.buffer.empty()) throw Error(Errc::EmptyWindow, "no transactions in the window");
  std::vector<arm::Item> vocabulary;
  vocabulary.reserve(snapshot.item_counts.size());
  for (const auto& [item, count] : snapshot.item_counts) vocabulary.push_back(item);
  const arm::ItemDictionary dict(std::move(vocabulary));
  const auto rows = arm::encode_transactions(dict, snapshot.buffer);

  const auto table =
      arm::apriori(dict.size(), rows.size(), params, [&](std::span<const arm::ItemIds> candidates) {
        std::vector<std::uint64_t> counts(candidates.size(), 0);
        if (!candidates.empty() && candidates.front().size() == 1) {
          for (std::size_t c = 0; c < candidates.size(); ++c) {
            counts[c] = snapshot.item_counts.at(dict.item(candidates[c].front()));
          }
        } else {
          arm::count_candidates(rows, candidates, counts);
        }
        return counts;
      });
  return arm::generate_rules(arm::decode_itemsets(dict, table), rows.size(), params);
}

std::vector<arm::AssociationRule> query_window(const SlidingWindow& window, const arm::MiningParams& params) {
  return query_window(window.snapshot(), params);
}

std::optional<double> validate_in_window(const SlidingWindow& window, const model::ModelArtifact& artifact,
                                         const model::MetricSpec& metric) {
  const auto snap = window.snapshot();
  if (snap.buffer.empty()) return std::nullopt;
  return model::evaluate_model(artifact, snap.buffer, metric);
}

StreamState VectorSource::state() const {
  if (broken_) return StreamState::Error;
  return txns_.empty() ? StreamState::Empty : StreamState::Ok;
}

Pull VectorSource::pull(arm::ItemTransaction& out) {
  if (broken_ || (fail_after_ && pos_ >= *fail_after_)) return Pull::Error;
  if (pos_ >= txns_.size()) return Pull::End;
  out = txns_[pos_++];
  return Pull::Item;
}

Pull LedgerSource::pull(arm::ItemTransaction& out) {
  std::optional<ledger::Record> first = lookahead_ ? std::move(lookahead_) : sub_.next(idle_timeout_);
  lookahead_.reset();
  if (!first) return Pull::End;
  std::vector<arm::Item> items{std::move(first->item)};
  const auto patient = first->patient_id;
  // A block publishes atomically, so the rest of this patient's run is either
  // already pending or arrives in a following block.
  while (auto r = sub_.next(idle_timeout_)) {
    if (r->patient_id != patient) {
      lookahead_ = std::move(r);
      break;
    }
    items.push_back(std::move(r->item));
  }
  out = arm::make_transaction(patient, std::move(items));
  return Pull::Item;
}

StreamValidation validate_stream(SlidingWindow& window, TransactionSource& source,
                                 const model::ModelArtifact& artifact, const model::MetricSpec& metric) {
  StreamValidation result;
  const auto initial = source.state();
  if (initial == StreamState::Error) {
    result.status = lifecycle::Status::failure(Errc::StreamError, "data stream is in an error state");
    return result;
  }
  if (initial == StreamState::Empty) return result;

  std::vector<arm::AssociationRule> rules;
  try {
    rules = model::decode_artifact(artifact);
  } catch (const Error& e) {
    result.status = lifecycle::Status::failure(e.code(), e.what());
    return result;
  }

  arm::ItemTransaction txn;
  Pull pulled;
  while ((pulled = source.pull(txn)) == Pull::Item) {
    window.ingest(std::move(txn));
    result.scores.push_back(model::evaluate_rules(rules, window.snapshot().buffer, metric));
  }
  if (pulled == Pull::Error) {
    result.status = lifecycle::Status::failure(Errc::StreamError, "data stream failed after " +
                                                                      std::to_string(result.scores.size()) +
                                                                      " transactions");
  }
  return result;
}

void write_query_header(std::ostream& out) {
  out << "tick,generation,window_size,lhs_size,rhs_size,count,support_pct,confidence_pct,lift,rule\n";
}

void write_query_tick(std::ostream& out, std::uint64_t tick, const WindowSnapshot& snapshot,
                      std::span<const arm::AssociationRule> rules) {
  for (const auto& r : rules) {
    out << tick << ',' << snapshot.generation << ',' << snapshot.buffer.size() << ',' << r.lhs.items.size() << ','
        << r.rhs.items.size() << ',' << r.count << ',' << arm::format_fixed8(100.0 * r.support) << ','
        << arm::format_fixed8(100.0 * r.confidence) << ',' << arm::format_fixed8(r.lift) << ','
        << arm::rule_text(r) << '\n';
  }
}

}  // namespace ledgerml::streaming
