#include <algorithm>

#include "ledgerml/error.hpp"
#include "ledgerml/ledger.hpp"

namespace ledgerml::ledger {

void LeaderReplication::replicate(const Block& block, std::span<MemberNode> followers) {
  for (auto& f : followers) f.chain->append(block);
}

Network::Network(const std::vector<std::string>& member_ids, std::shared_ptr<Clock> clock,
                 std::unique_ptr<ConsensusStrategy> consensus)
    : clock_(std::move(clock)), consensus_(std::move(consensus)) {
  if (member_ids.empty()) throw Error(Errc::InvalidConfig, "a network needs at least one member");
  const Block genesis = make_genesis(clock_->now_ms());
  for (std::size_t i = 0; i < member_ids.size(); ++i) {
    members_.push_back(MemberNode{member_ids[i], i == 0 ? Role::Leader : Role::Follower,
                                  std::make_shared<ChainStore>(Chain{{genesis}})});
  }
}

const MemberNode& Network::member(std::string_view node_id) const {
  auto it = std::find_if(members_.begin(), members_.end(), [&](const MemberNode& m) { return m.node_id == node_id; });
  if (it == members_.end()) throw Error(Errc::InvalidConfig, "unknown member '" + std::string(node_id) + "'");
  return *it;
}

Block Network::append_block(std::string_view node_id, std::vector<Record> records) {
  if (member(node_id).role != Role::Leader) {
    throw Error(Errc::NotLeader, "member '" + std::string(node_id) + "' is a follower");
  }
  std::lock_guard lock(append_mu_);
  MemberNode& leader = members_.front();
  Block block = make_block(leader.chain->tip(), clock_->now_ms(), std::move(records));
  leader.chain->append(block);
  consensus_->replicate(block, std::span<MemberNode>(members_).subspan(1));
  return block;
}

bool Network::converged() const {
  const Chain reference = leader().chain->snapshot();
  return std::all_of(members_.begin() + 1, members_.end(),
                     [&](const MemberNode& m) { return m.chain->snapshot() == reference; });
}

}  // namespace ledgerml::ledger
