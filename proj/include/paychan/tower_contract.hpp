#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "paychan/chain.hpp"

namespace paychan {

/// Closures collected during one update period, in arrival order.
struct PendingEntry {
  std::vector<Cid> cids;
  std::vector<ChannelState> states;
  std::map<Cid, std::size_t> position;

  std::size_t size() const { return cids.size(); }
};

struct CustomerAccount {
  Address customer;
  Amount deposit = 0;
};

/// The watchtower's on-chain contract: customer deposits, the pending-closure ledger
/// keyed by update counter k, and fan-out of confirmation-set decisions to channels.
class TowerContract : public ContractBase<TowerContract> {
 public:
  explicit TowerContract(PublicKey owner);

  std::string_view kind() const override { return "tower"; }
  void execute(CallContext& ctx, const Call& call) override;

  const PublicKey& owner() const { return owner_; }
  std::uint64_t counter() const { return k_; }
  /// Entry n, or nullptr when absent (never filled or already answered).
  const PendingEntry* entry(std::uint64_t n) const;
  /// The entry the next update will answer; empty when no closure is pending.
  PendingEntry current_entry() const;
  const CustomerAccount* account(const Cid& cid) const;
  /// Cumulative deposits and withdrawals per cid, for deposit-safety checks.
  Amount total_deposited(const Cid& cid) const;
  Amount total_withdrawn(const Cid& cid) const;

 private:
  void deposit(CallContext& ctx, const calls::TowerDeposit& c);
  void withdraw(CallContext& ctx, const calls::TowerWithdraw& c);
  void close(CallContext& ctx, const calls::TowerClose& c);
  void update(CallContext& ctx, const calls::TowerUpdate& c);
  void respond(CallContext& ctx, const ConfirmationSet& confs, std::uint64_t n);

  PublicKey owner_;
  Address owner_address_;
  std::map<Cid, CustomerAccount> balances_;
  std::map<Cid, Amount> deposited_;
  std::map<Cid, Amount> withdrawn_;
  std::map<std::uint64_t, PendingEntry> channels_;
  std::uint64_t k_ = 0;
};

}  // namespace paychan
