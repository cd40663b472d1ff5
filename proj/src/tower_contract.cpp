#include "paychan/tower_contract.hpp"

namespace paychan {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

template <class M, class K>
typename M::mapped_type lookup_or_zero(const M& m, const K& k) {
  auto it = m.find(k);
  return it == m.end() ? typename M::mapped_type{} : it->second;
}
}  // namespace

TowerContract::TowerContract(PublicKey owner) : owner_(owner), owner_address_(address_of(owner)) {}

void TowerContract::execute(CallContext& ctx, const Call& call) {
  std::visit(overloaded{
                 [&](const calls::TowerDeposit& c) { deposit(ctx, c); },
                 [&](const calls::TowerWithdraw& c) { withdraw(ctx, c); },
                 [&](const calls::TowerClose& c) { close(ctx, c); },
                 [&](const calls::TowerUpdate& c) { update(ctx, c); },
                 [&](const auto&) { revert("unknown-method"); },
             },
             call);
}

const PendingEntry* TowerContract::entry(std::uint64_t n) const {
  auto it = channels_.find(n);
  return it == channels_.end() ? nullptr : &it->second;
}

PendingEntry TowerContract::current_entry() const {
  const PendingEntry* e = entry(k_);
  return e ? *e : PendingEntry{};
}

const CustomerAccount* TowerContract::account(const Cid& cid) const {
  auto it = balances_.find(cid);
  return it == balances_.end() ? nullptr : &it->second;
}

Amount TowerContract::total_deposited(const Cid& cid) const { return lookup_or_zero(deposited_, cid); }
Amount TowerContract::total_withdrawn(const Cid& cid) const { return lookup_or_zero(withdrawn_, cid); }

void TowerContract::deposit(CallContext& ctx, const calls::TowerDeposit& c) {
  require(ctx.value() > 0, "zero-deposit");
  auto& acct = balances_[c.cid];
  acct.customer = ctx.sender();
  acct.deposit += ctx.value();
  deposited_[c.cid] += ctx.value();
}

void TowerContract::withdraw(CallContext& ctx, const calls::TowerWithdraw& c) {
  require(ctx.sender() == c.cid, "caller-not-cid");
  auto it = balances_.find(c.cid);
  require(it != balances_.end() && it->second.customer == c.victim, "victim-mismatch");
  const Amount amount = scale_floor(it->second.deposit, c.percentage.clamped());
  it->second.deposit -= amount;
  withdrawn_[c.cid] += amount;
  ctx.transfer(c.victim, amount);
}

void TowerContract::close(CallContext& ctx, const calls::TowerClose& c) {
  require(ctx.sender() == c.cid, "caller-not-cid");
  PendingEntry& e = channels_[k_];
  auto [pos, inserted] = e.position.try_emplace(c.cid, e.cids.size());
  if (inserted) {
    e.cids.push_back(c.cid);
    e.states.push_back(c.state);
  } else {
    e.states[pos->second] = c.state;
  }
}

void TowerContract::update(CallContext& ctx, const calls::TowerUpdate& c) {
  require(ctx.sender() == owner_address_, "not-owner");
  const PendingEntry* e = entry(k_);
  require(c.confs.size() == (e ? e->size() : 0), "length-mismatch");
  ++k_;
  respond(ctx, c.confs, k_ - 1);
}

void TowerContract::respond(CallContext& ctx, const ConfirmationSet& confs, std::uint64_t n) {
  auto it = channels_.find(n);
  if (it == channels_.end()) return;
  const PendingEntry answered = it->second;
  channels_.erase(it);
  for (std::size_t j = 0; j < answered.size(); ++j) {
    // Failures are isolated per channel and surface in the receipt.
    ctx.try_call(answered.cids[j], calls::ChannelPayout{answered.states[j], confs.bit(j)});
  }
}

}  // namespace paychan
