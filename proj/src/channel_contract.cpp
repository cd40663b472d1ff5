#include "paychan/channel_contract.hpp"

#include <algorithm>
#include <stdexcept>

namespace paychan {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

const char* flag_name(ChannelFlag f) {
  switch (f) {
    case ChannelFlag::Bottom:
      return "BOTTOM";
    case ChannelFlag::Ok:
      return "OK";
    case ChannelFlag::Dispute:
      return "DISPUTE";
  }
  return "?";
}

void ChannelContract::execute(CallContext& ctx, const Call& call) {
  if (timeouts_.failsafe == 0) revert("bad-timeouts");
  std::visit(overloaded{
                 [&](const calls::ChannelSetup& c) { setup(ctx, c); },
                 [&](const calls::ChannelDeposit&) { deposit(ctx); },
                 [&](const calls::ChannelClose& c) { close(ctx, c); },
                 [&](const calls::ChannelDispute& c) { dispute(ctx, c); },
                 [&](const calls::ChannelPayout& c) { payout(ctx, c); },
                 [&](const calls::ChannelChallenge& c) { challenge(ctx, c); },
                 [&](const auto&) { revert("unknown-method"); },
             },
             call);
}

void ChannelContract::setup(CallContext& ctx, const calls::ChannelSetup& c) {
  require(flag_ == ChannelFlag::Bottom, "flag-not-bottom");
  require(ctx.sender_key().has_value(), "unauthorized");
  // A new episode starts from a clean slate; the deposit is the attached value.
  *this = ChannelContract(timeouts_);
  pk_a_ = *ctx.sender_key();
  bal_a_ = ctx.value();
  pk_wt_ = c.wt_key;
  tower_ = c.tower;
  flag_ = ChannelFlag::Ok;
}

void ChannelContract::deposit(CallContext& ctx) {
  require(flag_ == ChannelFlag::Ok, "flag-not-ok");
  require(ctx.sender_key().has_value(), "unauthorized");
  require(!pk_b_.has_value(), "already-deposited");
  require(*ctx.sender_key() != *pk_a_, "unauthorized");
  pk_b_ = *ctx.sender_key();
  bal_b_ = ctx.value();
}

bool ChannelContract::signed_by_parties(const Cid& self, const ChannelState& s, const Nonce& r,
                                        const Signature& sig_a, const Signature& sig_b) const {
  const auto payload = payment_payload(self, s.idx, hash_commit(s, r));
  if (!verify(*pk_a_, payload, sig_a)) return false;
  // Before B has deposited only A's signature is required, so A can recover its deposit.
  return !pk_b_ || verify(*pk_b_, payload, sig_b);
}

void ChannelContract::close(CallContext& ctx, const calls::ChannelClose& c) {
  require(flag_ == ChannelFlag::Ok, "flag-not-ok");
  require(signed_by_parties(ctx.self(), c.state, c.r, c.sig_a, c.sig_b), "bad-signature");
  flag_ = ChannelFlag::Dispute;
  s_ = c.state;
  ddl_ = ctx.now() + timeouts_.tolerance;
  end_ = ddl_ + timeouts_.failsafe;
  responded_ = false;
  perc_ = {0, 1};
  challenged_ = false;
  ctx.call(tower_, calls::TowerClose{ctx.self(), c.state});
  ctx.emit(EventKind::Closure, c.state, c.r);
}

void ChannelContract::dispute(CallContext& ctx, const calls::ChannelDispute& c) {
  require(flag_ == ChannelFlag::Dispute, "flag-not-dispute");
  require(ctx.now() < end_, "past-end");
  require(signed_by_parties(ctx.self(), c.state, c.r, c.sig_a, c.sig_b), "bad-signature");
  require(c.state.idx > s_->idx, "stale-state");
  s_ = c.state;
  ctx.call(tower_, calls::TowerClose{ctx.self(), c.state});
  ctx.emit(EventKind::Dispute, c.state, c.r);
}

Address ChannelContract::party_address(Role r) const {
  const auto& pk = r == Role::A ? pk_a_ : pk_b_;
  return pk ? address_of(*pk) : Address{};
}

void ChannelContract::release(CallContext& ctx, const ChannelState& s) {
  require(s == *s_, "state-mismatch");
  require(capacity() >= s.total(), "insufficient-funds");
  require(s.bal_b == 0 || pk_b_.has_value(), "state-mismatch");
  ctx.transfer(party_address(Role::A), s.bal_a);
  if (s.bal_b > 0) ctx.transfer(party_address(Role::B), s.bal_b);
  flag_ = ChannelFlag::Bottom;
  s_ = s;
  paid_out_ = true;
}

void ChannelContract::payout(CallContext& ctx, const calls::ChannelPayout& c) {
  require(flag_ == ChannelFlag::Dispute, "flag-not-dispute");
  const Height now = ctx.now();
  if (ctx.sender() == tower_) {
    if (now > ddl_ && !responded_.value_or(false)) {
      const Height late = std::min<Height>(now - ddl_, timeouts_.failsafe);
      perc_ = Fraction{late, timeouts_.failsafe};
    }
    responded_ = true;
    if (c.is_pay) {
      release(ctx, c.state);
    } else {
      // A denial opens a full fail-safe window from now; end never moves backwards.
      end_ = std::max(end_, now + timeouts_.failsafe);
    }
    return;
  }
  const bool is_party = (pk_a_ && ctx.sender() == party_address(Role::A)) ||
                        (pk_b_ && ctx.sender() == party_address(Role::B));
  require(is_party, "unauthorized");
  require(now > end_, "before-end");
  release(ctx, c.state);
}

void ChannelContract::challenge(CallContext& ctx, const calls::ChannelChallenge& c) {
  require(responded_.has_value(), "no-closure");
  require(ctx.now() > end_, "before-end");
  const auto payload = receipt_payload(ctx.self(), c.state.idx, hash_commit(c.state, c.r));
  require(verify(pk_wt_, payload, c.wt_sig), "bad-receipt");
  require(!challenged_, "already-challenged");

  const bool wrong_close = flag_ == ChannelFlag::Bottom && c.state.idx > s_->idx;
  const bool never_responded = !*responded_;
  const bool late = !perc_.is_zero();
  require(wrong_close || never_responded || late, "nothing-to-claim");

  challenged_ = true;
  if (wrong_close || never_responded) ctx.call(tower_, calls::TowerWithdraw{ctx.self(), ctx.sender(), Fraction::one()});
  if (late) ctx.call(tower_, calls::TowerWithdraw{ctx.self(), ctx.sender(), perc_});
}

}  // namespace paychan
