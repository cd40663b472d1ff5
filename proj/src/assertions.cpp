#include "paychan/assertions.hpp"

#include <algorithm>

#include "paychan/offchain.hpp"

namespace paychan {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

const char* freshness_name(Freshness f) { return f == Freshness::Fresh ? "fresh" : "stale"; }

const char* phase_name(AssertionPhase p) {
  switch (p) {
    case AssertionPhase::None:
      return "none";
    case AssertionPhase::Fast:
      return "fast";
    case AssertionPhase::Slow:
      return "slow";
  }
  return "?";
}

Freshness verify_freshness(std::span<const Digest> recent, const Digest& anchor) {
  return std::find(recent.begin(), recent.end(), anchor) != recent.end() ? Freshness::Fresh : Freshness::Stale;
}

Freshness verify_freshness(const SimChain& chain, const Digest& anchor, std::size_t n) {
  const auto recent = chain.recent_block_hashes(n);
  return verify_freshness(recent, anchor);
}

bool economics_check(Amount gamma, Amount sum_tx) { return sum_tx < gamma; }

bool assertion_signed_by(const ShortLivedAssertion& a, const PublicKey& pk_a, const PublicKey& pk_b) {
  const auto payload = assertion_payload(a.cid, a.state, a.anchor);
  return verify(pk_a, payload, a.sig_a) && verify(pk_b, payload, a.sig_b);
}

void AssertionChannelContract::execute(CallContext& ctx, const Call& call) {
  std::visit(overloaded{
                 [&](const calls::AssertionSetup&) { setup(ctx); },
                 [&](const calls::AssertionDeposit&) { deposit(ctx); },
                 [&](const calls::AssertionClose& c) { close(ctx, c.assertion); },
                 [&](const calls::AssertionDispute& c) { dispute(ctx, c.assertion); },
                 [&](const calls::AssertionPayout&) { payout(ctx); },
                 [&](const auto&) { revert("unknown-method"); },
             },
             call);
}

void AssertionChannelContract::setup(CallContext& ctx) {
  require(flag_ == ChannelFlag::Bottom, "flag-not-bottom");
  require(ctx.sender_key().has_value(), "unauthorized");
  *this = AssertionChannelContract(policy_);
  pk_a_ = *ctx.sender_key();
  bal_a_ = ctx.value();
  flag_ = ChannelFlag::Ok;
}

void AssertionChannelContract::deposit(CallContext& ctx) {
  require(flag_ == ChannelFlag::Ok, "flag-not-ok");
  require(ctx.sender_key().has_value(), "unauthorized");
  require(!pk_b_.has_value(), "already-deposited");
  require(*ctx.sender_key() != *pk_a_, "unauthorized");
  pk_b_ = *ctx.sender_key();
  bal_b_ = ctx.value();
}

void AssertionChannelContract::check_signed(CallContext& ctx, const ShortLivedAssertion& a) const {
  require(a.cid == ctx.self(), "wrong-channel");
  const auto payload = assertion_payload(a.cid, a.state, a.anchor);
  require(verify(*pk_a_, payload, a.sig_a), "bad-signature");
  require(!pk_b_ || verify(*pk_b_, payload, a.sig_b), "bad-signature");
  require(a.state.total() <= capacity(), "insufficient-funds");
}

void AssertionChannelContract::close(CallContext& ctx, const ShortLivedAssertion& a) {
  require(flag_ == ChannelFlag::Ok, "flag-not-ok");
  check_signed(ctx, a);
  const auto recent = ctx.recent_block_hashes(policy_.n);
  const Freshness f = verify_freshness(recent, a.anchor);
  flag_ = ChannelFlag::Dispute;
  s_ = a.state;
  close_freshness_ = f;
  close_height_ = ctx.now();
  replacements_ = 0;
  if (f == Freshness::Fresh) {
    phase_ = AssertionPhase::Fast;
    deadline_ = ctx.now() + policy_.fast;
  } else {
    phase_ = AssertionPhase::Slow;
    deadline_ = ctx.now() + policy_.failsafe;
  }
  ctx.emit(EventKind::Closure, a.state, Nonce{});
}

void AssertionChannelContract::dispute(CallContext& ctx, const ShortLivedAssertion& a) {
  require(flag_ == ChannelFlag::Dispute, "flag-not-dispute");
  require(ctx.now() < deadline_, "past-deadline");
  check_signed(ctx, a);
  require(a.state.idx > s_->idx, "stale-state");
  s_ = a.state;
  ++replacements_;
  if (phase_ == AssertionPhase::Fast) {
    // One replacement restarts the short window; a second one means the parties keep
    // contradicting each other, so settlement falls back to the fail-safe window.
    if (replacements_ == 1) {
      deadline_ = ctx.now() + policy_.fast;
    } else {
      phase_ = AssertionPhase::Slow;
      deadline_ = ctx.now() + policy_.failsafe;
    }
  }
  ctx.emit(EventKind::Dispute, a.state, Nonce{});
}

void AssertionChannelContract::payout(CallContext& ctx) {
  require(flag_ == ChannelFlag::Dispute, "flag-not-dispute");
  const bool is_party = (pk_a_ && ctx.sender() == address_of(*pk_a_)) || (pk_b_ && ctx.sender() == address_of(*pk_b_));
  require(is_party, "unauthorized");
  require(ctx.now() >= deadline_, "before-deadline");
  require(s_->bal_b == 0 || pk_b_.has_value(), "state-mismatch");
  ctx.transfer(address_of(*pk_a_), s_->bal_a);
  if (s_->bal_b > 0) ctx.transfer(address_of(*pk_b_), s_->bal_b);
  flag_ = ChannelFlag::Bottom;
  paid_out_ = true;
}

AssertionLedger::AssertionLedger(Cid cid, Role role, PublicKey pk_a, PublicKey pk_b, ShortLivedAssertion initial)
    : cid_(cid), role_(role), pk_a_(pk_a), pk_b_(pk_b), capacity_(initial.state.total()) {
  history_.push_back(std::move(initial));
}

ShortLivedAssertion sign_initial_assertion(const Cid& cid, const ChannelState& s0, const Digest& anchor,
                                           const KeyPair& a, const KeyPair& b) {
  ShortLivedAssertion out{cid, s0, anchor, {}, {}};
  const auto payload = assertion_payload(cid, s0, anchor);
  out.sig_a = sign(a, payload);
  out.sig_b = sign(b, payload);
  return out;
}

ShortLivedAssertion propose_assertion(AssertionLedger& payer, const KeyPair& key, Amount amount,
                                      const Digest& anchor) {
  if (payer.closed()) throw OffchainReject(OffchainError::ChannelClosed);
  const ChannelState& cur = payer.latest().state;
  if (cur.balance(payer.role()) < amount) throw OffchainReject(OffchainError::Overdraft);
  ChannelState next = cur;
  if (payer.role() == Role::A) {
    next.bal_a -= amount;
    next.bal_b += amount;
  } else {
    next.bal_b -= amount;
    next.bal_a += amount;
  }
  next.idx = cur.idx + 1;
  ShortLivedAssertion p{payer.cid(), next, anchor, {}, {}};
  const auto sig = sign(key, assertion_payload(p.cid, p.state, p.anchor));
  (payer.role() == Role::A ? p.sig_a : p.sig_b) = sig;
  payer.outstanding_ = p;
  return p;
}

ShortLivedAssertion accept_assertion(AssertionLedger& payee, const KeyPair& key, const ShortLivedAssertion& proposal,
                                     const SimChain& view) {
  if (payee.closed()) throw OffchainReject(OffchainError::ChannelClosed);
  if (proposal.cid != payee.cid()) throw OffchainReject(OffchainError::WrongChannel);
  const ChannelState& cur = payee.latest().state;
  if (proposal.state.idx != cur.idx + 1) throw OffchainReject(OffchainError::NotMonotonic);
  if (proposal.state.total() != payee.capacity()) throw OffchainReject(OffchainError::CapacityMismatch);
  if (proposal.state.balance(payee.role()) < cur.balance(payee.role()))
    throw OffchainReject(OffchainError::Unfavourable);
  if (!view.contains_block_hash(proposal.anchor)) throw OffchainReject(OffchainError::UnknownAnchor);

  const Role payer = other(payee.role());
  const auto payload = assertion_payload(proposal.cid, proposal.state, proposal.anchor);
  const Signature& payer_sig = payer == Role::A ? proposal.sig_a : proposal.sig_b;
  if (!verify(payee.key(payer), payload, payer_sig)) throw OffchainReject(OffchainError::BadSignature);

  ShortLivedAssertion out = proposal;
  (payee.role() == Role::A ? out.sig_a : out.sig_b) = sign(key, payload);
  payee.history_.push_back(out);
  return out;
}

void complete_assertion(AssertionLedger& payer, const ShortLivedAssertion& signed_assertion) {
  if (!payer.outstanding_) throw OffchainReject(OffchainError::NoOutstandingProposal);
  const ShortLivedAssertion& mine = *payer.outstanding_;
  if (signed_assertion.cid != mine.cid || signed_assertion.state != mine.state || signed_assertion.anchor != mine.anchor)
    throw OffchainReject(OffchainError::NotMonotonic);
  if (!assertion_signed_by(signed_assertion, payer.key(Role::A), payer.key(Role::B)))
    throw OffchainReject(OffchainError::BadSignature);
  payer.outstanding_.reset();
  payer.history_.push_back(signed_assertion);
}

ShortLivedAssertion sign_assertion(AssertionLedger& payer, const KeyPair& payer_key, AssertionLedger& payee,
                                   const KeyPair& payee_key, Amount amount, const SimChain& view) {
  const auto proposal = propose_assertion(payer, payer_key, amount, view.tip().hash);
  const auto signed_assertion = accept_assertion(payee, payee_key, proposal, view);
  complete_assertion(payer, signed_assertion);
  return signed_assertion;
}

}  // namespace paychan
