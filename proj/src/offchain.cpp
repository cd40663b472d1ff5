#include "paychan/offchain.hpp"

namespace paychan {

const char* offchain_error_name(OffchainError e) {
  switch (e) {
    case OffchainError::Overdraft:
      return "overdraft";
    case OffchainError::ChannelClosed:
      return "channel-closed";
    case OffchainError::WrongChannel:
      return "wrong-channel";
    case OffchainError::NotMonotonic:
      return "not-monotonic";
    case OffchainError::CapacityMismatch:
      return "capacity-mismatch";
    case OffchainError::Unfavourable:
      return "unfavourable";
    case OffchainError::BadSignature:
      return "bad-signature";
    case OffchainError::NoOutstandingProposal:
      return "no-outstanding-proposal";
    case OffchainError::BadReceipt:
      return "bad-receipt";
    case OffchainError::UnknownAnchor:
      return "unknown-anchor";
  }
  return "?";
}

SignedState sign_initial_state(const Cid& cid, const ChannelState& s0, const Nonce& r, const KeyPair& a,
                               const KeyPair& b) {
  SignedState out{s0, r, {}, {}};
  const auto payload = payment_payload(cid, s0.idx, out.commitment());
  out.sig_a = sign(a, payload);
  out.sig_b = sign(b, payload);
  return out;
}

PartyLedger::PartyLedger(Cid cid, Role role, PublicKey pk_a, PublicKey pk_b, SignedState initial,
                         std::size_t history_limit)
    : cid_(cid),
      role_(role),
      pk_a_(pk_a),
      pk_b_(pk_b),
      capacity_(initial.state.total()),
      history_limit_(history_limit) {
  history_.push_back(std::move(initial));
}

const SignedState* PartyLedger::find(Index idx) const {
  for (auto it = history_.rbegin(); it != history_.rend(); ++it)
    if (it->state.idx == idx) return &*it;
  return nullptr;
}

void PartyLedger::push(SignedState s) {
  history_.push_back(std::move(s));
  if (history_limit_ > 0)
    while (history_.size() > history_limit_) history_.pop_front();
}

PaymentProposal propose_payment(PartyLedger& sender, const KeyPair& key, Amount amount, NonceSource& nonces) {
  if (sender.closed()) throw OffchainReject(OffchainError::ChannelClosed);
  const ChannelState& cur = sender.latest().state;
  if (cur.balance(sender.role()) < amount) throw OffchainReject(OffchainError::Overdraft);

  ChannelState next = cur;
  if (sender.role() == Role::A) {
    next.bal_a -= amount;
    next.bal_b += amount;
  } else {
    next.bal_b -= amount;
    next.bal_a += amount;
  }
  next.idx = cur.idx + 1;

  PaymentProposal p{sender.cid(), next, nonces.next(), {}};
  p.sig = sign(key, p.signed_payload());
  sender.outstanding_ = p;
  return p;
}

PaymentAcceptance accept_payment(PartyLedger& receiver, const KeyPair& key, const PaymentProposal& proposal) {
  if (receiver.closed()) throw OffchainReject(OffchainError::ChannelClosed);
  if (proposal.cid != receiver.cid()) throw OffchainReject(OffchainError::WrongChannel);
  const ChannelState& cur = receiver.latest().state;
  if (proposal.state.idx != cur.idx + 1) throw OffchainReject(OffchainError::NotMonotonic);
  if (proposal.state.total() != receiver.capacity()) throw OffchainReject(OffchainError::CapacityMismatch);
  // Payer-initiated transfers only: the receiver never signs away its own funds.
  if (proposal.state.balance(receiver.role()) < cur.balance(receiver.role()))
    throw OffchainReject(OffchainError::Unfavourable);

  const Role payer = other(receiver.role());
  const auto payload = proposal.signed_payload();
  if (!verify(receiver.key(payer), payload, proposal.sig)) throw OffchainReject(OffchainError::BadSignature);

  PaymentAcceptance out;
  out.reply = proposal;
  out.reply.sig = sign(key, payload);

  SignedState st{proposal.state, proposal.r, {}, {}};
  (payer == Role::A ? st.sig_a : st.sig_b) = proposal.sig;
  (payer == Role::A ? st.sig_b : st.sig_a) = out.reply.sig;
  out.submission = make_submission(receiver.cid(), st);
  receiver.push(std::move(st));
  return out;
}

void complete_payment(PartyLedger& sender, const PaymentProposal& reply) {
  if (!sender.outstanding_) throw OffchainReject(OffchainError::NoOutstandingProposal);
  const PaymentProposal& mine = *sender.outstanding_;
  if (reply.cid != mine.cid || reply.state != mine.state || reply.r != mine.r)
    throw OffchainReject(OffchainError::NotMonotonic);
  const Role peer = other(sender.role());
  if (!verify(sender.key(peer), mine.signed_payload(), reply.sig)) throw OffchainReject(OffchainError::BadSignature);

  SignedState st{mine.state, mine.r, {}, {}};
  (sender.role() == Role::A ? st.sig_a : st.sig_b) = mine.sig;
  (sender.role() == Role::A ? st.sig_b : st.sig_a) = reply.sig;
  sender.outstanding_.reset();
  sender.push(std::move(st));
}

void apply_receipt(PartyLedger& ledger, const WatchtowerReceipt& receipt, const PublicKey& watchtower) {
  if (receipt.cid != ledger.cid() || !receipt.verify(watchtower)) throw OffchainReject(OffchainError::BadReceipt);
  const SignedState* st = ledger.find(receipt.idx);
  if (st == nullptr || st->commitment() != receipt.h_s) throw OffchainReject(OffchainError::BadReceipt);
  if (!ledger.receipt_ || ledger.receipt_->idx < receipt.idx) ledger.receipt_ = receipt;
}

WatchtowerSubmission make_submission(const Cid& cid, const SignedState& s) {
  return WatchtowerSubmission{cid, s.commitment(), s.state.idx, s.sig_a, s.sig_b};
}

}  // namespace paychan
