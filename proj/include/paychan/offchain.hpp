#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>

#include "paychan/crypto.hpp"
#include "paychan/wire.hpp"

namespace paychan {

enum class OffchainError {
  Overdraft,
  ChannelClosed,
  WrongChannel,
  NotMonotonic,
  CapacityMismatch,
  Unfavourable,
  BadSignature,
  NoOutstandingProposal,
  BadReceipt,
  UnknownAnchor,
};

const char* offchain_error_name(OffchainError e);

/// Local refusal: nothing is sent and the ledger is unchanged.
class OffchainReject : public std::runtime_error {
 public:
  explicit OffchainReject(OffchainError code)
      : std::runtime_error(offchain_error_name(code)), code_(code) {}
  OffchainError code() const { return code_; }

 private:
  OffchainError code_;
};

/// A state both parties signed, with the nonce that opens its commitment.
struct SignedState {
  ChannelState state;
  Nonce r;
  Signature sig_a;
  Signature sig_b;

  Digest commitment() const { return hash_commit(state, r); }
};

/// Signs s_0 = (deposit_a, deposit_b, 0) for both parties at channel setup.
SignedState sign_initial_state(const Cid& cid, const ChannelState& s0, const Nonce& r, const KeyPair& a,
                               const KeyPair& b);

/// One party's local view of a channel.
class PartyLedger {
 public:
  PartyLedger(Cid cid, Role role, PublicKey pk_a, PublicKey pk_b, SignedState initial,
              std::size_t history_limit = 0);

  const Cid& cid() const { return cid_; }
  Role role() const { return role_; }
  const PublicKey& key(Role r) const { return r == Role::A ? pk_a_ : pk_b_; }
  Amount capacity() const { return capacity_; }
  const SignedState& latest() const { return history_.back(); }
  /// Oldest-first; bounded by history_limit when non-zero (latest always kept).
  const std::deque<SignedState>& history() const { return history_; }
  /// The co-signed state with this index, if still retained.
  const SignedState* find(Index idx) const;
  const std::optional<WatchtowerReceipt>& receipt() const { return receipt_; }
  const std::optional<PaymentProposal>& outstanding() const { return outstanding_; }

  bool closed() const { return closed_; }
  /// Stops new payments once a closure or dispute is observed.
  void mark_closed() { closed_ = true; }

 private:
  friend PaymentProposal propose_payment(PartyLedger&, const KeyPair&, Amount, NonceSource&);
  friend struct PaymentAcceptance accept_payment(PartyLedger&, const KeyPair&, const PaymentProposal&);
  friend void complete_payment(PartyLedger&, const PaymentProposal&);
  friend void apply_receipt(PartyLedger&, const WatchtowerReceipt&, const PublicKey&);

  void push(SignedState s);

  Cid cid_;
  Role role_;
  PublicKey pk_a_;
  PublicKey pk_b_;
  Amount capacity_;
  std::deque<SignedState> history_;
  std::size_t history_limit_;
  std::optional<PaymentProposal> outstanding_;
  std::optional<WatchtowerReceipt> receipt_;
  bool closed_ = false;
};

/// Builds the next state in which the ledger's owner pays `amount` to the peer and
/// signs it. The ledger advances only once the counter-signature arrives.
PaymentProposal propose_payment(PartyLedger& sender, const KeyPair& key, Amount amount, NonceSource& nonces);

struct PaymentAcceptance {
  /// Same 165-byte layout as the proposal, carrying the receiver's signature.
  PaymentProposal reply;
  /// What the receiver forwards to the watchtower.
  WatchtowerSubmission submission;
};

/// Validates a proposal, counter-signs it and advances the receiver's ledger.
PaymentAcceptance accept_payment(PartyLedger& receiver, const KeyPair& key, const PaymentProposal& proposal);

/// Checks the peer's counter-signature against the outstanding proposal and advances.
void complete_payment(PartyLedger& sender, const PaymentProposal& reply);

/// Stores a watchtower receipt for the ledger's latest state.
void apply_receipt(PartyLedger& ledger, const WatchtowerReceipt& receipt, const PublicKey& watchtower);

/// The submission for a co-signed state (also used for s_0).
WatchtowerSubmission make_submission(const Cid& cid, const SignedState& s);

}  // namespace paychan
