#pragma once

// Short-lived assertions: a co-signed state bound to a recent block hash. A closure with a
// fresh assertion settles after t_fast blocks; anything else falls back to the fail-safe window.

#include <optional>
#include <span>
#include <vector>

#include "paychan/chain.hpp"
#include "paychan/channel_contract.hpp"
#include "paychan/wire.hpp"

namespace paychan {

struct FreshnessPolicy {
  /// An anchor is fresh when it is one of the last n completed blocks.
  std::size_t n = 4;
  /// Dispute window for a fresh closure.
  Height fast = 2;
  /// Fail-safe window for a stale closure (and after repeated fast-path disputes).
  Height failsafe = 5760;
};

enum class Freshness : std::uint8_t { Fresh, Stale };

const char* freshness_name(Freshness f);

/// `recent` is newest first, as returned by recent_block_hashes(n).
Freshness verify_freshness(std::span<const Digest> recent, const Digest& anchor);
Freshness verify_freshness(const SimChain& chain, const Digest& anchor, std::size_t n);

/// The short-lived path only pays off for transfers smaller than the punishment gamma.
bool economics_check(Amount gamma, Amount sum_tx);

bool assertion_signed_by(const ShortLivedAssertion& a, const PublicKey& pk_a, const PublicKey& pk_b);

enum class AssertionPhase : std::uint8_t { None, Fast, Slow };

const char* phase_name(AssertionPhase p);

/// Channel contract whose dispute window depends on the freshness of the closing assertion.
class AssertionChannelContract : public ContractBase<AssertionChannelContract> {
 public:
  explicit AssertionChannelContract(FreshnessPolicy policy) : policy_(policy) {}

  std::string_view kind() const override { return "assertion-channel"; }
  void execute(CallContext& ctx, const Call& call) override;

  const FreshnessPolicy& policy() const { return policy_; }
  ChannelFlag flag() const { return flag_; }
  const std::optional<PublicKey>& party_a() const { return pk_a_; }
  const std::optional<PublicKey>& party_b() const { return pk_b_; }
  Amount capacity() const { return bal_a_ + bal_b_; }
  const std::optional<ChannelState>& accepted_state() const { return s_; }
  AssertionPhase phase() const { return phase_; }
  /// Freshness of the assertion the channel was closed with.
  std::optional<Freshness> close_freshness() const { return close_freshness_; }
  Height close_height() const { return close_height_; }
  /// First height at which payout succeeds.
  Height deadline() const { return deadline_; }
  unsigned replacements() const { return replacements_; }
  bool paid_out() const { return paid_out_; }

 private:
  void setup(CallContext& ctx);
  void deposit(CallContext& ctx);
  void close(CallContext& ctx, const ShortLivedAssertion& a);
  void dispute(CallContext& ctx, const ShortLivedAssertion& a);
  void payout(CallContext& ctx);
  void check_signed(CallContext& ctx, const ShortLivedAssertion& a) const;

  FreshnessPolicy policy_;
  ChannelFlag flag_ = ChannelFlag::Bottom;
  std::optional<PublicKey> pk_a_;
  std::optional<PublicKey> pk_b_;
  Amount bal_a_ = 0;
  Amount bal_b_ = 0;
  std::optional<ChannelState> s_;
  AssertionPhase phase_ = AssertionPhase::None;
  std::optional<Freshness> close_freshness_;
  Height close_height_ = 0;
  Height deadline_ = 0;
  unsigned replacements_ = 0;
  bool paid_out_ = false;
};

/// One party's view of an assertion channel.
class AssertionLedger {
 public:
  AssertionLedger(Cid cid, Role role, PublicKey pk_a, PublicKey pk_b, ShortLivedAssertion initial);

  const Cid& cid() const { return cid_; }
  Role role() const { return role_; }
  const PublicKey& key(Role r) const { return r == Role::A ? pk_a_ : pk_b_; }
  Amount capacity() const { return capacity_; }
  const ShortLivedAssertion& latest() const { return history_.back(); }
  const std::vector<ShortLivedAssertion>& history() const { return history_; }
  const std::optional<ShortLivedAssertion>& outstanding() const { return outstanding_; }
  bool closed() const { return closed_; }
  void mark_closed() { closed_ = true; }

 private:
  friend ShortLivedAssertion propose_assertion(AssertionLedger&, const KeyPair&, Amount, const Digest&);
  friend ShortLivedAssertion accept_assertion(AssertionLedger&, const KeyPair&, const ShortLivedAssertion&,
                                              const SimChain&);
  friend void complete_assertion(AssertionLedger&, const ShortLivedAssertion&);

  Cid cid_;
  Role role_;
  PublicKey pk_a_;
  PublicKey pk_b_;
  Amount capacity_;
  std::vector<ShortLivedAssertion> history_;
  std::optional<ShortLivedAssertion> outstanding_;
  bool closed_ = false;
};

/// Both signatures over (s_0, anchor).
ShortLivedAssertion sign_initial_assertion(const Cid& cid, const ChannelState& s0, const Digest& anchor,
                                           const KeyPair& a, const KeyPair& b);

/// Next state paying `amount` to the peer, anchored at `anchor`, signed by the payer only.
ShortLivedAssertion propose_assertion(AssertionLedger& payer, const KeyPair& key, Amount amount,
                                      const Digest& anchor);

/// The payee checks the proposal against its own chain view (anchor must be a block it
/// knows) and returns the fully signed assertion. Throws OffchainReject.
ShortLivedAssertion accept_assertion(AssertionLedger& payee, const KeyPair& key, const ShortLivedAssertion& proposal,
                                     const SimChain& view);

void complete_assertion(AssertionLedger& payer, const ShortLivedAssertion& signed_assertion);

/// Runs the full exchange between two ledgers anchored at the payee's current tip.
ShortLivedAssertion sign_assertion(AssertionLedger& payer, const KeyPair& payer_key, AssertionLedger& payee,
                                   const KeyPair& payee_key, Amount amount, const SimChain& view);

}  // namespace paychan
