#pragma once

#include <optional>

#include "paychan/chain.hpp"

namespace paychan {

struct ChannelTimeouts {
  /// Tolerance window t: the watchtower answers within it without penalty.
  Height tolerance = 256;
  /// Fail-safe window T.
  Height failsafe = 5760;
};

enum class ChannelFlag : std::uint8_t { Bottom, Ok, Dispute };

const char* flag_name(ChannelFlag f);

/// Per-channel on-chain state machine with watchtower-gated payout.
///
/// Lifecycle: setup (flag -> OK), deposit, close (-> DISPUTE, ddl = now + t,
/// end = ddl + T), optional disputes with strictly newer states, then payout either
/// by the tower contract (confirm or deny) or by a party once now > end. challenge
/// lets the watchtower's customer claw back its deposit after end.
class ChannelContract : public ContractBase<ChannelContract> {
 public:
  explicit ChannelContract(ChannelTimeouts timeouts) : timeouts_(timeouts) {}

  std::string_view kind() const override { return "channel"; }
  void execute(CallContext& ctx, const Call& call) override;

  ChannelFlag flag() const { return flag_; }
  const ChannelTimeouts& timeouts() const { return timeouts_; }
  const std::optional<PublicKey>& party_a() const { return pk_a_; }
  const std::optional<PublicKey>& party_b() const { return pk_b_; }
  Amount deposit_a() const { return bal_a_; }
  Amount deposit_b() const { return bal_b_; }
  Amount capacity() const { return bal_a_ + bal_b_; }
  const Address& tower() const { return tower_; }
  const PublicKey& watchtower_key() const { return pk_wt_; }
  const std::optional<ChannelState>& accepted_state() const { return s_; }
  Height ddl() const { return ddl_; }
  Height end() const { return end_; }
  /// Empty before the first closure of an episode.
  const std::optional<bool>& responded() const { return responded_; }
  const Fraction& perc() const { return perc_; }
  bool challenged() const { return challenged_; }
  /// True once a payout released funds for the current episode.
  bool paid_out() const { return paid_out_; }

 private:
  void setup(CallContext& ctx, const calls::ChannelSetup& c);
  void deposit(CallContext& ctx);
  void close(CallContext& ctx, const calls::ChannelClose& c);
  void dispute(CallContext& ctx, const calls::ChannelDispute& c);
  void payout(CallContext& ctx, const calls::ChannelPayout& c);
  void challenge(CallContext& ctx, const calls::ChannelChallenge& c);

  bool signed_by_parties(const Cid& self, const ChannelState& s, const Nonce& r, const Signature& sig_a,
                         const Signature& sig_b) const;
  void release(CallContext& ctx, const ChannelState& s);
  Address party_address(Role r) const;

  ChannelTimeouts timeouts_;
  ChannelFlag flag_ = ChannelFlag::Bottom;
  std::optional<PublicKey> pk_a_;
  std::optional<PublicKey> pk_b_;
  Amount bal_a_ = 0;
  Amount bal_b_ = 0;
  PublicKey pk_wt_;
  Address tower_;
  std::optional<ChannelState> s_;
  Height ddl_ = 0;
  Height end_ = 0;
  std::optional<bool> responded_;
  Fraction perc_{0, 1};
  bool challenged_ = false;
  bool paid_out_ = false;
};

}  // namespace paychan
