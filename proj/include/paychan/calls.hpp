#pragma once

// Contract call ABI of the simulator: one struct per method, canonical argument encoding.

#include <string_view>
#include <variant>

#include "paychan/confirmation_set.hpp"
#include "paychan/types.hpp"
#include "paychan/wire.hpp"

namespace paychan::calls {

// Channel contract. The calling key is the party; attached value is the deposit.
struct ChannelSetup {
  Address tower;
  PublicKey wt_key;
};
struct ChannelDeposit {};
struct ChannelClose {
  ChannelState state;
  Nonce r;
  Signature sig_a;
  Signature sig_b;
};
struct ChannelDispute {
  ChannelState state;
  Nonce r;
  Signature sig_a;
  Signature sig_b;
};
struct ChannelPayout {
  ChannelState state;
  bool is_pay = false;
};
struct ChannelChallenge {
  ChannelState state;
  Nonce r;
  Signature wt_sig;
};

// Tower contract.
struct TowerDeposit {
  Cid cid;
};
struct TowerWithdraw {
  Cid cid;
  Address victim;
  Fraction percentage;
};
struct TowerClose {
  Cid cid;
  ChannelState state;
};
struct TowerUpdate {
  ConfirmationSet confs;
};

// Short-lived assertion channel.
struct AssertionSetup {};
struct AssertionDeposit {};
struct AssertionClose {
  ShortLivedAssertion assertion;
};
struct AssertionDispute {
  ShortLivedAssertion assertion;
};
struct AssertionPayout {};

}  // namespace paychan::calls

namespace paychan {

using Call = std::variant<calls::ChannelSetup, calls::ChannelDeposit, calls::ChannelClose,
                          calls::ChannelDispute, calls::ChannelPayout, calls::ChannelChallenge,
                          calls::TowerDeposit, calls::TowerWithdraw, calls::TowerClose,
                          calls::TowerUpdate, calls::AssertionSetup, calls::AssertionDeposit,
                          calls::AssertionClose, calls::AssertionDispute, calls::AssertionPayout>;

std::string_view method_name(const Call& call);
/// Canonical argument bytes (method-specific, fixed field order, big-endian integers).
Bytes encode_args(const Call& call);

}  // namespace paychan
