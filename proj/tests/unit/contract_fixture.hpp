#pragma once
// Shared setup for the on-chain contract tests: one tower, one channel, three keys.

#include "paychan/channel_contract.hpp"
#include "paychan/tower_contract.hpp"

namespace paychan::testing {

struct ContractWorld {
  SimChain chain;
  KeyPair a = KeyPair::derive("contract/A");
  KeyPair b = KeyPair::derive("contract/B");
  KeyPair wt = KeyPair::derive("contract/WT");
  KeyPair mallory = KeyPair::derive("contract/M");
  ChannelTimeouts timeouts;
  Address tower;
  Address channel;
  NonceSource nonces{77};

  explicit ContractWorld(ChannelTimeouts t = {4, 10}) : timeouts(t) {
    tower = chain.deploy(std::make_unique<TowerContract>(wt.public_key), address_of(wt.public_key));
    channel = chain.deploy(std::make_unique<ChannelContract>(timeouts), address_of(a.public_key));
    for (const auto* k : {&a, &b, &wt, &mallory}) chain.mint(addr(*k), 1000);
  }

  static Address addr(const KeyPair& k) { return address_of(k.public_key); }

  Receipt step(const KeyPair& from, const Address& to, Call call, Amount value = 0) {
    const TxId id = chain.submit_tx(make_tx(from, to, std::move(call), value));
    chain.mine_block();
    return *chain.receipt(id);
  }

  void mine_until(Height h) {
    while (chain.now() < h) chain.mine_block();
  }

  const ChannelContract& ch() const { return *chain.view<ChannelContract>(channel); }
  const TowerContract& tw() const { return *chain.view<TowerContract>(tower); }

  struct Signed {
    ChannelState state;
    Nonce r;
    Signature sig_a;
    Signature sig_b;
  };

  Signed sign_state(const ChannelState& s) {
    const Nonce r = nonces.next();
    const auto payload = payment_payload(channel, s.idx, hash_commit(s, r));
    return {s, r, sign(a, payload), sign(b, payload)};
  }

  Signature receipt_sig(const Signed& s) const {
    return sign(wt, receipt_payload(channel, s.state.idx, hash_commit(s.state, s.r)));
  }

  // A deposits `da`, B deposits `db` and pays the tower fee.
  void open(Amount da, Amount db, Amount fee) {
    step(a, channel, calls::ChannelSetup{tower, wt.public_key}, da);
    step(b, channel, calls::ChannelDeposit{}, db);
    if (fee > 0) step(b, tower, calls::TowerDeposit{channel}, fee);
  }

  Receipt close(const KeyPair& by, const Signed& s) {
    return step(by, channel, calls::ChannelClose{s.state, s.r, s.sig_a, s.sig_b});
  }

  Receipt update(std::initializer_list<int> bits) { return step(wt, tower, calls::TowerUpdate{ConfirmationSet(bits)}); }
};

}  // namespace paychan::testing
