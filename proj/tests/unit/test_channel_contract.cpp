#include <gtest/gtest.h>

#include "contract_fixture.hpp"

using namespace paychan;
using paychan::testing::ContractWorld;

namespace {
Amount bal(const ContractWorld& w, const KeyPair& k) { return w.chain.balance_of(ContractWorld::addr(k)); }
}  // namespace

TEST(ChannelContract, setup_and_deposit_guards) {
  ContractWorld w;
  EXPECT_EQ(w.step(w.a, w.channel, calls::ChannelDeposit{}, 5).reason, "flag-not-ok");
  EXPECT_TRUE(w.step(w.a, w.channel, calls::ChannelSetup{w.tower, w.wt.public_key}, 10).ok());
  EXPECT_EQ(w.ch().flag(), ChannelFlag::Ok);
  EXPECT_EQ(w.ch().deposit_a(), 10u);
  EXPECT_EQ(w.step(w.b, w.channel, calls::ChannelSetup{w.tower, w.wt.public_key}, 1).reason, "flag-not-bottom");
  EXPECT_EQ(w.step(w.a, w.channel, calls::ChannelDeposit{}, 5).reason, "unauthorized");
  EXPECT_TRUE(w.step(w.b, w.channel, calls::ChannelDeposit{}, 5).ok());
  EXPECT_EQ(w.step(w.mallory, w.channel, calls::ChannelDeposit{}, 5).reason, "already-deposited");
  EXPECT_EQ(w.ch().capacity(), 15u);
  EXPECT_EQ(w.chain.balance_of(w.channel), 15u);
  EXPECT_EQ(w.step(w.a, w.channel, calls::TowerDeposit{w.channel}).reason, "unknown-method");
}

TEST(ChannelContract, close_sets_deadlines_and_registers_with_tower) {
  ContractWorld w;
  w.open(10, 5, 100);
  auto s1 = w.sign_state({7, 8, 1});
  auto bad = s1;
  bad.sig_b = s1.sig_a;
  EXPECT_EQ(w.close(w.a, bad).reason, "bad-signature");
  const Receipt& rc = w.close(w.a, s1);
  ASSERT_TRUE(rc.ok());
  EXPECT_EQ(w.ch().flag(), ChannelFlag::Dispute);
  EXPECT_EQ(w.ch().ddl(), rc.height + 4);
  EXPECT_EQ(w.ch().end(), rc.height + 14);
  EXPECT_EQ(w.ch().responded(), std::optional<bool>(false));
  const auto entry = w.tw().current_entry();
  ASSERT_EQ(entry.size(), 1u);
  EXPECT_EQ(entry.cids[0], w.channel);
  EXPECT_EQ(entry.states[0], s1.state);
  const auto ev = w.chain.read_events(rc.height, rc.height);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].kind, EventKind::Closure);
  EXPECT_EQ(ev[0].cid, w.channel);
  EXPECT_EQ(ev[0].r, s1.r);
  EXPECT_EQ(w.close(w.b, s1).reason, "flag-not-ok");
}

TEST(ChannelContract, dispute_requires_newer_state_before_end) {
  ContractWorld w;
  w.open(10, 5, 100);
  auto s1 = w.sign_state({7, 8, 1});
  auto s2 = w.sign_state({5, 10, 2});
  EXPECT_EQ(w.step(w.b, w.channel, calls::ChannelDispute{s2.state, s2.r, s2.sig_a, s2.sig_b}).reason,
            "flag-not-dispute");
  w.close(w.a, s1);
  EXPECT_EQ(w.step(w.b, w.channel, calls::ChannelDispute{s1.state, s1.r, s1.sig_a, s1.sig_b}).reason, "stale-state");
  EXPECT_EQ(w.step(w.b, w.channel, calls::ChannelDispute{s2.state, s2.r, s2.sig_b, s2.sig_a}).reason,
            "bad-signature");
  const Receipt& rc = w.step(w.b, w.channel, calls::ChannelDispute{s2.state, s2.r, s2.sig_a, s2.sig_b});
  ASSERT_TRUE(rc.ok());
  EXPECT_EQ(w.ch().accepted_state(), std::optional<ChannelState>(s2.state));
  EXPECT_EQ(w.tw().current_entry().states[0], s2.state);
  EXPECT_EQ(w.tw().current_entry().size(), 1u);
  EXPECT_EQ(w.chain.read_events(rc.height, rc.height)[0].kind, EventKind::Dispute);

  auto s3 = w.sign_state({4, 11, 3});
  w.mine_until(w.ch().end() - 1);  // the next tx lands at end
  EXPECT_EQ(w.step(w.b, w.channel, calls::ChannelDispute{s3.state, s3.r, s3.sig_a, s3.sig_b}).reason, "past-end");
}

TEST(ChannelContract, tower_confirmation_pays_out_immediately) {
  ContractWorld w;
  w.open(10, 5, 100);
  auto s1 = w.sign_state({7, 8, 1});
  const Height closed = w.close(w.a, s1).height;
  const Receipt& up = w.update({1});
  ASSERT_TRUE(up.ok());
  EXPECT_TRUE(up.inner_failures.empty());
  EXPECT_EQ(up.height, closed + 1);
  EXPECT_TRUE(w.ch().paid_out());
  EXPECT_EQ(w.ch().flag(), ChannelFlag::Bottom);
  EXPECT_EQ(bal(w, w.a), 1000u - 10 + 7);
  EXPECT_EQ(bal(w, w.b), 1000u - 5 - 100 + 8);
  EXPECT_TRUE(w.ch().perc().is_zero());
  EXPECT_EQ(w.tw().counter(), 1u);
}

TEST(ChannelContract, party_payout_only_after_end) {
  ContractWorld w;
  w.open(10, 5, 100);
  auto s1 = w.sign_state({7, 8, 1});
  w.close(w.a, s1);
  const Height end = w.ch().end();
  w.mine_until(end - 1);
  EXPECT_EQ(w.step(w.a, w.channel, calls::ChannelPayout{s1.state}).reason, "before-end");  // lands at end
  EXPECT_EQ(w.step(w.mallory, w.channel, calls::ChannelPayout{s1.state}).reason, "unauthorized");
  EXPECT_EQ(w.step(w.a, w.channel, calls::ChannelPayout{{8, 7, 1}}).reason, "state-mismatch");
  EXPECT_EQ(bal(w, w.a), 990u);
  const Receipt& rc = w.step(w.b, w.channel, calls::ChannelPayout{s1.state});
  ASSERT_TRUE(rc.ok());
  EXPECT_GT(rc.height, end);
  EXPECT_EQ(bal(w, w.a), 997u);
  EXPECT_EQ(bal(w, w.b), 903u);
}

TEST(ChannelContract, late_response_sets_penalty_fraction) {
  ContractWorld w;  // t = 4, T = 10
  w.open(10, 5, 100);
  auto s1 = w.sign_state({7, 8, 1});
  w.close(w.a, s1);
  const Height ddl = w.ch().ddl();
  w.mine_until(ddl + 2);
  ASSERT_TRUE(w.update({1}).ok());  // lands at ddl + 3
  EXPECT_EQ(w.ch().perc(), (Fraction{3, 10}));
  EXPECT_TRUE(w.ch().paid_out());

  w.mine_until(w.ch().end());
  const Receipt& ch = w.step(w.b, w.channel, calls::ChannelChallenge{s1.state, s1.r, w.receipt_sig(s1)});
  ASSERT_TRUE(ch.ok()) << ch.reason;
  EXPECT_EQ(bal(w, w.b), 903u + 30);  // floor(100 * 3/10)
  EXPECT_EQ(w.tw().account(w.channel)->deposit, 70u);
  EXPECT_EQ(w.step(w.b, w.channel, calls::ChannelChallenge{s1.state, s1.r, w.receipt_sig(s1)}).reason,
            "already-challenged");
}

TEST(ChannelContract, penalty_fraction_caps_at_one) {
  ContractWorld w;
  w.open(10, 5, 100);
  auto s1 = w.sign_state({7, 8, 1});
  w.close(w.a, s1);
  w.mine_until(w.ch().ddl() + 40);
  ASSERT_TRUE(w.update({0}).ok());
  EXPECT_EQ(w.ch().perc(), Fraction::one());
  // A denial reopens a full window from the response.
  EXPECT_EQ(w.ch().end(), w.chain.now() + 10);
  EXPECT_EQ(w.ch().flag(), ChannelFlag::Dispute);
}

TEST(ChannelContract, denial_never_shortens_end) {
  ContractWorld w;
  w.open(10, 5, 100);
  auto s1 = w.sign_state({7, 8, 1});
  w.close(w.a, s1);
  const Height end = w.ch().end();
  ASSERT_TRUE(w.update({0}).ok());
  EXPECT_EQ(w.ch().end(), end);
  EXPECT_TRUE(w.ch().perc().is_zero());
  EXPECT_EQ(w.ch().responded(), std::optional<bool>(true));
}

TEST(ChannelContract, challenge_when_tower_never_answers) {
  ContractWorld w;
  w.open(10, 5, 100);
  auto s1 = w.sign_state({7, 8, 1});
  w.close(w.a, s1);
  w.mine_until(w.ch().end() - 1);
  EXPECT_EQ(w.step(w.b, w.channel, calls::ChannelChallenge{s1.state, s1.r, w.receipt_sig(s1)}).reason, "before-end");
  ASSERT_TRUE(w.step(w.a, w.channel, calls::ChannelPayout{s1.state}).ok());
  EXPECT_EQ(w.step(w.a, w.channel, calls::ChannelChallenge{s1.state, s1.r, w.receipt_sig(s1)}).reason,
            "victim-mismatch");
  auto forged = w.receipt_sig(s1);
  forged.bytes[3] ^= 1;
  EXPECT_EQ(w.step(w.b, w.channel, calls::ChannelChallenge{s1.state, s1.r, forged}).reason, "bad-receipt");
  ASSERT_TRUE(w.step(w.b, w.channel, calls::ChannelChallenge{s1.state, s1.r, w.receipt_sig(s1)}).ok());
  EXPECT_EQ(bal(w, w.b), 903u + 100);
  EXPECT_EQ(w.tw().total_withdrawn(w.channel), 100u);
}

TEST(ChannelContract, challenge_after_wrong_confirmation) {
  ContractWorld w;
  w.open(10, 5, 100);
  auto s1 = w.sign_state({7, 8, 1});
  auto s2 = w.sign_state({5, 10, 2});
  w.close(w.a, s1);
  ASSERT_TRUE(w.update({1}).ok());  // tower confirms the stale state
  EXPECT_EQ(w.ch().accepted_state(), std::optional<ChannelState>(s1.state));
  w.mine_until(w.ch().end());
  // Receipt for the stale state proves nothing.
  EXPECT_EQ(w.step(w.b, w.channel, calls::ChannelChallenge{s1.state, s1.r, w.receipt_sig(s1)}).reason,
            "nothing-to-claim");
  ASSERT_TRUE(w.step(w.b, w.channel, calls::ChannelChallenge{s2.state, s2.r, w.receipt_sig(s2)}).ok());
  EXPECT_EQ(w.tw().account(w.channel)->deposit, 0u);
}

TEST(ChannelContract, challenge_without_closure) {
  ContractWorld w;
  w.open(10, 5, 100);
  auto s1 = w.sign_state({7, 8, 1});
  EXPECT_EQ(w.step(w.b, w.channel, calls::ChannelChallenge{s1.state, s1.r, w.receipt_sig(s1)}).reason, "no-closure");
}

TEST(ChannelContract, close_before_counterparty_deposit_needs_only_a) {
  ContractWorld w;
  w.step(w.a, w.channel, calls::ChannelSetup{w.tower, w.wt.public_key}, 10);
  const ChannelState s0{10, 0, 0};
  const Nonce r = w.nonces.next();
  const Signature sa = sign(w.a, payment_payload(w.channel, 0, hash_commit(s0, r)));
  EXPECT_EQ(w.step(w.a, w.channel, calls::ChannelClose{s0, r, sa, sa}).reason, "");
  ASSERT_TRUE(w.update({1}).ok());
  EXPECT_EQ(bal(w, w.a), 1000u);
}

TEST(ChannelContract, new_episode_after_payout) {
  ContractWorld w;
  w.open(10, 5, 0);
  auto s1 = w.sign_state({7, 8, 1});
  w.close(w.a, s1);
  w.update({1});
  ASSERT_EQ(w.ch().flag(), ChannelFlag::Bottom);
  ASSERT_TRUE(w.step(w.a, w.channel, calls::ChannelSetup{w.tower, w.wt.public_key}, 3).ok());
  EXPECT_EQ(w.ch().deposit_a(), 3u);
  EXPECT_FALSE(w.ch().party_b().has_value());
  EXPECT_FALSE(w.ch().accepted_state().has_value());
  EXPECT_FALSE(w.ch().paid_out());
}
