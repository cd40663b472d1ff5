#include <gtest/gtest.h>

#include <algorithm>
#include <functional>

#include "paychan/offchain.hpp"

using namespace paychan;

namespace {

struct Pair {
  KeyPair ka = KeyPair::derive("off/A");
  KeyPair kb = KeyPair::derive("off/B");
  KeyPair kwt = KeyPair::derive("off/WT");
  Cid cid = fixed_from_hex<Cid>("00000000000000000000000000000000000000c1");
  NonceSource nonces{21};
  SignedState s0;
  PartyLedger la;
  PartyLedger lb;

  explicit Pair(ChannelState init = {10, 0, 0}, std::size_t limit = 0)
      : s0(sign_initial_state(cid, init, nonces.next(), ka, kb)),
        la(cid, Role::A, ka.public_key, kb.public_key, s0, limit),
        lb(cid, Role::B, ka.public_key, kb.public_key, s0, limit) {}

  // Full exchange; returns what B forwards to the watchtower.
  WatchtowerSubmission pay(Role payer, Amount amount) {
    PartyLedger& from = payer == Role::A ? la : lb;
    PartyLedger& to = payer == Role::A ? lb : la;
    const auto p = propose_payment(from, payer == Role::A ? ka : kb, amount, nonces);
    const auto acc = accept_payment(to, payer == Role::A ? kb : ka, decode_payment(encode(p)));
    complete_payment(from, decode_payment(encode(acc.reply)));
    return acc.submission;
  }

  WatchtowerReceipt receipt_for(const SignedState& s) {
    WatchtowerReceipt rc{cid, s.state.idx, s.commitment(), {}};
    rc.sig_wt = sign(kwt, rc.signed_payload());
    return rc;
  }
};

void expect_reject(OffchainError code, const std::function<void()>& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << offchain_error_name(code);
  } catch (const OffchainReject& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

TEST(Offchain, walkthrough_balances) {
  Pair p;
  p.pay(Role::A, 3);
  p.pay(Role::A, 3);
  EXPECT_EQ(p.la.latest().state, (ChannelState{4, 6, 2}));
  EXPECT_EQ(p.lb.latest().state, (ChannelState{4, 6, 2}));
  EXPECT_EQ(p.la.history().size(), 3u);
  EXPECT_FALSE(p.la.outstanding().has_value());
}

TEST(Offchain, both_sides_hold_the_same_cosigned_state) {
  Pair p({5, 5, 0});
  const auto sub = p.pay(Role::B, 2);
  const SignedState& a = p.la.latest();
  const SignedState& b = p.lb.latest();
  EXPECT_EQ(a.state, (ChannelState{7, 3, 1}));
  EXPECT_EQ(a.r, b.r);
  EXPECT_EQ(a.sig_a, b.sig_a);
  EXPECT_EQ(a.sig_b, b.sig_b);
  const auto payload = payment_payload(p.cid, 1, hash_commit(a.state, a.r));
  EXPECT_TRUE(verify(p.ka.public_key, payload, a.sig_a));
  EXPECT_TRUE(verify(p.kb.public_key, payload, a.sig_b));
  EXPECT_EQ(sub, make_submission(p.cid, a));
  EXPECT_EQ(sub.h_s, hash_commit(a.state, a.r));
}

TEST(Offchain, proposer_errors) {
  Pair p;
  expect_reject(OffchainError::Overdraft, [&] { propose_payment(p.lb, p.kb, 1, p.nonces); });
  expect_reject(OffchainError::Overdraft, [&] { propose_payment(p.la, p.ka, 11, p.nonces); });
  expect_reject(OffchainError::NoOutstandingProposal,
                [&] { complete_payment(p.la, PaymentProposal{p.cid, {9, 1, 1}, Nonce{}, Signature{}}); });
  p.la.mark_closed();
  expect_reject(OffchainError::ChannelClosed, [&] { propose_payment(p.la, p.ka, 1, p.nonces); });
}

TEST(Offchain, receiver_checks) {
  Pair p;
  const auto good = propose_payment(p.la, p.ka, 4, p.nonces);

  auto wrong_cid = good;
  wrong_cid.cid.bytes[0] ^= 1;
  expect_reject(OffchainError::WrongChannel, [&] { accept_payment(p.lb, p.kb, wrong_cid); });

  auto skip = good;
  skip.state.idx = 2;
  skip.sig = sign(p.ka, skip.signed_payload());
  expect_reject(OffchainError::NotMonotonic, [&] { accept_payment(p.lb, p.kb, skip); });

  auto inflate = good;
  inflate.state.bal_b += 1;
  inflate.sig = sign(p.ka, inflate.signed_payload());
  expect_reject(OffchainError::CapacityMismatch, [&] { accept_payment(p.lb, p.kb, inflate); });

  auto forged = good;
  forged.sig = sign(p.kb, forged.signed_payload());
  expect_reject(OffchainError::BadSignature, [&] { accept_payment(p.lb, p.kb, forged); });

  // Nothing changed after the rejections.
  EXPECT_EQ(p.lb.history().size(), 1u);
  EXPECT_NO_THROW(accept_payment(p.lb, p.kb, good));
  expect_reject(OffchainError::NotMonotonic, [&] { accept_payment(p.lb, p.kb, good); });
}

TEST(Offchain, receiver_never_signs_away_funds) {
  Pair p({5, 5, 0});
  // A proposes a state where B pays A; B refuses.
  PaymentProposal grab{p.cid, {7, 3, 1}, p.nonces.next(), {}};
  grab.sig = sign(p.ka, grab.signed_payload());
  expect_reject(OffchainError::Unfavourable, [&] { accept_payment(p.lb, p.kb, grab); });
}

TEST(Offchain, complete_rejects_mismatched_reply) {
  Pair p;
  const auto prop = propose_payment(p.la, p.ka, 2, p.nonces);
  auto acc = accept_payment(p.lb, p.kb, prop);
  auto bad_sig = acc.reply;
  bad_sig.sig = prop.sig;
  expect_reject(OffchainError::BadSignature, [&] { complete_payment(p.la, bad_sig); });
  auto other_state = acc.reply;
  other_state.state.bal_a = 0;
  expect_reject(OffchainError::NotMonotonic, [&] { complete_payment(p.la, other_state); });
  EXPECT_NO_THROW(complete_payment(p.la, acc.reply));
  EXPECT_EQ(p.la.latest().state.idx, 1u);
}

TEST(Offchain, receipts) {
  Pair p;
  p.pay(Role::A, 1);
  p.pay(Role::A, 1);
  const auto r2 = p.receipt_for(p.lb.latest());
  const auto r1 = p.receipt_for(*p.lb.find(1));
  apply_receipt(p.lb, r2, p.kwt.public_key);
  apply_receipt(p.lb, r1, p.kwt.public_key);
  EXPECT_EQ(p.lb.receipt()->idx, 2u);  // the newer receipt is kept

  expect_reject(OffchainError::BadReceipt, [&] { apply_receipt(p.lb, r2, p.ka.public_key); });
  auto wrong_h = r2;
  wrong_h.h_s.bytes[0] ^= 1;
  wrong_h.sig_wt = sign(p.kwt, wrong_h.signed_payload());
  expect_reject(OffchainError::BadReceipt, [&] { apply_receipt(p.lb, wrong_h, p.kwt.public_key); });
  auto unknown = r2;
  unknown.idx = 9;
  unknown.sig_wt = sign(p.kwt, unknown.signed_payload());
  expect_reject(OffchainError::BadReceipt, [&] { apply_receipt(p.lb, unknown, p.kwt.public_key); });
}

TEST(Offchain, bounded_history_keeps_latest) {
  Pair p({100, 0, 0}, 3);
  for (int i = 0; i < 10; ++i) p.pay(Role::A, 1);
  EXPECT_EQ(p.la.history().size(), 3u);
  EXPECT_EQ(p.la.latest().state, (ChannelState{90, 10, 10}));
  ASSERT_NE(p.la.find(8), nullptr);
  EXPECT_EQ(p.la.find(8)->state.idx, 8u);
  EXPECT_EQ(p.la.find(7), nullptr);
}

TEST(Offchain, submission_carries_no_balance_or_nonce) {
  Pair p({0xdeadbeefcafeULL, 0, 0});
  const auto sub = p.pay(Role::A, 0x1234567);
  const Bytes wire = encode(sub);
  const auto& st = p.lb.latest();
  const auto enc = encode_state(st.state);
  auto contains = [&](ByteView needle) {
    return std::search(wire.begin(), wire.end(), needle.begin(), needle.end()) != wire.end();
  };
  EXPECT_FALSE(contains(ByteView(enc.data(), 16)));
  EXPECT_FALSE(contains(ByteView(enc.data() + 16, 16)));
  EXPECT_FALSE(contains(st.r.view()));
}
