#pragma once

// Byte-exact off-chain messages. Layouts are documented in FORMATS.md.

#include <array>
#include <cstddef>

#include "paychan/crypto.hpp"
#include "paychan/types.hpp"

namespace paychan {

/// Party-to-party payment message (165 bytes): cid || bal_A || bal_B || idx || r || sigma.
/// A proposal carries the payer's signature; the counter-signed reply reuses the layout.
struct PaymentProposal {
  static constexpr std::size_t kWireSize = 165;

  Cid cid;
  ChannelState state;
  Nonce r;
  Signature sig;

  Digest commitment() const { return hash_commit(state, r); }
  PaymentPayload signed_payload() const { return payment_payload(cid, state.idx, commitment()); }

  bool operator==(const PaymentProposal&) const = default;
};

/// Party-to-watchtower submission (198 bytes): cid || h_s || idx || sigma_A || sigma_B.
/// Carries no balance or nonce.
struct WatchtowerSubmission {
  static constexpr std::size_t kWireSize = 198;

  Cid cid;
  Digest h_s;
  Index idx = 0;
  Signature sig_a;
  Signature sig_b;

  PaymentPayload signed_payload() const { return payment_payload(cid, idx, h_s); }
  bool operator==(const WatchtowerSubmission&) const = default;
};

/// Watchtower-to-party receipt (195 bytes):
/// framing (2) || cid || idx || h_s || sigma_WT || reserved (60 zero bytes).
struct WatchtowerReceipt {
  static constexpr std::size_t kWireSize = 195;
  static constexpr std::array<std::uint8_t, 2> kFraming{0x57, 0x02};
  static constexpr std::size_t kReserved = 60;

  Cid cid;
  Index idx = 0;
  Digest h_s;
  Signature sig_wt;

  PaymentPayload signed_payload() const { return receipt_payload(cid, idx, h_s); }
  bool verify(const PublicKey& wt) const { return paychan::verify(wt, signed_payload(), sig_wt); }
  bool operator==(const WatchtowerReceipt&) const = default;
};

/// Channel state co-signed together with a recent block hash (231 bytes on the wire):
/// tag || cid || bal_A || bal_B || idx || anchor || sigma_A || sigma_B.
struct ShortLivedAssertion {
  static constexpr std::size_t kWireSize = 231;

  Cid cid;
  ChannelState state;
  Digest anchor;
  Signature sig_a;
  Signature sig_b;

  bool operator==(const ShortLivedAssertion&) const = default;
};

using AssertionPayload = std::array<std::uint8_t, 101>;

/// 0x03 || cid || bal_A || bal_B || idx || anchor.
AssertionPayload assertion_payload(const Cid& cid, const ChannelState& s, const Digest& anchor);

Bytes encode(const PaymentProposal& m);
Bytes encode(const WatchtowerSubmission& m);
Bytes encode(const WatchtowerReceipt& m);
Bytes encode(const ShortLivedAssertion& m);

PaymentProposal decode_payment(ByteView wire);
WatchtowerSubmission decode_submission(ByteView wire);
WatchtowerReceipt decode_receipt(ByteView wire);
ShortLivedAssertion decode_assertion(ByteView wire);

}  // namespace paychan
